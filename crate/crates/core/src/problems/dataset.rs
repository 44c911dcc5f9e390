use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::expr::protected_div;
use super::ProblemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Train,
    Test,
}

/// Feature rows with one target each, split into train and test rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl Dataset {
    /// Every row goes to the training partition.
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        if rows.len() != targets.len() {
            return Err(ProblemError::Shape(format!(
                "{} rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != feature_names.len()) {
            return Err(ProblemError::ColumnCount {
                row: i + 1,
                expected: feature_names.len(),
                found: rows[i].len(),
            });
        }
        let train = (0..rows.len()).collect();
        Ok(Dataset {
            feature_names,
            rows,
            targets,
            train,
            test: Vec::new(),
        })
    }

    /// Shuffles row indices with `seed` and puts the first
    /// `floor(train_fraction * n)` into the training partition.
    pub fn split(mut self, train_fraction: f64, seed: u64) -> Self {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = (train_fraction * idx.len() as f64).floor() as usize;
        self.test = idx.split_off(n_train);
        self.train = idx;
        self
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn indices(&self, partition: Partition) -> &[usize] {
        match partition {
            Partition::Train => &self.train,
            Partition::Test => &self.test,
        }
    }

    pub fn write_csv<W: std::io::Write>(
        &self,
        out: W,
        target_name: &str,
    ) -> Result<(), ProblemError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(target_name);
        w.write_record(&header)?;
        for (row, t) in self.rows.iter().zip(&self.targets) {
            let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
            rec.push(t.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PagieGrid {
    /// `[-5, 5.4]`, 27 points per axis.
    #[default]
    Paper,
    /// `[-5, 5]`, 26 points per axis.
    Conventional,
}

impl PagieGrid {
    pub fn points(self) -> usize {
        match self {
            PagieGrid::Paper => 27,
            PagieGrid::Conventional => 26,
        }
    }

    pub fn axis(self) -> Vec<f64> {
        (0..self.points()).map(|k| -5.0 + 0.4 * k as f64).collect()
    }
}

/// `1/(1 + x^-4) + 1/(1 + y^-4)`, both divisions protected.
pub fn pagie_target(x: f64, y: f64) -> f64 {
    let term = |v: f64| protected_div(1.0, 1.0 + protected_div(1.0, v * v * v * v));
    term(x) + term(y)
}

pub fn pagie_dataset(grid: PagieGrid) -> Dataset {
    let axis = grid.axis();
    let mut rows = Vec::with_capacity(axis.len() * axis.len());
    let mut targets = Vec::with_capacity(rows.capacity());
    for &x in &axis {
        for &y in &axis {
            rows.push(vec![x, y]);
            targets.push(pagie_target(x, y));
        }
    }
    Dataset::new(vec!["x".into(), "y".into()], rows, targets).expect("grid rows have two columns")
}

pub const BOSTON_FEATURES: [&str; 13] = [
    "CRIM", "ZN", "INDUS", "CHAS", "NOX", "RM", "AGE", "DIS", "RAD", "TAX", "PTRATIO", "B", "LSTAT",
];
pub const BOSTON_TARGET: &str = "MEDV";
pub const BOSTON_TRAIN_FRACTION: f64 = 0.9;

/// Copy of the StatLib Boston Housing data shipped with the crate.
pub const BOSTON_CSV: &str = include_str!("../../data/boston.csv");

pub fn load_boston(path: &Path, split_seed: u64) -> Result<Dataset, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_boston(&text, split_seed)
}

/// Parses the 14-column Boston CSV (header row, `MEDV` last) and applies the
/// seeded 90/10 split.
pub fn parse_boston(text: &str, split_seed: u64) -> Result<Dataset, ProblemError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let expected: Vec<&str> = BOSTON_FEATURES
        .iter()
        .copied()
        .chain([BOSTON_TARGET])
        .collect();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != expected {
        return Err(ProblemError::Header(format!(
            "expected columns {}, found {}",
            expected.join(","),
            found.join(",")
        )));
    }

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != expected.len() {
            return Err(ProblemError::ColumnCount {
                row,
                expected: expected.len(),
                found: rec.len(),
            });
        }
        let mut values = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| ProblemError::MalformedRow {
                    row,
                    message: format!("`{field}` is not a number"),
                })?;
            values.push(v);
        }
        targets.push(values.pop().expect("row has 14 values"));
        rows.push(values);
    }

    let names = BOSTON_FEATURES.iter().map(|s| s.to_string()).collect();
    Ok(Dataset::new(names, rows, targets)?.split(BOSTON_TRAIN_FRACTION, split_seed))
}
