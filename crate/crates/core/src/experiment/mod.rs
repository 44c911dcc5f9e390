//! Multi-run experiments and their on-disk artifacts.
//!
//! An experiment writes four files into its output directory:
//!
//! * `fitness.csv`: `run,generation,best_fitness,best_ever_fitness,mean_fitness,invalid_count`
//! * `probs.csv` (PGE only): `run,generation,nonterminal,production_index,production_text,probability`
//! * `summary.csv`: mean and population standard deviation of the final
//!   best-ever fitness over all runs, train and test
//! * `best.txt`: one line per run with the best phenotype and its scores
//!
//! Runs execute in parallel but every file is written in run order, so the
//! artifacts do not depend on scheduling.

mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{algorithm_name, parse_algorithm, ExperimentSpec, ProblemKind};

use crate::engine::{run, EngineConfig, EngineError, RunTrace};
use crate::grammar::{parse_bnf, Grammar, GrammarError};
use crate::mapper::Mode;
use crate::problems::{
    pagie_dataset, parse_boston, Dataset, Partition, Problem, ProblemError, BOSTON_CSV,
};

pub const PAGIE_GRAMMAR: &str = include_str!("../../grammars/pagie.bnf");
pub const BOSTON_GRAMMAR: &str = include_str!("../../grammars/boston.bnf");

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Config(String),
    #[error("grammar {path}: {source}")]
    Grammar {
        path: String,
        #[source]
        source: GrammarError,
    },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("no runs found in the given files")]
    Empty,
    #[error("no probability rows for <{0}>")]
    MissingNonterminal(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// Mean and population standard deviation of final best-ever fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub algorithm: String,
    pub problem: String,
    pub runs: usize,
    pub train_mean: f64,
    pub train_std: f64,
    pub test_mean: Option<f64>,
    pub test_std: Option<f64>,
}

impl SummaryRecord {
    /// Two-decimal human-readable form.
    pub fn display_line(&self) -> String {
        let mut s = format!(
            "{} {} ({} runs): train {:.2} ± {:.2}",
            self.algorithm.to_uppercase(),
            self.problem,
            self.runs,
            self.train_mean,
            self.train_std
        );
        if let (Some(m), Some(sd)) = (self.test_mean, self.test_std) {
            let _ = write!(s, ", test {m:.2} ± {sd:.2}");
        }
        s
    }
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub trace: RunTrace,
    /// Train RRSE of the best-ever individual.
    pub train_fitness: f64,
    /// Test RRSE of the best-ever individual, when the problem has a test split.
    pub test_fitness: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub grammar: Arc<Grammar>,
    pub runs: Vec<RunOutcome>,
    pub summary: SummaryRecord,
}

/// Loads the grammar file named in `spec`, or the one shipped for its problem.
pub fn load_grammar(spec: &ExperimentSpec) -> Result<Grammar, ExperimentError> {
    let (label, text) = match &spec.grammar_path {
        Some(p) => (
            p.display().to_string(),
            fs::read_to_string(p).map_err(io_err(p))?,
        ),
        None => match spec.problem {
            ProblemKind::Pagie => ("pagie.bnf".to_string(), PAGIE_GRAMMAR.to_string()),
            ProblemKind::Boston => ("boston.bnf".to_string(), BOSTON_GRAMMAR.to_string()),
        },
    };
    parse_bnf(&text).map_err(|source| ExperimentError::Grammar {
        path: label,
        source,
    })
}

enum DataSource {
    Pagie(Dataset),
    Boston(String),
}

impl DataSource {
    fn load(spec: &ExperimentSpec) -> Result<Self, ExperimentError> {
        Ok(match spec.problem {
            ProblemKind::Pagie => DataSource::Pagie(pagie_dataset(spec.pagie_grid)),
            ProblemKind::Boston => DataSource::Boston(match &spec.boston_csv {
                Some(p) => fs::read_to_string(p).map_err(io_err(p))?,
                None => BOSTON_CSV.to_string(),
            }),
        })
    }

    fn for_run(&self, spec: &ExperimentSpec, run: usize) -> Result<Problem, ExperimentError> {
        Ok(match self {
            DataSource::Pagie(d) => Problem::new(d.clone()),
            DataSource::Boston(text) => {
                let seed = spec.split_seed.unwrap_or_else(|| spec.seed_for(run));
                Problem::new(parse_boston(text, seed)?)
            }
        })
    }
}

fn execute_run(
    spec: &ExperimentSpec,
    grammar: &Arc<Grammar>,
    data: &DataSource,
    run_index: usize,
) -> Result<RunOutcome, ExperimentError> {
    let problem = data.for_run(spec, run_index)?;
    let seed = spec.seed_for(run_index);
    let config = EngineConfig {
        seed,
        ..spec.engine.clone()
    };
    let trace = run(&config, spec.algorithm, Arc::clone(grammar), &problem)?;
    let test_fitness = match (&trace.best.phenotype, problem.has_test()) {
        (Some(p), true) => Some(problem.score(p, Partition::Test)?),
        (None, true) => Some(crate::engine::WORST_FITNESS),
        (_, false) => None,
    };
    Ok(RunOutcome {
        run: run_index,
        seed,
        train_fitness: trace.best.fitness,
        test_fitness,
        trace,
    })
}

/// Runs every seed of the experiment without touching the filesystem
/// (beyond reading the grammar and dataset).
pub fn execute(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let grammar = Arc::new(load_grammar(spec)?);
    let data = DataSource::load(spec)?;
    let runs = (0..spec.runs)
        .into_par_iter()
        .map(|r| execute_run(spec, &grammar, &data, r))
        .collect::<Result<Vec<_>, _>>()?;

    let train: Vec<f64> = runs.iter().map(|r| r.train_fitness).collect();
    let test: Vec<f64> = runs.iter().filter_map(|r| r.test_fitness).collect();
    let (train_mean, train_std) = mean_std(&train).ok_or(ExperimentError::Empty)?;
    let test_stats = mean_std(&test);
    let summary = SummaryRecord {
        algorithm: algorithm_name(spec.algorithm).to_string(),
        problem: spec.problem.as_str().to_string(),
        runs: runs.len(),
        train_mean,
        train_std,
        test_mean: test_stats.map(|s| s.0),
        test_std: test_stats.map(|s| s.1),
    };
    Ok(ExperimentResult {
        grammar,
        runs,
        summary,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `fitness.csv`, `probs.csv` (PGE), `summary.csv` and `best.txt`.
pub fn write_artifacts(dir: &Path, result: &ExperimentResult) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let path = dir.join("fitness.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record([
        "run",
        "generation",
        "best_fitness",
        "best_ever_fitness",
        "mean_fitness",
        "invalid_count",
    ])
    .map_err(csv_err(&path))?;
    for r in &result.runs {
        for rec in &r.trace.records {
            w.write_record([
                r.run.to_string(),
                rec.generation.to_string(),
                rec.best_fitness.to_string(),
                rec.best_ever_fitness.to_string(),
                rec.mean_fitness.to_string(),
                rec.invalid_count.to_string(),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))?;

    let probs_path = dir.join("probs.csv");
    if result.runs.iter().any(|r| r.trace.mode == Mode::Pge) {
        let g = &result.grammar;
        let texts: Vec<Vec<String>> = (0..g.len())
            .map(|nt| {
                g.productions(nt)
                    .iter()
                    .map(|p| g.production_text(p))
                    .collect()
            })
            .collect();
        let mut w = csv::Writer::from_path(&probs_path).map_err(csv_err(&probs_path))?;
        w.write_record([
            "run",
            "generation",
            "nonterminal",
            "production_index",
            "production_text",
            "probability",
        ])
        .map_err(csv_err(&probs_path))?;
        for r in &result.runs {
            for (generation, snapshot) in r.trace.probabilities.iter().enumerate() {
                for (nt, probs) in snapshot.iter().enumerate() {
                    for (i, p) in probs.iter().enumerate() {
                        w.write_record([
                            r.run.to_string(),
                            generation.to_string(),
                            g.name(nt).to_string(),
                            i.to_string(),
                            texts[nt][i].clone(),
                            p.to_string(),
                        ])
                        .map_err(csv_err(&probs_path))?;
                    }
                }
            }
        }
        w.flush().map_err(io_err(&probs_path))?;
    } else if probs_path.exists() {
        // stale file from an earlier PGE experiment in the same directory
        fs::remove_file(&probs_path).map_err(io_err(&probs_path))?;
    }

    let path = dir.join("summary.csv");
    let s = &result.summary;
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record([
        "algorithm",
        "problem",
        "runs",
        "train_mean",
        "train_std",
        "test_mean",
        "test_std",
    ])
    .map_err(csv_err(&path))?;
    w.write_record([
        s.algorithm.clone(),
        s.problem.clone(),
        s.runs.to_string(),
        s.train_mean.to_string(),
        s.train_std.to_string(),
        opt(s.test_mean),
        opt(s.test_std),
    ])
    .map_err(csv_err(&path))?;
    w.flush().map_err(io_err(&path))?;

    let mut best = String::new();
    for r in &result.runs {
        let _ = write!(
            best,
            "run={} seed={} generation={} train={}",
            r.run, r.seed, r.trace.best.generation, r.train_fitness
        );
        if let Some(t) = r.test_fitness {
            let _ = write!(best, " test={t}");
        }
        let phenotype = r.trace.best.phenotype.as_deref().unwrap_or("<invalid>");
        let _ = writeln!(best, " phenotype={phenotype}");
    }
    let path = dir.join("best.txt");
    fs::write(&path, best).map_err(io_err(&path))?;
    Ok(())
}

/// Runs the experiment and writes its artifacts to `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    let result = execute(spec)?;
    write_artifacts(&spec.output_dir, &result)?;
    Ok(result)
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>, ExperimentError> {
    csv::Reader::from_path(path).map_err(csv_err(path))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, ExperimentError> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        ExperimentError::Config(format!("{}: missing column `{name}`", path.display()))
    })
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    path: &Path,
) -> Result<T, ExperimentError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        ExperimentError::Config(format!("{}:{line}: cannot parse `{raw}`", path.display()))
    })
}

/// Final best-ever fitness per run, read back from `fitness.csv` files.
/// Runs are keyed by file and run number.
pub fn final_fitnesses(paths: &[PathBuf]) -> Result<Vec<f64>, ExperimentError> {
    let mut last: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    for (file, path) in paths.iter().enumerate() {
        let mut reader = open_csv(path)?;
        let headers = reader.headers().map_err(csv_err(path))?.clone();
        let run_col = column(&headers, "run", path)?;
        let gen_col = column(&headers, "generation", path)?;
        let best_col = column(&headers, "best_ever_fitness", path)?;
        for rec in reader.records() {
            let rec = rec.map_err(csv_err(path))?;
            let run: usize = field(&rec, run_col, path)?;
            let generation: usize = field(&rec, gen_col, path)?;
            let best: f64 = field(&rec, best_col, path)?;
            let entry = last.entry((file, run)).or_insert((generation, best));
            if generation >= entry.0 {
                *entry = (generation, best);
            }
        }
    }
    if last.is_empty() {
        return Err(ExperimentError::Empty);
    }
    Ok(last.into_values().map(|(_, f)| f).collect())
}

/// Train-fitness summary over the runs found in `fitness.csv` files.
pub fn summarize(paths: &[PathBuf]) -> Result<SummaryRecord, ExperimentError> {
    let finals = final_fitnesses(paths)?;
    let (train_mean, train_std) = mean_std(&finals).ok_or(ExperimentError::Empty)?;
    Ok(SummaryRecord {
        algorithm: String::new(),
        problem: String::new(),
        runs: finals.len(),
        train_mean,
        train_std,
        test_mean: None,
        test_std: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductionProbability {
    pub production_index: usize,
    pub production_text: String,
    pub probability: f64,
}

/// Mean final-generation probability of each production of `nonterminal`
/// across all runs in the given `probs.csv` files, highest first.
pub fn dump_final_probs(
    paths: &[PathBuf],
    nonterminal: &str,
) -> Result<Vec<ProductionProbability>, ExperimentError> {
    // (file, run) -> (generation, index -> (text, prob))
    type Final = (usize, BTreeMap<usize, (String, f64)>);
    let mut finals: BTreeMap<(usize, usize), Final> = BTreeMap::new();
    for (file, path) in paths.iter().enumerate() {
        let mut reader = open_csv(path)?;
        let headers = reader.headers().map_err(csv_err(path))?.clone();
        let run_col = column(&headers, "run", path)?;
        let gen_col = column(&headers, "generation", path)?;
        let nt_col = column(&headers, "nonterminal", path)?;
        let idx_col = column(&headers, "production_index", path)?;
        let text_col = column(&headers, "production_text", path)?;
        let prob_col = column(&headers, "probability", path)?;
        for rec in reader.records() {
            let rec = rec.map_err(csv_err(path))?;
            if rec.get(nt_col) != Some(nonterminal) {
                continue;
            }
            let run: usize = field(&rec, run_col, path)?;
            let generation: usize = field(&rec, gen_col, path)?;
            let index: usize = field(&rec, idx_col, path)?;
            let prob: f64 = field(&rec, prob_col, path)?;
            let text = rec.get(text_col).unwrap_or("").to_string();
            let entry = finals
                .entry((file, run))
                .or_insert_with(|| (generation, BTreeMap::new()));
            if generation > entry.0 {
                *entry = (generation, BTreeMap::new());
            }
            if generation == entry.0 {
                entry.1.insert(index, (text, prob));
            }
        }
    }
    if finals.is_empty() {
        return Err(ExperimentError::MissingNonterminal(nonterminal.to_string()));
    }

    let n = finals.len() as f64;
    let mut sums: BTreeMap<usize, (String, f64)> = BTreeMap::new();
    for (_, prods) in finals.values() {
        for (&i, (text, p)) in prods {
            let e = sums.entry(i).or_insert_with(|| (text.clone(), 0.0));
            e.1 += p;
        }
    }
    let mut out: Vec<ProductionProbability> = sums
        .into_iter()
        .map(|(i, (text, total))| ProductionProbability {
            production_index: i,
            production_text: text,
            probability: total / n,
        })
        .collect();
    out.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    Ok(out)
}
