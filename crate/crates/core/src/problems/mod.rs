//! Benchmark regression problems: datasets, phenotype evaluation and RRSE.

mod dataset;
mod expr;

use std::sync::Arc;

use thiserror::Error;

pub use dataset::{
    load_boston, pagie_dataset, pagie_target, parse_boston, Dataset, PagieGrid, Partition,
    BOSTON_CSV, BOSTON_FEATURES, BOSTON_TARGET, BOSTON_TRAIN_FRACTION,
};
pub use expr::{
    protected_div, protected_inv, protected_log, BinaryOp, CompiledExpression, UnaryOp, VALUE_LIMIT,
};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot parse phenotype `{phenotype}`: {message}")]
    Parse { phenotype: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Shape(String),
    #[error("RRSE undefined: all targets are equal")]
    ZeroVariance,
    #[error("empty partition")]
    EmptyPartition,
}

/// Root relative squared error: `sqrt(sum (p - t)^2 / sum (t - mean t)^2)`.
pub fn rrse(predictions: &[f64], targets: &[f64]) -> Result<f64, ProblemError> {
    if predictions.len() != targets.len() {
        return Err(ProblemError::Shape(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(ProblemError::EmptyPartition);
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let denom: f64 = targets.iter().map(|t| (t - mean).powi(2)).sum();
    if denom == 0.0 {
        return Err(ProblemError::ZeroVariance);
    }
    let num: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).powi(2))
        .sum();
    Ok((num / denom).sqrt())
}

/// RRSE of `expr` on one partition of `dataset`.
pub fn fitness(
    expr: &CompiledExpression,
    dataset: &Dataset,
    partition: Partition,
) -> Result<f64, ProblemError> {
    if expr.arity() != dataset.feature_names().len() {
        return Err(ProblemError::Shape(format!(
            "expression compiled for {} features, dataset has {}",
            expr.arity(),
            dataset.feature_names().len()
        )));
    }
    let idx = dataset.indices(partition);
    let mut stack = Vec::new();
    let predictions: Vec<f64> = idx
        .iter()
        .map(|&i| expr.evaluate_with(&dataset.rows()[i], &mut stack))
        .collect();
    let targets: Vec<f64> = idx.iter().map(|&i| dataset.targets()[i]).collect();
    rrse(&predictions, &targets)
}

/// A dataset paired with phenotype scoring.
#[derive(Debug, Clone)]
pub struct Problem {
    dataset: Arc<Dataset>,
}

impl Problem {
    pub fn new(dataset: Dataset) -> Self {
        Problem {
            dataset: Arc::new(dataset),
        }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn has_test(&self) -> bool {
        !self.dataset.indices(Partition::Test).is_empty()
    }

    pub fn score(&self, phenotype: &str, partition: Partition) -> Result<f64, ProblemError> {
        let expr = CompiledExpression::compile(phenotype, self.dataset.feature_names())?;
        fitness(&expr, &self.dataset, partition)
    }
}
