//! Experiment settings: defaults, flat `key = value` config files, and
//! command-line overrides, all funnelled through [`ExperimentSpec::set`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::ExperimentError;
use crate::engine::EngineConfig;
use crate::mapper::Mode;
use crate::problems::PagieGrid;
use crate::update::LearningFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Pagie,
    Boston,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Pagie => "pagie",
            ProblemKind::Boston => "boston",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pagie" => Ok(ProblemKind::Pagie),
            "boston" => Ok(ProblemKind::Boston),
            _ => Err(ExperimentError::Config(format!("unknown problem `{s}`"))),
        }
    }
}

pub fn algorithm_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Ge => "ge",
        Mode::Pge => "pge",
    }
}

pub fn parse_algorithm(s: &str) -> Result<Mode, ExperimentError> {
    match s.to_ascii_lowercase().as_str() {
        "ge" => Ok(Mode::Ge),
        "pge" => Ok(Mode::Pge),
        _ => Err(ExperimentError::Config(format!("unknown algorithm `{s}`"))),
    }
}

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithm: Mode,
    pub problem: ProblemKind,
    /// `None` uses the grammar shipped for the problem.
    pub grammar_path: Option<PathBuf>,
    pub runs: usize,
    /// Run `r` uses seed `base_seed + r`.
    pub base_seed: u64,
    pub engine: EngineConfig,
    pub output_dir: PathBuf,
    pub pagie_grid: PagieGrid,
    /// `None` uses the bundled Boston CSV.
    pub boston_csv: Option<PathBuf>,
    /// Fixed Boston split for every run; `None` re-splits with each run's seed.
    pub split_seed: Option<u64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            algorithm: Mode::Pge,
            problem: ProblemKind::Pagie,
            grammar_path: None,
            runs: 100,
            base_seed: 0,
            engine: EngineConfig::default(),
            output_dir: PathBuf::from("results"),
            pagie_grid: PagieGrid::Paper,
            boston_csv: None,
            split_seed: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ExperimentError> {
    value
        .parse()
        .map_err(|_| ExperimentError::Config(format!("{key}: cannot parse `{value}`")))
}

impl ExperimentSpec {
    pub fn seed_for(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    /// Sets one option by its command-line name (without the leading `--`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let value = value.trim();
        let e = &mut self.engine;
        match key.trim() {
            "algorithm" => self.algorithm = parse_algorithm(value)?,
            "problem" => self.problem = value.parse()?,
            "grammar" => self.grammar_path = Some(PathBuf::from(value)),
            "runs" => self.runs = parse(key, value)?,
            "seed" => self.base_seed = parse(key, value)?,
            "pop" => e.population_size = parse(key, value)?,
            "gens" => e.generations = parse(key, value)?,
            "elitism" => e.elitism_fraction = parse(key, value)?,
            "mut-prob" => e.mutation_prob = parse(key, value)?,
            "xo-prob" => e.crossover_prob = parse(key, value)?,
            "tournament" => e.tournament_size = parse(key, value)?,
            "genotype-size" => e.genotype_length = parse(key, value)?,
            "wraps" => e.max_wraps = parse(key, value)?,
            "lambda" => {
                e.lambda = LearningFactor::new(parse(key, value)?)
                    .map_err(|err| ExperimentError::Config(err.to_string()))?
            }
            "out" => self.output_dir = PathBuf::from(value),
            "pagie-grid" => {
                self.pagie_grid = match value {
                    "paper" => PagieGrid::Paper,
                    "conventional" => PagieGrid::Conventional,
                    _ => {
                        return Err(ExperimentError::Config(format!(
                            "pagie-grid must be `paper` or `conventional`, got `{value}`"
                        )))
                    }
                }
            }
            "boston-csv" => self.boston_csv = Some(PathBuf::from(value)),
            "split-seed" => self.split_seed = Some(parse(key, value)?),
            other => return Err(ExperimentError::Config(format!("unknown option `{other}`"))),
        }
        Ok(())
    }

    /// Applies a config file of `key = value` lines. `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<(), ExperimentError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ExperimentError::Config(format!("config line {}: expected `key = value`", i + 1))
            })?;
            self.set(key, value)
                .map_err(|e| ExperimentError::Config(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<(), ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_config_text(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.runs == 0 {
            return Err(ExperimentError::Config("runs must be at least 1".into()));
        }
        self.engine.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_setup() {
        let s = ExperimentSpec::default();
        assert_eq!(s.engine.population_size, 1000);
        assert_eq!(s.engine.generations, 50);
        assert_eq!(s.engine.lambda.value(), 0.01);
        assert_eq!(s.engine.max_wraps, 0);
        assert_eq!(s.engine.genotype_length, 128);
        assert_eq!(s.runs, 100);
    }

    #[test]
    fn config_then_flags() {
        let mut s = ExperimentSpec::default();
        s.apply_config_text("# comment\npop = 200\ngens=30 # trailing\nalgorithm = ge\n")
            .unwrap();
        assert_eq!(s.engine.population_size, 200);
        assert_eq!(s.engine.generations, 30);
        assert_eq!(s.algorithm, Mode::Ge);
        s.set("pop", "50").unwrap();
        assert_eq!(s.engine.population_size, 50);
        assert_eq!(s.seed_for(3), 3);
    }

    #[test]
    fn bad_options() {
        let mut s = ExperimentSpec::default();
        assert!(s.set("lambda", "2").is_err());
        assert!(s.set("pop", "many").is_err());
        assert!(s.set("colour", "red").is_err());
        assert!(s.set("pagie-grid", "square").is_err());
        let err = s.apply_config_text("pop = 10\nnonsense\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        s.runs = 0;
        assert!(s.validate().is_err());
    }
}
