//! Generational loop shared by GE and PGE.
//!
//! Each generation every genotype is mapped with the current grammar and
//! scored. Under PGE the grammar is then adapted from the counters of either
//! the generation's best or the best-ever individual, so elites carried into
//! the next generation are re-mapped and may change phenotype.

mod operators;

use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use operators::{
    choose_adaptation_individual, crossover_at, init_population, mutate, one_point_crossover,
    tournament_select,
};

use crate::grammar::{Grammar, Pcfg};
use crate::mapper::{map_genotype, ExpansionCounters, Genotype, MappingResult, Mode};
use crate::problems::{Partition, Problem, ProblemError};
use crate::update::{update_probabilities, LearningFactor, UpdateError};

/// Fitness assigned to invalid individuals. Lower is better, and no RRSE
/// of a clamped prediction reaches this.
pub const WORST_FITNESS: f64 = f64::MAX;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error("crossover parents differ in length ({left} vs {right})")]
    Crossover { left: usize, right: usize },
    #[error("crossover parents use different codon types")]
    ModeMismatch,
}

/// Scores a phenotype; lower is better.
pub trait Evaluator {
    fn evaluate(&self, phenotype: &str) -> Result<f64, ProblemError>;
}

impl Evaluator for Problem {
    fn evaluate(&self, phenotype: &str) -> Result<f64, ProblemError> {
        self.score(phenotype, Partition::Train)
    }
}

impl<F> Evaluator for F
where
    F: Fn(&str) -> Result<f64, ProblemError>,
{
    fn evaluate(&self, phenotype: &str) -> Result<f64, ProblemError> {
        self(phenotype)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub population_size: usize,
    pub generations: usize,
    pub elitism_fraction: f64,
    /// Per-codon replacement probability.
    pub mutation_prob: f64,
    /// Per-pair probability of applying crossover.
    pub crossover_prob: f64,
    pub tournament_size: usize,
    pub genotype_length: usize,
    pub max_wraps: usize,
    pub lambda: LearningFactor,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            population_size: 1000,
            generations: 50,
            elitism_fraction: 0.1,
            mutation_prob: 0.05,
            crossover_prob: 0.9,
            tournament_size: 3,
            genotype_length: 128,
            max_wraps: 0,
            lambda: LearningFactor::default(),
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::Config(m.to_string()));
        if self.tournament_size < 1 {
            return bad("tournament size must be at least 1");
        }
        if self.population_size < self.tournament_size {
            return bad("population size must be at least the tournament size");
        }
        if self.genotype_length < 1 {
            return bad("genotype length must be at least 1");
        }
        for (name, v) in [
            ("elitism fraction", self.elitism_fraction),
            ("mutation probability", self.mutation_prob),
            ("crossover probability", self.crossover_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(EngineError::Config(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.elitism_fraction * self.population_size as f64).round() as usize)
            .min(self.population_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub mapping: Option<MappingResult>,
    pub fitness: f64,
    pub evaluated: bool,
}

impl Individual {
    pub fn new(genotype: Genotype) -> Self {
        Individual {
            genotype,
            mapping: None,
            fitness: WORST_FITNESS,
            evaluated: false,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.mapping.as_ref().is_some_and(MappingResult::is_valid)
    }

    pub fn phenotype(&self) -> Option<&str> {
        self.mapping.as_ref()?.phenotype.as_deref()
    }
}

/// An individual frozen at the generation it was recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub generation: usize,
    pub genotype: Genotype,
    pub phenotype: Option<String>,
    pub fitness: f64,
    pub counters: ExpansionCounters,
}

impl Snapshot {
    fn of(ind: &Individual, generation: usize) -> Self {
        let mapping = ind
            .mapping
            .as_ref()
            .expect("snapshot of unevaluated individual");
        Snapshot {
            generation,
            genotype: ind.genotype.clone(),
            phenotype: mapping.phenotype.clone(),
            fitness: ind.fitness,
            counters: mapping.counters.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_ever_fitness: f64,
    /// Mean over valid individuals; [`WORST_FITNESS`] if none is valid.
    pub mean_fitness: f64,
    pub invalid_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub mode: Mode,
    pub records: Vec<GenerationRecord>,
    /// PGE only: the probabilities used to map each generation.
    pub probabilities: Vec<Vec<Vec<f64>>>,
    pub best: Snapshot,
    pub final_pcfg: Pcfg,
}

/// Maps and scores one genotype. `cache` memoizes phenotype scores.
pub fn evaluate_individual<E: Evaluator + ?Sized>(
    genotype: Genotype,
    pcfg: &Pcfg,
    max_wraps: usize,
    evaluator: &E,
    cache: &mut HashMap<String, f64>,
) -> Result<Individual, EngineError> {
    let mapping = map_genotype(&genotype, pcfg, max_wraps);
    let fitness = match &mapping.phenotype {
        None => WORST_FITNESS,
        Some(p) => match cache.get(p) {
            Some(&f) => f,
            None => {
                let f = evaluator.evaluate(p)?;
                cache.insert(p.clone(), f);
                f
            }
        },
    };
    Ok(Individual {
        genotype,
        mapping: Some(mapping),
        fitness,
        evaluated: true,
    })
}

fn best_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in population.iter().enumerate().skip(1) {
        if ind.fitness < population[best].fitness {
            best = i;
        }
    }
    best
}

fn summarize(
    generation: usize,
    population: &[Individual],
    best: f64,
    best_ever: f64,
) -> GenerationRecord {
    let valid: Vec<f64> = population
        .iter()
        .filter(|i| i.is_valid())
        .map(|i| i.fitness)
        .collect();
    let mean_fitness = if valid.is_empty() {
        WORST_FITNESS
    } else {
        valid.iter().sum::<f64>() / valid.len() as f64
    };
    GenerationRecord {
        generation,
        best_fitness: best,
        best_ever_fitness: best_ever,
        mean_fitness,
        invalid_count: population.len() - valid.len(),
    }
}

/// Elites by fitness (stable), then tournament, crossover and mutation.
fn next_generation(
    population: &[Individual],
    config: &EngineConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Genotype>, EngineError> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[a].fitness.total_cmp(&population[b].fitness));

    let mut next: Vec<Genotype> = order
        .iter()
        .take(config.elite_count())
        .map(|&i| population[i].genotype.clone())
        .collect();

    while next.len() < config.population_size {
        let a = tournament_select(population, config.tournament_size, rng);
        let b = tournament_select(population, config.tournament_size, rng);
        let (mut x, mut y) =
            one_point_crossover(&a.genotype, &b.genotype, config.crossover_prob, rng)?;
        mutate(&mut x, config.mutation_prob, rng);
        mutate(&mut y, config.mutation_prob, rng);
        next.push(x);
        if next.len() < config.population_size {
            next.push(y);
        }
    }
    Ok(next)
}

/// Runs `config.generations` generations after the initial evaluation.
pub fn run<E: Evaluator + ?Sized>(
    config: &EngineConfig,
    mode: Mode,
    grammar: Arc<Grammar>,
    evaluator: &E,
) -> Result<RunTrace, EngineError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pcfg = Pcfg::uniform(grammar);
    let mut genotypes = init_population(config, mode, &mut rng);
    let mut cache: HashMap<String, f64> = HashMap::new();

    let mut records = Vec::with_capacity(config.generations + 1);
    let mut probabilities = Vec::new();
    let mut best_ever: Option<Snapshot> = None;

    for generation in 0..=config.generations {
        let population = genotypes
            .into_iter()
            .map(|g| evaluate_individual(g, &pcfg, config.max_wraps, evaluator, &mut cache))
            .collect::<Result<Vec<_>, _>>()?;

        let gen_best = Snapshot::of(&population[best_index(&population)], generation);
        let improved = best_ever
            .as_ref()
            .is_none_or(|b| gen_best.fitness < b.fitness);
        if improved {
            best_ever = Some(gen_best.clone());
        }
        let overall = best_ever.as_ref().expect("set above");
        records.push(summarize(
            generation,
            &population,
            gen_best.fitness,
            overall.fitness,
        ));
        if mode == Mode::Pge {
            probabilities.push(pcfg.all_probs().to_vec());
        }

        if generation == config.generations {
            break;
        }
        if mode == Mode::Pge {
            let chosen = choose_adaptation_individual(generation, &gen_best, overall);
            pcfg = update_probabilities(&pcfg, &chosen.counters, config.lambda)?;
        }
        genotypes = next_generation(&population, config, &mut rng)?;
    }

    Ok(RunTrace {
        mode,
        records,
        probabilities,
        best: best_ever.expect("at least one generation ran"),
        final_pcfg: pcfg,
    })
}
