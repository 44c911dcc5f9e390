use rand::Rng;

use super::{EngineConfig, EngineError, Individual};
use crate::mapper::{Genotype, Mode};

fn random_genotype<R: Rng + ?Sized>(mode: Mode, length: usize, rng: &mut R) -> Genotype {
    match mode {
        Mode::Ge => Genotype::Integer((0..length).map(|_| rng.gen::<u8>()).collect()),
        Mode::Pge => Genotype::Float((0..length).map(|_| rng.gen::<f64>()).collect()),
    }
}

/// `population_size` uniformly random genotypes of `genotype_length` codons.
pub fn init_population<R: Rng + ?Sized>(
    config: &EngineConfig,
    mode: Mode,
    rng: &mut R,
) -> Vec<Genotype> {
    (0..config.population_size)
        .map(|_| random_genotype(mode, config.genotype_length, rng))
        .collect()
}

/// Best of `k` draws with replacement; the earliest draw wins ties.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    population: &'a [Individual],
    k: usize,
    rng: &mut R,
) -> &'a Individual {
    let mut best = &population[rng.gen_range(0..population.len())];
    for _ in 1..k {
        let cand = &population[rng.gen_range(0..population.len())];
        if cand.fitness < best.fitness {
            best = cand;
        }
    }
    best
}

/// Swaps the tails of `a` and `b` starting at codon `cut`.
pub fn crossover_at(
    a: &Genotype,
    b: &Genotype,
    cut: usize,
) -> Result<(Genotype, Genotype), EngineError> {
    fn swap<T: Clone>(a: &[T], b: &[T], cut: usize) -> (Vec<T>, Vec<T>) {
        let mut x = a[..cut].to_vec();
        x.extend_from_slice(&b[cut..]);
        let mut y = b[..cut].to_vec();
        y.extend_from_slice(&a[cut..]);
        (x, y)
    }
    if a.len() != b.len() || cut > a.len() {
        return Err(EngineError::Crossover {
            left: a.len(),
            right: b.len(),
        });
    }
    match (a, b) {
        (Genotype::Integer(a), Genotype::Integer(b)) => {
            let (x, y) = swap(a, b, cut);
            Ok((Genotype::Integer(x), Genotype::Integer(y)))
        }
        (Genotype::Float(a), Genotype::Float(b)) => {
            let (x, y) = swap(a, b, cut);
            Ok((Genotype::Float(x), Genotype::Float(y)))
        }
        _ => Err(EngineError::ModeMismatch),
    }
}

/// One-point crossover applied with probability `prob`; the cut point is
/// uniform in `[1, len - 1]`.
pub fn one_point_crossover<R: Rng + ?Sized>(
    a: &Genotype,
    b: &Genotype,
    prob: f64,
    rng: &mut R,
) -> Result<(Genotype, Genotype), EngineError> {
    if a.len() != b.len() {
        return Err(EngineError::Crossover {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.mode() != b.mode() {
        return Err(EngineError::ModeMismatch);
    }
    if a.len() < 2 || rng.gen::<f64>() >= prob {
        return Ok((a.clone(), b.clone()));
    }
    let cut = rng.gen_range(1..a.len());
    crossover_at(a, b, cut)
}

/// Replaces each codon with probability `prob` by a fresh uniform draw.
pub fn mutate<R: Rng + ?Sized>(genotype: &mut Genotype, prob: f64, rng: &mut R) {
    match genotype {
        Genotype::Integer(codons) => {
            for c in codons.iter_mut() {
                if rng.gen::<f64>() < prob {
                    *c = rng.gen();
                }
            }
        }
        Genotype::Float(codons) => {
            for c in codons.iter_mut() {
                if rng.gen::<f64>() < prob {
                    *c = rng.gen();
                }
            }
        }
    }
}

/// Individual whose counters drive the grammar update: the generation's best
/// on even generations, the best seen so far on odd ones.
pub fn choose_adaptation_individual<'a, T>(
    generation: usize,
    best_of_generation: &'a T,
    best_overall: &'a T,
) -> &'a T {
    if generation.is_multiple_of(2) {
        best_of_generation
    } else {
        best_overall
    }
}
