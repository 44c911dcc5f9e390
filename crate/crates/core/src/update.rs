//! Grammar adaptation from the expansion counters of one individual.

use thiserror::Error;

use crate::grammar::Pcfg;
use crate::mapper::ExpansionCounters;

/// Renormalization stops once the sum is this close to one.
pub const RENORM_TOLERANCE: f64 = 1e-9;

/// Upper bound on renormalization passes. Each pass shrinks the residual by
/// at least a factor `(j - 1) / j`, so this covers any realistic `j`.
pub const MAX_RENORM_PASSES: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum UpdateError {
    #[error("learning factor {0} outside [0, 1]")]
    LearningFactor(f64),
    #[error("counters cover {found} nonterminals, grammar has {expected}")]
    NonterminalCount { expected: usize, found: usize },
    #[error("<{nonterminal}>: {found} counters for {expected} productions")]
    ProductionCount {
        nonterminal: String,
        expected: usize,
        found: usize,
    },
    #[error("renormalization did not converge (sum {sum})")]
    NonConvergence { sum: f64 },
}

/// Step size of the probability update, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LearningFactor(f64);

impl LearningFactor {
    pub fn new(lambda: f64) -> Result<Self, UpdateError> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(LearningFactor(lambda))
        } else {
            Err(UpdateError::LearningFactor(lambda))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for LearningFactor {
    fn default() -> Self {
        LearningFactor(0.01)
    }
}

/// Returns a new PCFG where every production used by the individual gains
/// `lambda * share` and every unused one loses `lambda * p`, followed by
/// renormalization of each nonterminal.
pub fn update_probabilities(
    pcfg: &Pcfg,
    counters: &ExpansionCounters,
    lambda: LearningFactor,
) -> Result<Pcfg, UpdateError> {
    let grammar = pcfg.grammar();
    if counters.all().len() != grammar.len() {
        return Err(UpdateError::NonterminalCount {
            expected: grammar.len(),
            found: counters.all().len(),
        });
    }
    let lambda = lambda.value();
    let mut out = pcfg.clone();
    for nt in 0..grammar.len() {
        let counts = counters.counts(nt);
        let probs = out.probs_mut(nt);
        if counts.len() != probs.len() {
            return Err(UpdateError::ProductionCount {
                nonterminal: grammar.name(nt).to_string(),
                expected: probs.len(),
                found: counts.len(),
            });
        }
        let total: f64 = counts.iter().map(|&c| c as f64).sum();
        for (p, &c) in probs.iter_mut().zip(counts) {
            if c > 0 {
                *p = (*p + lambda * c as f64 / total).min(1.0);
            } else {
                *p -= lambda * *p;
            }
        }
        renormalize(probs)?;
    }
    Ok(out)
}

/// Spreads the missing (or excess) mass equally over all entries, clamping
/// to `[0, 1]`, until the entries sum to one.
pub fn renormalize(probs: &mut [f64]) -> Result<(), UpdateError> {
    let j = probs.len() as f64;
    for _ in 0..MAX_RENORM_PASSES {
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() <= RENORM_TOLERANCE {
            return Ok(());
        }
        let extra = (1.0 - sum) / j;
        for p in probs.iter_mut() {
            *p = (*p + extra).clamp(0.0, 1.0);
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() <= RENORM_TOLERANCE {
        Ok(())
    } else {
        Err(UpdateError::NonConvergence { sum })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_bnf;
    use std::sync::Arc;

    #[test]
    fn one_pass_removes_excess() {
        let mut p = [0.5 + 0.01 / 3.0, 0.5 + 0.02 / 3.0];
        renormalize(&mut p).unwrap();
        assert!((p[0] - 0.498).abs() < 5e-4);
        assert!((p[1] - 0.502).abs() < 5e-4);

        let mut p = [0.9, 0.9];
        renormalize(&mut p).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);

        let mut p = [0.25; 4];
        renormalize(&mut p).unwrap();
        assert_eq!(p, [0.25; 4]);
    }

    #[test]
    fn clamped_entries_converge() {
        // the zeros clamp on every pass; residual shrinks by 12/14 per pass
        let mut p = vec![0.0; 14];
        p[0] = 0.505;
        p[1] = 0.505;
        renormalize(&mut p).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= RENORM_TOLERANCE);
        assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn all_zero_distribution_recovers_uniform() {
        let mut p = [0.0; 3];
        renormalize(&mut p).unwrap();
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn learning_factor_range() {
        assert!(LearningFactor::new(0.0).is_ok());
        assert!(LearningFactor::new(1.0).is_ok());
        assert_eq!(
            LearningFactor::new(1.5),
            Err(UpdateError::LearningFactor(1.5))
        );
        assert!(LearningFactor::new(-0.01).is_err());
        assert!(LearningFactor::new(f64::NAN).is_err());
        assert_eq!(LearningFactor::default().value(), 0.01);
    }

    #[test]
    fn dimension_mismatch() {
        let g = Arc::new(parse_bnf("<s> ::= <a> | b\n<a> ::= c | d | e").unwrap());
        let pcfg = Pcfg::uniform(g);
        let lambda = LearningFactor::new(0.1).unwrap();
        let short = ExpansionCounters::from_counts(vec![vec![1, 0]]);
        assert!(matches!(
            update_probabilities(&pcfg, &short, lambda),
            Err(UpdateError::NonterminalCount {
                expected: 2,
                found: 1
            })
        ));
        let ragged = ExpansionCounters::from_counts(vec![vec![1, 0], vec![1, 0]]);
        assert!(matches!(
            update_probabilities(&pcfg, &ragged, lambda),
            Err(UpdateError::ProductionCount {
                expected: 3,
                found: 2,
                ..
            })
        ));
    }

    #[test]
    fn single_production_stays_one() {
        let g = Arc::new(parse_bnf("<s> ::= <a>\n<a> ::= c | d").unwrap());
        let pcfg = Pcfg::uniform(g);
        let counters = ExpansionCounters::from_counts(vec![vec![5], vec![2, 3]]);
        let next =
            update_probabilities(&pcfg, &counters, LearningFactor::new(0.3).unwrap()).unwrap();
        assert_eq!(next.probs(0), [1.0]);
    }

    #[test]
    fn unexpanded_uniform_nonterminal_is_unchanged() {
        // (1 - l)/k + (1 - (1 - l)) / k = 1/k
        let g = Arc::new(parse_bnf("<s> ::= a\n<a> ::= c | d | e | f").unwrap());
        let pcfg = Pcfg::uniform(g);
        let counters = ExpansionCounters::from_counts(vec![vec![1], vec![0; 4]]);
        let next =
            update_probabilities(&pcfg, &counters, LearningFactor::new(0.2).unwrap()).unwrap();
        for &p in next.probs(1) {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }
}
