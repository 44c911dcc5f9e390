use std::fmt;
use std::sync::Arc;

use super::{Grammar, NtId};

/// Tolerance for a nonterminal's probabilities summing to one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A grammar with one probability per production.
///
/// The grammar is shared; probabilities are owned, so updating a PCFG never
/// touches the grammar or other copies.
#[derive(Debug, Clone, PartialEq)]
pub struct Pcfg {
    grammar: Arc<Grammar>,
    probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Length {
        nonterminal: String,
        expected: usize,
        found: usize,
    },
    Range {
        nonterminal: String,
        index: usize,
        value: f64,
    },
    Sum {
        nonterminal: String,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length {
                nonterminal,
                expected,
                found,
            } => write!(
                f,
                "<{nonterminal}>: {found} probabilities for {expected} productions"
            ),
            Violation::Range {
                nonterminal,
                index,
                value,
            } => write!(
                f,
                "<{nonterminal}>: probability {index} = {value} outside [0, 1]"
            ),
            Violation::Sum { nonterminal, sum } => {
                write!(f, "<{nonterminal}>: probabilities sum to {sum}")
            }
        }
    }
}

impl Pcfg {
    /// Uniform distribution over every nonterminal's alternatives.
    pub fn uniform(grammar: Arc<Grammar>) -> Self {
        let probs = grammar
            .all_productions()
            .iter()
            .map(|alts| vec![1.0 / alts.len() as f64; alts.len()])
            .collect();
        Pcfg { grammar, probs }
    }

    /// Builds a PCFG from explicit probabilities without checking them; use
    /// [`Pcfg::validate`] to inspect the result.
    pub fn from_probs(grammar: Arc<Grammar>, probs: Vec<Vec<f64>>) -> Self {
        Pcfg { grammar, probs }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn shared_grammar(&self) -> Arc<Grammar> {
        Arc::clone(&self.grammar)
    }

    pub fn probs(&self, nt: NtId) -> &[f64] {
        &self.probs[nt]
    }

    pub fn probs_of(&self, name: &str) -> Option<&[f64]> {
        self.grammar.id(name).map(|nt| self.probs(nt))
    }

    pub fn all_probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn probs_mut(&mut self, nt: NtId) -> &mut Vec<f64> {
        &mut self.probs[nt]
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.probs.len() != self.grammar.len() {
            out.push(Violation::Length {
                nonterminal: "*".into(),
                expected: self.grammar.len(),
                found: self.probs.len(),
            });
            return out;
        }
        for (nt, probs) in self.probs.iter().enumerate() {
            let name = self.grammar.name(nt);
            let expected = self.grammar.productions(nt).len();
            if probs.len() != expected {
                out.push(Violation::Length {
                    nonterminal: name.to_string(),
                    expected,
                    found: probs.len(),
                });
                continue;
            }
            for (index, &value) in probs.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    out.push(Violation::Range {
                        nonterminal: name.to_string(),
                        index,
                        value,
                    });
                }
            }
            let sum: f64 = probs.iter().sum();
            let off = (sum - 1.0).abs();
            if off.is_nan() || off > SUM_TOLERANCE {
                out.push(Violation::Sum {
                    nonterminal: name.to_string(),
                    sum,
                });
            }
        }
        out
    }
}

impl fmt::Display for Pcfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.grammar;
        for nt in 0..g.len() {
            for (i, (prod, p)) in g.productions(nt).iter().zip(&self.probs[nt]).enumerate() {
                let lead = if i == 0 {
                    format!("<{}> ::=", g.name(nt))
                } else {
                    " ".repeat(g.name(nt).len() + 3) + "|"
                };
                writeln!(f, "{lead} {} ({p:.3})", g.production_text(prod))?;
            }
        }
        Ok(())
    }
}
