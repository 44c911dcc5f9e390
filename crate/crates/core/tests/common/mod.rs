//! Reference derivation interpreters shared by the integration tests.
//!
//! They use only the public grammar API and a plain recursive descent, so
//! they share no code path with the stack-based mapper under test.

#![allow(dead_code)]

use std::sync::Arc;

use pge_core::grammar::{parse_bnf, Grammar, Pcfg, Symbol};
use rand::Rng;

pub const TWO_RULE_GRAMMAR: &str = "<e> ::= <e> + <v> | ( <e> ) | <v>\n<v> ::= a | b\n";

pub const EXAMPLE_GE: &str = "<start> ::= <expr>\n\
                              <expr> ::= <expr> <op> <expr> | <var>\n\
                              <op> ::= + | - | * | /\n\
                              <var> ::= x | y | 1.0\n";

pub const EXAMPLE_PGE: &str = "<start> ::= <expr>\n\
                               <expr> ::= <expr> <op> <expr> | <var>\n\
                               <op> ::= + | * | -\n\
                               <var> ::= x | 1.0\n";

pub fn grammar(text: &str) -> Arc<Grammar> {
    Arc::new(parse_bnf(text).expect("test grammar parses"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub phenotype: Option<String>,
    pub choices: Vec<(usize, usize)>,
    pub counts: Vec<Vec<u32>>,
    pub codons_used: usize,
    pub wraps_used: usize,
}

enum Rule<'a> {
    Modulo(&'a [u8]),
    Interval(&'a [f64], &'a Pcfg),
}

struct Interpreter<'a> {
    grammar: &'a Grammar,
    rule: Rule<'a>,
    len: usize,
    pos: usize,
    wraps: usize,
    max_wraps: usize,
    used: usize,
    tokens: Vec<String>,
    choices: Vec<(usize, usize)>,
    counts: Vec<Vec<u32>>,
}

impl Interpreter<'_> {
    fn next_position(&mut self) -> Option<usize> {
        if self.pos >= self.len {
            if self.len == 0 || self.wraps >= self.max_wraps {
                return None;
            }
            self.wraps += 1;
            self.pos = 0;
        }
        self.pos += 1;
        self.used += 1;
        Some(self.pos - 1)
    }

    fn pick(&mut self, nt: usize) -> Option<usize> {
        let k = self.grammar.productions(nt).len();
        match self.rule {
            Rule::Modulo(codons) => {
                if k == 1 {
                    Some(0)
                } else {
                    let i = self.next_position()?;
                    Some(usize::from(codons[i]) % k)
                }
            }
            Rule::Interval(codons, pcfg) => {
                let i = self.next_position()?;
                Some(interval_index(codons[i], pcfg.probs(nt)))
            }
        }
    }

    fn expand(&mut self, nt: usize) -> bool {
        let Some(idx) = self.pick(nt) else {
            return false;
        };
        self.choices.push((nt, idx));
        self.counts[nt][idx] += 1;
        let grammar = self.grammar;
        for sym in &grammar.productions(nt)[idx].symbols {
            match sym {
                Symbol::Terminal(t) => self.tokens.push(t.clone()),
                Symbol::NonTerminal(child) => {
                    if !self.expand(*child) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn interpret(grammar: &Grammar, rule: Rule<'_>, len: usize, max_wraps: usize) -> Derivation {
    let mut it = Interpreter {
        grammar,
        rule,
        len,
        pos: 0,
        wraps: 0,
        max_wraps,
        used: 0,
        tokens: Vec::new(),
        choices: Vec::new(),
        counts: grammar
            .all_productions()
            .iter()
            .map(|alts| vec![0; alts.len()])
            .collect(),
    };
    let complete = it.expand(grammar.axiom());
    Derivation {
        phenotype: complete.then(|| grammar.render_tokens(it.tokens.iter().map(String::as_str))),
        choices: it.choices,
        counts: it.counts,
        codons_used: it.used,
        wraps_used: it.wraps,
    }
}

/// Production whose half-open interval `[lo, hi)` of cumulative probability
/// holds `codon`; the last production when none does.
pub fn interval_index(codon: f64, probs: &[f64]) -> usize {
    (0..probs.len())
        .find(|&i| {
            let lo: f64 = probs[..i].iter().sum();
            let hi: f64 = probs[..=i].iter().sum();
            lo <= codon && codon < hi
        })
        .unwrap_or(probs.len() - 1)
}

pub fn oracle_ge(codons: &[u8], grammar: &Grammar, max_wraps: usize) -> Derivation {
    interpret(grammar, Rule::Modulo(codons), codons.len(), max_wraps)
}

pub fn oracle_pge(codons: &[f64], pcfg: &Pcfg, max_wraps: usize) -> Derivation {
    interpret(
        pcfg.grammar(),
        Rule::Interval(codons, pcfg),
        codons.len(),
        max_wraps,
    )
}

/// Converts a mapper result into the oracle's shape for comparison.
pub fn as_derivation(r: &pge_core::mapper::MappingResult) -> Derivation {
    Derivation {
        phenotype: r.phenotype.clone(),
        choices: r
            .choices
            .iter()
            .map(|c| (c.nonterminal, c.production))
            .collect(),
        counts: r.counters.all().to_vec(),
        codons_used: r.codons_used,
        wraps_used: r.wraps_used,
    }
}

/// Random probabilities for every nonterminal, with some exact zeros.
pub fn random_pcfg<R: Rng>(grammar: Arc<Grammar>, rng: &mut R) -> Pcfg {
    let probs = grammar
        .all_productions()
        .iter()
        .map(|alts| {
            let mut w: Vec<f64> = (0..alts.len())
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        0.0
                    } else {
                        rng.gen::<f64>()
                    }
                })
                .collect();
            if w.iter().all(|&v| v == 0.0) {
                let i = rng.gen_range(0..w.len());
                w[i] = 1.0;
            }
            let total: f64 = w.iter().sum();
            w.iter().map(|v| v / total).collect()
        })
        .collect();
    Pcfg::from_probs(grammar, probs)
}

/// Every integer genotype of length `1..=max_len` over `0..alphabet`.
pub fn all_genotypes(alphabet: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|g| {
                (0..alphabet).map(move |c| {
                    let mut g = g.clone();
                    g.push(c);
                    g
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
