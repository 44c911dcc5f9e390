//! Genotype-to-phenotype mapping.
//!
//! Both mappers perform a leftmost derivation from the axiom. They differ in
//! how a production is picked for the nonterminal being expanded:
//!
//! * GE reads an integer codon `c` and picks alternative `c % k`. A
//!   nonterminal with a single alternative is expanded without reading a
//!   codon.
//! * PGE reads a float codon in `[0, 1]` for every expansion, including
//!   single-alternative ones, and picks the first alternative whose
//!   cumulative probability exceeds the codon.
//!
//! When the genotype runs out the reader wraps back to the first codon, at
//! most `max_wraps` times. A derivation that still has nonterminals left is
//! invalid: it keeps its counters but has no phenotype.

use crate::grammar::{Grammar, NtId, Pcfg, Symbol};

/// Derivations longer than this are treated as invalid. Only reachable in GE
/// with grammars that cycle through single-alternative nonterminals.
const MAX_EXPANSIONS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ge,
    Pge,
}

/// Linear chromosome: integer codons for GE, floats in `[0, 1]` for PGE.
#[derive(Debug, Clone, PartialEq)]
pub enum Genotype {
    Integer(Vec<u8>),
    Float(Vec<f64>),
}

impl Genotype {
    pub fn mode(&self) -> Mode {
        match self {
            Genotype::Integer(_) => Mode::Ge,
            Genotype::Float(_) => Mode::Pge,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Genotype::Integer(c) => c.len(),
            Genotype::Float(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-nonterminal, per-production selection counts for one derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionCounters {
    counts: Vec<Vec<u32>>,
}

impl ExpansionCounters {
    pub fn zeroed(grammar: &Grammar) -> Self {
        ExpansionCounters {
            counts: grammar
                .all_productions()
                .iter()
                .map(|alts| vec![0; alts.len()])
                .collect(),
        }
    }

    /// Wraps raw counts; no shape check against any grammar.
    pub fn from_counts(counts: Vec<Vec<u32>>) -> Self {
        ExpansionCounters { counts }
    }

    pub fn counts(&self, nt: NtId) -> &[u32] {
        &self.counts[nt]
    }

    pub fn all(&self) -> &[Vec<u32>] {
        &self.counts
    }

    /// Number of times `nt` was expanded.
    pub fn expansions(&self, nt: NtId) -> u32 {
        self.counts[nt].iter().sum()
    }

    fn record(&mut self, nt: NtId, production: usize) {
        self.counts[nt][production] += 1;
    }
}

/// One derivation step: `nonterminal` rewritten with its `production`-th
/// alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub nonterminal: NtId,
    pub production: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingResult {
    pub phenotype: Option<String>,
    pub counters: ExpansionCounters,
    pub codons_used: usize,
    pub wraps_used: usize,
    /// Derivation steps in the order they were applied.
    pub choices: Vec<Choice>,
}

impl MappingResult {
    pub fn is_valid(&self) -> bool {
        self.phenotype.is_some()
    }
}

struct CodonReader<'a, T> {
    codons: &'a [T],
    pos: usize,
    used: usize,
    wraps: usize,
    max_wraps: usize,
}

impl<'a, T: Copy> CodonReader<'a, T> {
    fn new(codons: &'a [T], max_wraps: usize) -> Self {
        CodonReader {
            codons,
            pos: 0,
            used: 0,
            wraps: 0,
            max_wraps,
        }
    }

    fn next(&mut self) -> Option<T> {
        if self.pos == self.codons.len() {
            if self.codons.is_empty() || self.wraps == self.max_wraps {
                return None;
            }
            self.wraps += 1;
            self.pos = 0;
        }
        let c = self.codons[self.pos];
        self.pos += 1;
        self.used += 1;
        Some(c)
    }
}

/// Runs a leftmost derivation; `select` returns the production index for a
/// nonterminal, or `None` once the genotype is exhausted.
fn derive<T, F>(grammar: &Grammar, mut reader: CodonReader<'_, T>, mut select: F) -> MappingResult
where
    T: Copy,
    F: FnMut(NtId, usize, &mut CodonReader<'_, T>) -> Option<usize>,
{
    let mut counters = ExpansionCounters::zeroed(grammar);
    let mut choices = Vec::new();
    let axiom = Symbol::NonTerminal(grammar.axiom());
    let mut stack: Vec<&Symbol> = vec![&axiom];
    let mut tokens: Vec<&str> = Vec::new();
    let mut complete = true;

    while let Some(sym) = stack.pop() {
        match sym {
            Symbol::Terminal(t) => tokens.push(t),
            Symbol::NonTerminal(nt) => {
                let alts = grammar.productions(*nt);
                let picked = if choices.len() >= MAX_EXPANSIONS {
                    None
                } else {
                    select(*nt, alts.len(), &mut reader)
                };
                let Some(idx) = picked else {
                    complete = false;
                    break;
                };
                counters.record(*nt, idx);
                choices.push(Choice {
                    nonterminal: *nt,
                    production: idx,
                });
                stack.extend(alts[idx].symbols.iter().rev());
            }
        }
    }

    MappingResult {
        phenotype: complete.then(|| grammar.render_tokens(tokens)),
        counters,
        codons_used: reader.used,
        wraps_used: reader.wraps,
        choices,
    }
}

/// Classic GE mapping with the modulo rule.
pub fn map_ge(codons: &[u8], grammar: &Grammar, max_wraps: usize) -> MappingResult {
    derive(
        grammar,
        CodonReader::new(codons, max_wraps),
        |_, k, reader| {
            if k == 1 {
                Some(0)
            } else {
                reader.next().map(|c| c as usize % k)
            }
        },
    )
}

/// PGE mapping: every expansion consumes one codon, which picks a
/// production through the cumulative probabilities of the PCFG.
pub fn map_pge(codons: &[f64], pcfg: &Pcfg, max_wraps: usize) -> MappingResult {
    derive(
        pcfg.grammar(),
        CodonReader::new(codons, max_wraps),
        |nt, _, reader| reader.next().map(|c| select_production(c, pcfg.probs(nt))),
    )
}

/// Maps with the rule matching the genotype's mode. GE ignores the
/// probabilities.
pub fn map_genotype(genotype: &Genotype, pcfg: &Pcfg, max_wraps: usize) -> MappingResult {
    match genotype {
        Genotype::Integer(c) => map_ge(c, pcfg.grammar(), max_wraps),
        Genotype::Float(c) => map_pge(c, pcfg, max_wraps),
    }
}

/// Index of the first production with `codon < cumulative probability`.
/// Falls back to the last production when rounding leaves the total short of
/// the codon.
pub fn select_production(codon: f64, probs: &[f64]) -> usize {
    let mut cum = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cum += p;
        if codon < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Replays `choices` from the axiom and renders the sentential form, leaving
/// unexpanded nonterminals as `<name>`.
pub fn sentential_form(grammar: &Grammar, choices: &[Choice]) -> String {
    let mut form: Vec<Symbol> = vec![Symbol::NonTerminal(grammar.axiom())];
    for choice in choices {
        let Some(pos) = form.iter().position(Symbol::is_nonterminal) else {
            break;
        };
        debug_assert_eq!(form[pos], Symbol::NonTerminal(choice.nonterminal));
        let rhs = grammar.productions(choice.nonterminal)[choice.production]
            .symbols
            .iter()
            .cloned();
        form.splice(pos..=pos, rhs);
    }
    let texts: Vec<String> = form.iter().map(|s| grammar.symbol_text(s)).collect();
    grammar.render_tokens(texts.iter().map(String::as_str))
}
