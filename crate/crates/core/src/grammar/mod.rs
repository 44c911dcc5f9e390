//! Context-free grammars and their probabilistic extension.
//!
//! Grammars are read from a small BNF dialect (see [`parse_bnf`]) and are
//! immutable once built. Nonterminals are addressed by their index in
//! declaration order; the first declared nonterminal is the axiom.

mod bnf;
mod pcfg;

use std::collections::HashMap;
use std::fmt;

pub use bnf::{parse_bnf, GrammarError};
pub use pcfg::{Pcfg, Violation};

/// Index of a nonterminal inside its [`Grammar`].
pub type NtId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal(String),
    NonTerminal(NtId),
}

impl Symbol {
    pub fn is_nonterminal(&self) -> bool {
        matches!(self, Symbol::NonTerminal(_))
    }
}

/// One alternative on the right-hand side of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub symbols: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    nonterminals: Vec<String>,
    index: HashMap<String, NtId>,
    terminals: Vec<String>,
    productions: Vec<Vec<Production>>,
    tight_tokens: Vec<String>,
}

/// Tokens rendered without surrounding spaces in phenotypes.
pub const DEFAULT_TIGHT_TOKENS: [&str; 2] = ["(", ")"];

impl Grammar {
    /// Builds a grammar from `(name, alternatives)` pairs. The first entry is
    /// the axiom. Callers must guarantee every referenced nonterminal id is
    /// in range; [`parse_bnf`] is the checked entry point.
    pub(crate) fn from_parts(rules: Vec<(String, Vec<Production>)>) -> Self {
        let mut nonterminals = Vec::with_capacity(rules.len());
        let mut productions = Vec::with_capacity(rules.len());
        for (name, alts) in rules {
            nonterminals.push(name);
            productions.push(alts);
        }
        let index = nonterminals
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut terminals: Vec<String> = Vec::new();
        for sym in productions.iter().flatten().flat_map(|p| &p.symbols) {
            if let Symbol::Terminal(t) = sym {
                if !terminals.contains(t) {
                    terminals.push(t.clone());
                }
            }
        }
        Grammar {
            nonterminals,
            index,
            terminals,
            productions,
            tight_tokens: DEFAULT_TIGHT_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn axiom(&self) -> NtId {
        0
    }

    pub fn axiom_name(&self) -> &str {
        &self.nonterminals[0]
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    /// Terminal tokens in order of first appearance.
    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn len(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nonterminals.is_empty()
    }

    pub fn name(&self, nt: NtId) -> &str {
        &self.nonterminals[nt]
    }

    pub fn id(&self, name: &str) -> Option<NtId> {
        self.index.get(name).copied()
    }

    pub fn productions(&self, nt: NtId) -> &[Production] {
        &self.productions[nt]
    }

    pub fn productions_of(&self, name: &str) -> Option<&[Production]> {
        self.id(name).map(|nt| self.productions(nt))
    }

    pub fn all_productions(&self) -> &[Vec<Production>] {
        &self.productions
    }

    pub fn tight_tokens(&self) -> &[String] {
        &self.tight_tokens
    }

    pub fn with_tight_tokens<I, S>(mut self, tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tight_tokens = tokens.into_iter().map(Into::into).collect();
        self
    }

    pub(crate) fn is_tight(&self, token: &str) -> bool {
        self.tight_tokens.iter().any(|t| t == token)
    }

    /// Renders a symbol the way it appears in BNF source.
    pub fn symbol_text(&self, sym: &Symbol) -> String {
        match sym {
            Symbol::Terminal(t) => t.clone(),
            Symbol::NonTerminal(nt) => format!("<{}>", self.nonterminals[*nt]),
        }
    }

    pub fn production_text(&self, production: &Production) -> String {
        production
            .symbols
            .iter()
            .map(|s| self.symbol_text(s))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Joins terminal tokens into a phenotype string: single spaces between
    /// tokens, none on either side of a tight token.
    pub fn render_tokens<'a, I>(&self, tokens: I) -> String
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = String::new();
        let mut prev_tight = true;
        for tok in tokens {
            let tight = self.is_tight(tok);
            if !out.is_empty() && !tight && !prev_tight {
                out.push(' ');
            }
            out.push_str(tok);
            prev_tight = tight;
        }
        out
    }
}

impl fmt::Display for Grammar {
    /// Serializes back to the BNF dialect accepted by [`parse_bnf`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (nt, alts) in self.productions.iter().enumerate() {
            let rhs = alts
                .iter()
                .map(|p| self.production_text(p))
                .collect::<Vec<_>>()
                .join(" | ");
            writeln!(f, "<{}> ::= {}", self.nonterminals[nt], rhs)?;
        }
        Ok(())
    }
}
