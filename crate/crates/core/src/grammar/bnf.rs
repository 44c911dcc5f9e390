//! BNF reader.
//!
//! Accepted format, one rule per line:
//!
//! ```text
//! <start> ::= <expr>
//! <expr>  ::= <expr> <op> <expr> | <var>
//!           | ( <expr> )
//! ```
//!
//! Lines starting with `|` continue the previous rule. Anything in angle
//! brackets is a nonterminal, every other whitespace-delimited token is a
//! terminal. Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;

use thiserror::Error;

use super::{Grammar, Production, Symbol};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("grammar is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undefined nonterminal <{name}>")]
    Undefined { line: usize, name: String },
    #[error("line {line}: duplicate definition of <{name}>")]
    Duplicate { line: usize, name: String },
}

fn syntax(line: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Syntax {
        line,
        message: message.into(),
    }
}

enum RawSymbol {
    Terminal(String),
    NonTerminal(String),
}

struct RawRule {
    name: String,
    alternatives: Vec<(usize, Vec<RawSymbol>)>,
}

pub fn parse_bnf(text: &str) -> Result<Grammar, GrammarError> {
    let mut rules: Vec<RawRule> = Vec::new();
    let mut defined: HashMap<String, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }

        if let Some(rest) = trimmed.strip_prefix('|') {
            let rule = rules
                .last_mut()
                .ok_or_else(|| syntax(line, "continuation line before any rule"))?;
            for alt in rest.split('|') {
                rule.alternatives.push((line, tokenize(alt, line)?));
            }
            continue;
        }

        let (lhs, rhs) = trimmed
            .split_once("::=")
            .ok_or_else(|| syntax(line, "missing '::='"))?;
        let name = parse_lhs(lhs.trim(), line)?;
        if defined.insert(name.clone(), line).is_some() {
            return Err(GrammarError::Duplicate { line, name });
        }
        let mut alternatives = Vec::new();
        for alt in rhs.split('|') {
            alternatives.push((line, tokenize(alt, line)?));
        }
        rules.push(RawRule { name, alternatives });
    }

    if rules.is_empty() {
        return Err(GrammarError::Empty);
    }

    let ids: HashMap<&str, usize> = rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r.name.as_str(), i))
        .collect();

    let mut resolved = Vec::with_capacity(rules.len());
    for rule in &rules {
        let mut alts = Vec::with_capacity(rule.alternatives.len());
        for (line, symbols) in &rule.alternatives {
            let mut out = Vec::with_capacity(symbols.len());
            for sym in symbols {
                out.push(match sym {
                    RawSymbol::Terminal(t) => Symbol::Terminal(t.clone()),
                    RawSymbol::NonTerminal(n) => match ids.get(n.as_str()) {
                        Some(&id) => Symbol::NonTerminal(id),
                        None => {
                            return Err(GrammarError::Undefined {
                                line: *line,
                                name: n.clone(),
                            })
                        }
                    },
                });
            }
            alts.push(Production { symbols: out });
        }
        resolved.push((rule.name.clone(), alts));
    }

    Ok(Grammar::from_parts(resolved))
}

fn parse_lhs(lhs: &str, line: usize) -> Result<String, GrammarError> {
    let inner = lhs
        .strip_prefix('<')
        .and_then(|s| s.strip_suffix('>'))
        .ok_or_else(|| {
            syntax(
                line,
                format!("left-hand side `{lhs}` is not a <nonterminal>"),
            )
        })?;
    check_name(inner, line)?;
    Ok(inner.to_string())
}

fn check_name(name: &str, line: usize) -> Result<(), GrammarError> {
    if name.is_empty() {
        return Err(syntax(line, "empty nonterminal name"));
    }
    if name.contains(['<', '>']) || name.chars().any(char::is_whitespace) {
        return Err(syntax(line, format!("invalid nonterminal name `{name}`")));
    }
    Ok(())
}

fn tokenize(alt: &str, line: usize) -> Result<Vec<RawSymbol>, GrammarError> {
    let mut out = Vec::new();
    let mut chars = alt.char_indices().peekable();
    let mut terminal_start: Option<usize> = None;

    let flush = |start: &mut Option<usize>, end: usize, out: &mut Vec<RawSymbol>| {
        if let Some(s) = start.take() {
            out.push(RawSymbol::Terminal(alt[s..end].to_string()));
        }
    };

    while let Some((i, c)) = chars.next() {
        if c == '<' {
            flush(&mut terminal_start, i, &mut out);
            let close = alt[i + 1..]
                .find('>')
                .ok_or_else(|| syntax(line, "unterminated '<...>'"))?;
            let name = &alt[i + 1..i + 1 + close];
            check_name(name, line)?;
            out.push(RawSymbol::NonTerminal(name.to_string()));
            while let Some(&(j, _)) = chars.peek() {
                if j > i + close + 1 {
                    break;
                }
                chars.next();
            }
        } else if c.is_whitespace() {
            flush(&mut terminal_start, i, &mut out);
        } else if terminal_start.is_none() {
            terminal_start = Some(i);
        }
    }
    flush(&mut terminal_start, alt.len(), &mut out);

    if out.is_empty() {
        return Err(syntax(line, "empty alternative"));
    }
    Ok(out)
}
