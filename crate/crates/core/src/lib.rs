//! Grammatical Evolution (GE) and Probabilistic Grammatical Evolution (PGE)
//! for symbolic regression.
//!
//! * [`grammar`]: BNF parsing, grammars and PCFGs.
//! * [`mapper`]: genotype-to-phenotype mapping for both representations.
//! * [`update`]: PCFG adaptation from expansion counters.
//! * [`engine`]: the generational loop and variation operators.
//! * [`problems`]: Pagie polynomial and Boston Housing, protected
//!   expression evaluation, RRSE.
//! * [`experiment`]: multi-run experiments and their CSV artifacts.

pub mod engine;
pub mod experiment;
pub mod grammar;
pub mod mapper;
pub mod problems;
pub mod update;
