//! Compiles phenotype strings into a postfix program and evaluates it with
//! protected arithmetic.
//!
//! Operator chains have no precedence and associate to the left, so
//! `x + y * x` is `(x + y) * x`. Parentheses group as usual.

use super::ProblemError;

/// Magnitude every intermediate result is clamped to.
pub const VALUE_LIMIT: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Sin,
    Cos,
    Exp,
    Log,
    Inv,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "inv" => UnaryOp::Inv,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Instr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp),
    Binary(BinaryOp),
}

/// `a / b`, or 1 when `b` is zero.
pub fn protected_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        1.0
    } else {
        a / b
    }
}

/// Natural log, or 0 for non-positive arguments.
pub fn protected_log(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v.ln()
    }
}

pub fn protected_inv(v: f64) -> f64 {
    protected_div(1.0, v)
}

fn limit(v: f64) -> f64 {
    if v.is_nan() {
        VALUE_LIMIT
    } else {
        v.clamp(-VALUE_LIMIT, VALUE_LIMIT)
    }
}

impl BinaryOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        limit(match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => protected_div(a, b),
        })
    }
}

impl UnaryOp {
    pub fn apply(self, v: f64) -> f64 {
        limit(match self {
            UnaryOp::Sin => v.sin(),
            UnaryOp::Cos => v.cos(),
            UnaryOp::Exp => v.exp(),
            UnaryOp::Log => protected_log(v),
            UnaryOp::Inv => protected_inv(v),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(BinaryOp),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ProblemError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            '+' | '-' | '*' | '/' => {
                out.push(Token::Op(match c {
                    '+' => BinaryOp::Add,
                    '-' => BinaryOp::Sub,
                    '*' => BinaryOp::Mul,
                    _ => BinaryOp::Div,
                }));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let text = &src[start..i];
                let v = text
                    .parse::<f64>()
                    .map_err(|_| parse_error(src, format!("bad number `{text}`")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric()
                        || bytes[i] == b'_'
                        || bytes[i] == b'['
                        || bytes[i] == b']')
                {
                    i += 1;
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            other => return Err(parse_error(src, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn parse_error(src: &str, message: String) -> ProblemError {
    ProblemError::Parse {
        phenotype: src.to_string(),
        message,
    }
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    features: &'a [String],
    code: Vec<Instr>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_close(&mut self) -> Result<(), ProblemError> {
        match self.bump() {
            Some(Token::Close) => Ok(()),
            _ => Err(parse_error(self.src, "expected `)`".into())),
        }
    }

    fn chain(&mut self) -> Result<(), ProblemError> {
        self.operand()?;
        while let Some(Token::Op(op)) = self.peek().cloned() {
            self.pos += 1;
            self.operand()?;
            self.code.push(Instr::Binary(op));
        }
        Ok(())
    }

    fn operand(&mut self) -> Result<(), ProblemError> {
        match self.bump() {
            Some(Token::Num(v)) => self.code.push(Instr::Const(v)),
            Some(Token::Open) => {
                self.chain()?;
                self.expect_close()?;
            }
            Some(Token::Ident(name)) => {
                if let Some(f) = UnaryOp::from_name(&name) {
                    if self.peek() != Some(&Token::Open) {
                        return Err(parse_error(self.src, format!("`{name}` needs `(`")));
                    }
                    self.pos += 1;
                    self.chain()?;
                    self.expect_close()?;
                    self.code.push(Instr::Unary(f));
                } else {
                    let idx = self
                        .features
                        .iter()
                        .position(|f| *f == name)
                        .ok_or_else(|| {
                            parse_error(self.src, format!("unknown variable `{name}`"))
                        })?;
                    self.code.push(Instr::Var(idx));
                }
            }
            Some(t) => return Err(parse_error(self.src, format!("unexpected token {t:?}"))),
            None => return Err(parse_error(self.src, "unexpected end of input".into())),
        }
        Ok(())
    }
}

/// A phenotype compiled against a fixed list of feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpression {
    code: Vec<Instr>,
    arity: usize,
}

impl CompiledExpression {
    pub fn compile(phenotype: &str, feature_names: &[String]) -> Result<Self, ProblemError> {
        let tokens = tokenize(phenotype)?;
        let mut p = Parser {
            src: phenotype,
            tokens,
            pos: 0,
            features: feature_names,
            code: Vec::new(),
        };
        p.chain()?;
        if p.pos != p.tokens.len() {
            return Err(parse_error(phenotype, "trailing input".into()));
        }
        Ok(CompiledExpression {
            code: p.code,
            arity: feature_names.len(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn evaluate(&self, row: &[f64]) -> f64 {
        let mut stack = Vec::with_capacity(self.code.len());
        self.evaluate_with(row, &mut stack)
    }

    /// Same as [`evaluate`](Self::evaluate) with a caller-provided stack.
    pub fn evaluate_with(&self, row: &[f64], stack: &mut Vec<f64>) -> f64 {
        stack.clear();
        for instr in &self.code {
            match *instr {
                Instr::Const(v) => stack.push(v),
                Instr::Var(i) => stack.push(limit(row[i])),
                Instr::Unary(op) => {
                    let v = stack.pop().expect("compiled program underflow");
                    stack.push(op.apply(v));
                }
                Instr::Binary(op) => {
                    let b = stack.pop().expect("compiled program underflow");
                    let a = stack.pop().expect("compiled program underflow");
                    stack.push(op.apply(a, b));
                }
            }
        }
        stack.pop().expect("compiled program is empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn eval(src: &str, x: f64, y: f64) -> f64 {
        CompiledExpression::compile(src, &names(&["x", "y"]))
            .unwrap()
            .evaluate(&[x, y])
    }

    #[test]
    fn basic_arithmetic() {
        assert_eq!(eval("x * x", 3.0, 0.0), 9.0);
        assert_eq!(eval("1.0 - x", 0.25, 0.0), 0.75);
    }

    #[test]
    fn chains_associate_left() {
        assert_eq!(eval("x + y * x", 2.0, 3.0), 10.0);
        assert_eq!(eval("x - y - x", 2.0, 3.0), -3.0);
        assert_eq!(eval("x + (y * x)", 2.0, 3.0), 8.0);
    }

    #[test]
    fn protected_operators() {
        assert_eq!(eval("x / y", 5.0, 0.0), 1.0);
        assert_eq!(eval("log(x)", -3.0, 0.0), 0.0);
        assert_eq!(eval("log(x)", 0.0, 0.0), 0.0);
        assert_eq!(eval("inv(x)", 4.0, 0.0), 0.25);
        assert_eq!(eval("inv(x)", 0.0, 0.0), 1.0);
        assert_eq!(eval("exp(x)", 1e6, 0.0), VALUE_LIMIT);
        assert_eq!(
            eval("exp(exp(exp(x)))*(1.0 - exp(exp(exp(x))))", 10.0, 0.0),
            -VALUE_LIMIT
        );
    }

    #[test]
    fn tight_rendering_parses() {
        assert!((eval("sin(x)*(y + x)", 1.0, 2.0) - 1f64.sin() * 3.0).abs() < 1e-15);
        assert_eq!(eval("(x - y)/(1.0)", 5.0, 2.0), 3.0);
    }

    #[test]
    fn malformed_phenotypes() {
        let n = names(&["x"]);
        for bad in ["", "x +", "(x", "x)", "sin x", "z", "x $ x", "1.0.0"] {
            assert!(
                matches!(
                    CompiledExpression::compile(bad, &n),
                    Err(ProblemError::Parse { .. })
                ),
                "{bad} compiled"
            );
        }
    }

    #[test]
    fn bracketed_feature_names() {
        let n = names(&["x[1]", "x[2]"]);
        let e = CompiledExpression::compile("x[1] - x[2]", &n).unwrap();
        assert_eq!(e.evaluate(&[3.0, 1.0]), 2.0);
    }
}
