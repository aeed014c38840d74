//! Arithmetic expressions over named variables and parameters.
//!
//! Grammar: `+ - * / ^` (with `^` right-associative and binding tighter than unary minus),
//! parentheses, numeric literals and the functions `sqrt`, `exp`, `log`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sqrt => v.sqrt(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars),
            Node::Call(f, a) => f.apply(a.eval(vars)),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(vars), b.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Bin(_, a, b) => a.max_var().max(b.max_var()),
        }
    }
}

/// Integer exponents use repeated multiplication so that `x^2` stays exact for negative `x`.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// Names visible to an expression: variables (bound at evaluation time) and constants.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    variables: Vec<String>,
    constants: BTreeMap<String, f64>,
}

impl Scope {
    /// Variables `x1..x{dim}`.
    pub fn state(dim: usize) -> Self {
        Self {
            variables: (1..=dim).map(|i| format!("x{i}")).collect(),
            constants: BTreeMap::new(),
        }
    }

    pub fn with_variables<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self {
            variables: names.into_iter().map(Into::into).collect(),
            constants: BTreeMap::new(),
        }
    }

    pub fn with_constants<'a>(mut self, constants: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        self.constants.extend(constants.into_iter().map(|(k, v)| (k.to_string(), v)));
        self
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    fn resolve(&self, name: &str) -> Option<Node> {
        if let Some(i) = self.variables.iter().position(|v| v == name) {
            return Some(Node::Var(i));
        }
        self.constants.get(name).map(|&c| Node::Const(c))
    }
}

/// A parsed expression with parameters folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str, scope: &Scope) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            source,
            tokens,
            pos: 0,
            scope,
        };
        let root = parser.expression(0)?;
        if let Some((tok, at)) = parser.tokens.get(parser.pos) {
            return Err(parser.error(*at, &format!("unexpected {tok}")));
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    /// Evaluates with `vars` bound in the scope's variable order.
    pub fn eval(&self, vars: &[f64]) -> f64 {
        self.root.eval(vars)
    }

    /// Number of variables the expression needs to be evaluated.
    pub fn arity(&self) -> usize {
        self.root.max_var().map_or(0, |i| i + 1)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "name `{s}`"),
            Token::Op(c) => write!(f, "`{c}`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (at, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            // exponent part: e or E, optional sign, digits
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let end = chars.get(i).map_or(src.len(), |&(p, _)| p);
            let text = &src[chars[start].0..end];
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{text}` at {at} in `{src}`")))?;
            out.push((Token::Num(v), at));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = chars.get(i).map_or(src.len(), |&(p, _)| p);
            out.push((Token::Ident(src[chars[start].0..end].to_string()), at));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                _ => return Err(Error::Config(format!("unexpected character `{c}` at {at} in `{src}`"))),
            };
            out.push((tok, at));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    source: &'a str,
    tokens: Vec<(Token, usize)>,
    pos: usize,
    scope: &'a Scope,
}

const PREFIX_MINUS: u8 = 5;

fn infix_power(op: char) -> Option<(u8, u8, BinOp)> {
    match op {
        '+' => Some((1, 2, BinOp::Add)),
        '-' => Some((1, 2, BinOp::Sub)),
        '*' => Some((3, 4, BinOp::Mul)),
        '/' => Some((3, 4, BinOp::Div)),
        '^' => Some((8, 7, BinOp::Pow)),
        _ => None,
    }
}

impl Parser<'_> {
    fn error(&self, at: usize, msg: &str) -> Error {
        Error::Config(format!("{msg} at {at} in `{}`", self.source))
    }

    fn next(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expression(&mut self, min_bp: u8) -> Result<Node> {
        let mut lhs = match self.next() {
            None => return Err(self.error(self.source.len(), "unexpected end of expression")),
            Some((Token::Num(v), _)) => Node::Const(v),
            Some((Token::Op('-'), _)) => Node::Neg(Box::new(self.expression(PREFIX_MINUS)?)),
            Some((Token::Op('+'), _)) => self.expression(PREFIX_MINUS)?,
            Some((Token::LParen, at)) => {
                let inner = self.expression(0)?;
                self.expect_close(at)?;
                inner
            }
            Some((Token::Ident(name), at)) => {
                if let Some(func) = Func::lookup(&name) {
                    match self.next() {
                        Some((Token::LParen, open)) => {
                            let arg = self.expression(0)?;
                            self.expect_close(open)?;
                            Node::Call(func, Box::new(arg))
                        }
                        _ => return Err(self.error(at, &format!("`{name}` must be followed by `(`"))),
                    }
                } else {
                    self.scope
                        .resolve(&name)
                        .ok_or_else(|| self.error(at, &format!("unknown name `{name}`")))?
                }
            }
            Some((tok, at)) => return Err(self.error(at, &format!("unexpected {tok}"))),
        };
        while let Some((Token::Op(c), _)) = self.tokens.get(self.pos) {
            let Some((l_bp, r_bp, op)) = infix_power(*c) else { break };
            if l_bp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expression(r_bp)?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expect_close(&mut self, open: usize) -> Result<()> {
        match self.next() {
            Some((Token::RParen, _)) => Ok(()),
            _ => Err(self.error(open, "unclosed `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, vars: &[f64]) -> f64 {
        let scope = Scope::state(vars.len()).with_constants([("alpha", 2.0)]);
        Expr::parse(src, &scope).unwrap().eval(vars)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[]), 512.0);
        assert_eq!(ev("-x1^2", &[3.0]), -9.0);
        assert_eq!(ev("(1 - x1) / alpha", &[5.0]), -2.0);
        assert_eq!(ev("2 * -x1", &[1.5]), -3.0);
        assert_eq!(ev("1e-2 * 100", &[]), 1.0);
    }

    #[test]
    fn functions() {
        assert!((ev("sqrt(x1) + exp(0) + log(x2)", &[4.0, 1.0]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors_are_config() {
        let scope = Scope::state(1);
        for bad in ["x2", "1 +", "(x1", "sqrt x1", "x1 $ 2", "1 2"] {
            assert!(Expr::parse(bad, &scope).unwrap_err().is_config(), "{bad}");
        }
    }

    #[test]
    fn arity_counts_highest_variable() {
        let e = Expr::parse("x3 - 1", &Scope::state(4)).unwrap();
        assert_eq!(e.arity(), 3);
    }
}
