//! Polynomial expressions and parameter ranges used by the catalog.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' integer)?
//! primary := number | identifier | '(' expr ')' | '|' expr '|'
//! ```
//!
//! A range is a comma-separated list of comparison chains such as
//! `-1 < b <= 1, b != -1/2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{parse_decimal, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(Rational),
    Var(String),
    Neg(Box<Node>),
    Abs(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
}

/// A parsed expression that remembers its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(&'static str),
}

fn tokenize(input: &str) -> Result<Vec<Tok>> {
    let err = |m: String| Error::Expression {
        input: input.to_string(),
        message: m,
    };
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let sym = match two.as_str() {
                "<=" => Some("<="),
                ">=" => Some(">="),
                "!=" => Some("!="),
                _ => None,
            };
            if let Some(s) = sym {
                out.push(Tok::Sym(s));
                i += 2;
                continue;
            }
            let s = match c {
                '+' => "+",
                '-' | '\u{2212}' => "-",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '(' => "(",
                ')' => ")",
                '|' => "|",
                '<' => "<",
                '>' => ">",
                '=' => "=",
                ',' => ",",
                _ => return Err(err(format!("unexpected character `{c}`"))),
            };
            out.push(Tok::Sym(s));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    input: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Expression {
            input: self.input.to_string(),
            message: message.into(),
        }
    }

    fn peek_sym(&self) -> Option<&'static str> {
        match self.toks.get(self.pos) {
            Some(Tok::Sym(s)) => Some(s),
            _ => None,
        }
    }

    fn eat(&mut self, sym: &str) -> bool {
        if self.peek_sym() == Some(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat("*") {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat("/") {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat("-") {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat("+") {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if !self.eat("^") {
            return Ok(base);
        }
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                let e: u32 = n
                    .parse()
                    .map_err(|_| self.err("exponent must be a non-negative integer"))?;
                self.pos += 1;
                Ok(Node::Pow(Box::new(base), e))
            }
            _ => Err(self.err("exponent must be a non-negative integer")),
        }
    }

    fn primary(&mut self) -> Result<Node> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let v = parse_decimal(&n).ok_or_else(|| self.err(format!("bad number `{n}`")))?;
                Ok(Node::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Node::Var(name))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(")") {
                    return Err(self.err("missing `)`"));
                }
                Ok(inner)
            }
            Some(Tok::Sym("|")) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat("|") {
                    return Err(self.err("missing closing `|`"));
                }
                Ok(Node::Abs(Box::new(inner)))
            }
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

impl Node {
    fn eval<T: Scalar>(&self, vars: &BTreeMap<String, T>, source: &str) -> Result<T> {
        Ok(match self {
            Node::Num(r) => T::from_rational(r),
            Node::Var(name) => vars.get(name).cloned().ok_or_else(|| Error::UnknownParameter {
                name: name.clone(),
                context: format!("`{source}`"),
            })?,
            Node::Neg(a) => -a.eval(vars, source)?,
            Node::Abs(a) => a.eval(vars, source)?.abs(),
            Node::Add(a, b) => a.eval(vars, source)? + b.eval(vars, source)?,
            Node::Sub(a, b) => a.eval(vars, source)? - b.eval(vars, source)?,
            Node::Mul(a, b) => a.eval(vars, source)? * b.eval(vars, source)?,
            Node::Div(a, b) => {
                let d = b.eval(vars, source)?;
                if d.is_zero() {
                    return Err(Error::Expression {
                        input: source.to_string(),
                        message: "division by zero".into(),
                    });
                }
                a.eval(vars, source)? / d
            }
            Node::Pow(a, e) => {
                let base = a.eval(vars, source)?;
                (0..*e).fold(T::one(), |acc, _| acc * base.clone())
            }
        })
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Node::Num(_) => {}
            Node::Var(n) => {
                out.insert(n.clone());
            }
            Node::Neg(a) | Node::Abs(a) | Node::Pow(a, _) => a.collect_vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl Expr {
    pub fn parse(input: &str) -> Result<Self> {
        let mut p = Parser {
            input,
            toks: tokenize(input)?,
            pos: 0,
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(Self {
            source: input.trim().to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval<T: Scalar>(&self, vars: &BTreeMap<String, T>) -> Result<T> {
        self.root.eval(vars, &self.source)
    }

    /// Value of a parameter-free expression.
    pub fn constant<T: Scalar>(&self) -> Result<T> {
        self.eval(&BTreeMap::new())
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.root.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(x) => x.to_string(),
            Raw::Text(s) => s,
        };
        Expr::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    Eq,
}

impl Cmp {
    fn holds<T: Scalar>(self, a: &T, b: &T) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
            Cmp::Ne => a != b,
            Cmp::Eq => a == b,
        }
    }
}

/// Admissible region for algebra parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Range {
    source: String,
    chains: Vec<(Vec<Node>, Vec<Cmp>)>,
}

impl Range {
    pub fn parse(input: &str) -> Result<Self> {
        let mut p = Parser {
            input,
            toks: tokenize(input)?,
            pos: 0,
        };
        let mut chains = Vec::new();
        if p.toks.is_empty() {
            return Ok(Self {
                source: String::new(),
                chains,
            });
        }
        loop {
            let mut operands = vec![p.expr()?];
            let mut ops = Vec::new();
            loop {
                let op = match p.peek_sym() {
                    Some("<") => Cmp::Lt,
                    Some("<=") => Cmp::Le,
                    Some(">") => Cmp::Gt,
                    Some(">=") => Cmp::Ge,
                    Some("!=") => Cmp::Ne,
                    Some("=") => Cmp::Eq,
                    _ => break,
                };
                p.pos += 1;
                ops.push(op);
                operands.push(p.expr()?);
            }
            if ops.is_empty() {
                return Err(p.err("expected a comparison"));
            }
            chains.push((operands, ops));
            if !p.eat(",") {
                break;
            }
        }
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(Self {
            source: input.trim().to_string(),
            chains,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn contains<T: Scalar>(&self, vars: &BTreeMap<String, T>) -> Result<bool> {
        for (operands, ops) in &self.chains {
            let values = operands
                .iter()
                .map(|n| n.eval(vars, &self.source))
                .collect::<Result<Vec<T>>>()?;
            for (k, op) in ops.iter().enumerate() {
                if !op.holds(&values[k], &values[k + 1]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (operands, _) in &self.chains {
            for n in operands {
                n.collect_vars(&mut out);
            }
        }
        out
    }
}

impl Serialize for Range {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Range::parse(&s).map_err(serde::de::Error::custom)
    }
}
