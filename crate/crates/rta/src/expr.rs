//! The shared expression grammar.
//!
//! Integers, `/`, identifiers (optionally indexed as `t[3]`), `+ - * ^` and
//! parentheses. `^` binds tightest and takes an integer exponent; whether a
//! negative exponent is allowed is up to the evaluation domain.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::cartan::{BaseElement, BaseFamily};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at column {col}\n  {src}\n  {caret}")]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
    pub src: String,
    pub caret: String,
}

impl ExprError {
    fn new(src: &str, pos: usize, msg: impl Into<String>) -> Self {
        let col = src[..pos.min(src.len())].chars().count() + 1;
        ExprError { col, msg: msg.into(), src: src.to_string(), caret: format!("{}^", " ".repeat(col - 1)) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigInt),
    Var { name: String, index: Option<i64>, pos: usize },
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i64, usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String, Option<i64>),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Int(src[s..i].parse().unwrap()), s));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let name = src[s..i].to_string();
            let mut index = None;
            if i < b.len() && b[i] == b'[' {
                let close = src[i..].find(']').map(|k| i + k).ok_or_else(|| ExprError::new(src, i, "unclosed `[`"))?;
                let v: i64 = src[i + 1..close].trim().parse().map_err(|_| ExprError::new(src, i + 1, "expected an integer index"))?;
                index = Some(v);
                i = close + 1;
            }
            out.push((Tok::Ident(name, index), s));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ExprError::new(src, i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.src.len(), |t| t.1)
    }

    fn err(&self, msg: &str) -> ExprError {
        ExprError::new(self.src, self.pos(), msg)
    }

    fn sum(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.at += 1;
            let rhs = self.product()?;
            lhs = if c == '+' { Ast::Add(lhs.into(), rhs.into()) } else { Ast::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            let pos = self.pos();
            self.at += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' { Ast::Mul(lhs.into(), rhs.into()) } else { Ast::Div(lhs.into(), rhs.into(), pos) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.at += 1;
            return Ok(Ast::Neg(self.unary()?.into()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.at += 1;
            let pos = self.pos();
            let neg = matches!(self.peek(), Some(Tok::Op('-')));
            if neg {
                self.at += 1;
            }
            let Some(Tok::Int(e)) = self.peek().cloned() else {
                return Err(self.err("expected an integer exponent"));
            };
            self.at += 1;
            let e: i64 = e.try_into().map_err(|_| ExprError::new(self.src, pos, "exponent too large"))?;
            return Ok(Ast::Pow(base.into(), if neg { -e } else { e }, pos));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, ExprError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(Ast::Num(n))
            }
            Some(Tok::Ident(name, index)) => {
                self.at += 1;
                Ok(Ast::Var { name, index, pos })
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let e = self.sum()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return Err(self.err("expected `)`"));
                }
                self.at += 1;
                Ok(e)
            }
            _ => Err(self.err("expected a number, a variable or `(`")),
        }
    }
}

pub fn parse(src: &str) -> Result<Ast, ExprError> {
    let mut p = Parser { src, toks: lex(src)?, at: 0 };
    let e = p.sum()?;
    if p.at != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// A ring in which expressions can be evaluated.
pub trait Domain {
    type V: Clone;
    fn scalar(&self, c: Scalar) -> Self::V;
    fn var(&self, name: &str, index: Option<i64>) -> Option<Self::V>;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    /// The value as a scalar, if it is one.
    fn as_scalar(&self, v: &Self::V) -> Option<Scalar>;
    /// Multiplicative inverse of a non-scalar value, where the domain has one.
    fn inverse(&self, _v: &Self::V) -> Option<Self::V> {
        None
    }
}

pub fn eval<D: Domain>(d: &D, src: &str, ast: &Ast) -> Result<D::V, ExprError> {
    let neg = |v: &D::V| d.mul(&d.scalar(Scalar::int(-1)), v);
    Ok(match ast {
        Ast::Num(n) => d.scalar(Scalar::Rat(BigRational::from_integer(n.clone()))),
        Ast::Var { name, index, pos } => d.var(name, *index).ok_or_else(|| {
            let shown = index.map_or(name.clone(), |i| format!("{name}[{i}]"));
            ExprError::new(src, *pos, format!("unknown variable `{shown}`"))
        })?,
        Ast::Add(a, b) => d.add(&eval(d, src, a)?, &eval(d, src, b)?),
        Ast::Sub(a, b) => d.add(&eval(d, src, a)?, &neg(&eval(d, src, b)?)),
        Ast::Mul(a, b) => d.mul(&eval(d, src, a)?, &eval(d, src, b)?),
        Ast::Neg(a) => neg(&eval(d, src, a)?),
        Ast::Div(a, b, pos) => {
            let den = eval(d, src, b)?;
            let c = d.as_scalar(&den).ok_or_else(|| ExprError::new(src, *pos, "can only divide by a scalar"))?;
            let inv = c.inv().map_err(|_| ExprError::new(src, *pos, "division by zero"))?;
            d.mul(&eval(d, src, a)?, &d.scalar(inv))
        }
        Ast::Pow(b, e, pos) => {
            let base = eval(d, src, b)?;
            let base = if *e < 0 {
                match d.as_scalar(&base) {
                    Some(c) => d.scalar(c.inv().map_err(|_| ExprError::new(src, *pos, "negative power of zero"))?),
                    None => d
                        .inverse(&base)
                        .ok_or_else(|| ExprError::new(src, *pos, "negative exponent is not allowed here"))?,
                }
            } else {
                base
            };
            (0..e.unsigned_abs()).fold(d.scalar(Scalar::one()), |acc, _| d.mul(&acc, &base))
        }
    })
}

pub fn parse_in<D: Domain>(d: &D, src: &str) -> Result<D::V, ExprError> {
    eval(d, src, &parse(src)?)
}

/// Scalars: integers, `/`, and `q`.
pub struct ScalarDomain;

impl Domain for ScalarDomain {
    type V = Scalar;
    fn scalar(&self, c: Scalar) -> Scalar {
        c
    }
    fn var(&self, name: &str, index: Option<i64>) -> Option<Scalar> {
        (name == "q" && index.is_none()).then(Scalar::q)
    }
    fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }
    fn as_scalar(&self, v: &Scalar) -> Option<Scalar> {
        Some(v.clone())
    }
}

pub fn parse_scalar(src: &str) -> Result<Scalar, ExprError> {
    parse_in(&ScalarDomain, src)
}

/// Elements of a Cartan family: `h`, group generators, or `t[m]`.
pub struct BaseDomain<'a> {
    pub family: &'a BaseFamily,
    /// Whether `q` is available as a scalar.
    pub allow_q: bool,
}

impl Domain for BaseDomain<'_> {
    type V = BaseElement;
    fn scalar(&self, c: Scalar) -> BaseElement {
        BaseElement::constant(self.family, c)
    }
    fn var(&self, name: &str, index: Option<i64>) -> Option<BaseElement> {
        if name == "q" && index.is_none() {
            return self.allow_q.then(|| BaseElement::constant(self.family, Scalar::q()));
        }
        match self.family {
            BaseFamily::Poly => (name == "h" && index.is_none()).then(BaseElement::h),
            BaseFamily::FunZ => (name == "t").then(|| index.map(BaseElement::point)).flatten(),
            BaseFamily::Group(s) => {
                let i = s.generator_names().iter().position(|n| n == name)?;
                index.is_none().then(|| {
                    let mut g = s.identity();
                    g[i] = 1;
                    BaseElement::monomial(s, g, Scalar::one())
                })
            }
        }
    }
    fn add(&self, a: &BaseElement, b: &BaseElement) -> BaseElement {
        a + b
    }
    fn mul(&self, a: &BaseElement, b: &BaseElement) -> BaseElement {
        a * b
    }
    fn as_scalar(&self, v: &BaseElement) -> Option<Scalar> {
        v.as_constant()
    }
    fn inverse(&self, v: &BaseElement) -> Option<BaseElement> {
        match v {
            BaseElement::Group { shape, terms } if terms.len() == 1 => {
                let (g, c) = terms.iter().next()?;
                Some(BaseElement::monomial(shape, g.iter().map(|x| -x).collect(), c.inv().ok()?))
            }
            _ => None,
        }
    }
}

pub fn parse_base(family: &BaseFamily, allow_q: bool, src: &str) -> Result<BaseElement, ExprError> {
    parse_in(&BaseDomain { family, allow_q }, src)
}

/// Polynomials in one named variable with scalar coefficients, as an
/// exponent-to-coefficient map.
pub struct UniDomain<'a> {
    pub var: &'a str,
}

impl Domain for UniDomain<'_> {
    type V = BTreeMap<u32, Scalar>;
    fn scalar(&self, c: Scalar) -> Self::V {
        if c.is_zero() { BTreeMap::new() } else { BTreeMap::from([(0, c)]) }
    }
    fn var(&self, name: &str, index: Option<i64>) -> Option<Self::V> {
        if index.is_some() {
            return None;
        }
        if name == self.var {
            Some(BTreeMap::from([(1, Scalar::one())]))
        } else if name == "q" {
            Some(BTreeMap::from([(0, Scalar::q())]))
        } else {
            None
        }
    }
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V {
        let mut out = a.clone();
        for (k, v) in b {
            let e = out.entry(*k).or_insert_with(Scalar::zero);
            *e = &*e + v;
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V {
        let mut out: Self::V = BTreeMap::new();
        for (i, x) in a {
            for (j, y) in b {
                let e = out.entry(i + j).or_insert_with(Scalar::zero);
                *e = &*e + &(x * y);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
    fn as_scalar(&self, v: &Self::V) -> Option<Scalar> {
        match v.len() {
            0 => Some(Scalar::zero()),
            1 => v.get(&0).cloned(),
            _ => None,
        }
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(n) => write!(f, "{n}"),
            Ast::Var { name, index: None, .. } => write!(f, "{name}"),
            Ast::Var { name, index: Some(i), .. } => write!(f, "{name}[{i}]"),
            Ast::Add(a, b) => write!(f, "({a} + {b})"),
            Ast::Sub(a, b) => write!(f, "({a} - {b})"),
            Ast::Mul(a, b) => write!(f, "{a}*{b}"),
            Ast::Div(a, b, _) => write!(f, "{a}/{b}"),
            Ast::Neg(a) => write!(f, "-{a}"),
            Ast::Pow(a, e, _) => write!(f, "{a}^{e}"),
        }
    }
}
