//! Exact scalars: the rationals and the rational function field in `q`.
//!
//! A rational function whose value is constant is always stored as
//! [`Scalar::Rat`], so every value has exactly one representation and `==`
//! is structural. Field membership is tracked by [`Field`], not by the tag.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operand {0} does not belong to the field {1}")]
    MixedField(String, Field),
    #[error("zero has no multiplicative order")]
    ZeroInput,
    #[error("{value} has a pole at q = {point}")]
    PoleAtPoint { value: String, point: String },
}

/// Integer-coefficient polynomial in one variable, coefficients low to high,
/// never with a trailing zero.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::new(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn lead(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn trailing(&self) -> BigInt {
        self.valuation().map(|v| self.coeffs[v].clone()).unwrap_or_default()
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    fn div_scalar_exact(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a / c).collect())
    }

    fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        let p = self.div_scalar_exact(&c);
        if p.lead().is_negative() {
            -p
        } else {
            p
        }
    }

    fn shifted(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs)
    }

    /// A nonzero multiple of the pseudo-remainder of `self` by `b`.
    fn pseudo_rem(&self, b: &IntPoly) -> IntPoly {
        let db = b.degree().expect("pseudo_rem by zero");
        let lb = b.lead();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.lead();
            r = &r.scale(&lb) - &b.scale(&lr).shifted(dr - db);
        }
        r
    }

    /// Greatest common divisor in Z[x], content included, positive leading
    /// coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() {
            return other.normalize_sign();
        }
        if other.is_zero() {
            return self.normalize_sign();
        }
        let c = self.content().gcd(&other.content());
        if self.term_count() == 1 || other.term_count() == 1 {
            // a monomial only shares powers of x and content
            let k = self.valuation().unwrap().min(other.valuation().unwrap());
            return IntPoly::constant(c).shifted(k);
        }
        let (a, b) = (self.primitive_part(), other.primitive_part());
        a.heuristic_gcd(&b).unwrap_or_else(|| a.prs_gcd(&b)).scale(&c)
    }

    /// Primitive remainder sequence for primitive inputs.
    fn prs_gcd(&self, other: &IntPoly) -> IntPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part()
    }

    /// Gcd of primitive polynomials by evaluation at a large integer,
    /// verified by exact division; `None` when no attempt verifies.
    fn heuristic_gcd(&self, b: &IntPoly) -> Option<IntPoly> {
        let norm = |p: &IntPoly| p.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default();
        let mut xi: BigInt = norm(self).min(norm(b)) * 2 + 29;
        for _ in 0..6 {
            let gamma = self.eval_int(&xi).gcd(&b.eval_int(&xi));
            if !gamma.is_zero() {
                // balanced base-xi digits of gamma
                let mut digits = Vec::new();
                let mut rest = gamma;
                let half = &xi / 2;
                while !rest.is_zero() {
                    let mut d = rest.mod_floor(&xi);
                    if d > half {
                        d -= &xi;
                    }
                    rest = (rest - &d) / &xi;
                    digits.push(d);
                }
                let g = IntPoly::new(digits).primitive_part();
                if !g.is_zero() && self.try_div_exact(&g).is_some() && b.try_div_exact(&g).is_some() {
                    return Some(g);
                }
            }
            xi = xi * 73794 / 27011;
        }
        None
    }

    fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Exact quotient in Z[x], if there is one.
    fn try_div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        let dd = d.degree()?;
        if d.term_count() == 1 {
            let (k, c) = (d.valuation().unwrap(), d.lead());
            if self.valuation().is_some_and(|v| v < k) {
                return None;
            }
            let mut q = Vec::with_capacity(self.coeffs.len().saturating_sub(k));
            for a in self.coeffs.iter().skip(k) {
                let (x, rem) = a.div_rem(&c);
                if !rem.is_zero() {
                    return None;
                }
                q.push(x);
            }
            return Some(IntPoly::new(q));
        }
        let ld = d.lead();
        let mut r = self.clone();
        let mut q = vec![BigInt::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while let Some(dr) = r.degree() {
            if dr < dd {
                return None;
            }
            let (c, rem) = r.lead().div_rem(&ld);
            if !rem.is_zero() {
                return None;
            }
            r = &r - &d.scale(&c).shifted(dr - dd);
            q[dr - dd] = c;
        }
        Some(IntPoly::new(q))
    }

    fn normalize_sign(&self) -> IntPoly {
        if self.lead().is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact quotient; panics if `d` does not divide `self` in Z[x].
    pub fn div_exact(&self, d: &IntPoly) -> IntPoly {
        self.try_div_exact(d).expect("inexact polynomial division")
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
    }

    /// Renders with variable name `var`, highest degree first.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{a}*{mono}"));
            }
        }
        out
    }

    fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

impl Neg for IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, o: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigInt::zero();
        IntPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, o: &IntPoly) -> IntPoly {
        self + &(-o.clone())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return IntPoly::default();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        IntPoly::new(c)
    }
}

/// Reduced quotient of integer polynomials in `q`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: IntPoly,
    den: IntPoly,
}

impl RatFunc {
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc { num, den: IntPoly::constant(BigInt::one()) });
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num.div_exact(&g), den.div_exact(&g));
        if den.lead().is_negative() {
            num = -num;
            den = -den;
        }
        Ok(RatFunc { num, den })
    }

    pub fn numer(&self) -> &IntPoly {
        &self.num
    }

    pub fn denom(&self) -> &IntPoly {
        &self.den
    }

    fn constant_value(&self) -> Option<BigRational> {
        (self.num.degree().unwrap_or(0) == 0 && self.den.degree() == Some(0))
            .then(|| BigRational::new(self.num.coeffs.first().cloned().unwrap_or_default(), self.den.lead()))
    }

    fn from_rational(r: &BigRational) -> RatFunc {
        RatFunc {
            num: IntPoly::constant(r.numer().clone()),
            den: IntPoly::constant(r.denom().clone()),
        }
    }
}

/// An element of Q or Q(q) in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Scalar {
    Rat(BigRational),
    Func(RatFunc),
}

/// The two coefficient fields.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum Field {
    #[serde(rename = "Q")]
    Rational,
    #[serde(rename = "Q(q)")]
    RationalFunctions,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Rational => "Q",
            Field::RationalFunctions => "Q(q)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Field {
    pub fn contains(&self, a: &Scalar) -> bool {
        matches!(self, Field::RationalFunctions) || a.is_rational()
    }

    /// Field-checked arithmetic.
    pub fn arith(&self, a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar, ScalarError> {
        for x in [a, b] {
            if !self.contains(x) {
                return Err(ScalarError::MixedField(x.to_string(), *self));
            }
        }
        Ok(match op {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => a.checked_div(b)?,
        })
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Rat(BigRational::from_integer(n.into()))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Rat(BigRational::new(p.into(), q.into()))
    }

    /// The indeterminate `q`.
    pub fn q() -> Self {
        Scalar::Func(RatFunc { num: IntPoly::x(), den: IntPoly::constant(BigInt::one()) })
    }

    pub fn from_func(f: RatFunc) -> Self {
        match f.constant_value() {
            Some(c) => Scalar::Rat(c),
            None => Scalar::Func(f),
        }
    }

    pub fn from_polys(num: IntPoly, den: IntPoly) -> Result<Self, ScalarError> {
        RatFunc::new(num, den).map(Scalar::from_func)
    }

    fn as_func(&self) -> RatFunc {
        match self {
            Scalar::Rat(r) => RatFunc::from_rational(r),
            Scalar::Func(f) => f.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_one())
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rat(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Func(_) => None,
        }
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        if o.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a / b),
            _ => {
                let (a, b) = (self.as_func(), o.as_func());
                Scalar::from_polys(&a.num * &b.den, &a.den * &b.num)?
            }
        })
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        Scalar::one().checked_div(self)
    }

    /// Integer power; negative exponents need a nonzero base.
    pub fn pow(&self, n: i64) -> Scalar {
        let base = if n < 0 { self.inv().expect("negative power of zero") } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Scalar::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    /// Minimal positive order if the value is a root of unity.
    pub fn root_of_unity_order(&self) -> Result<Option<u32>, ScalarError> {
        match self {
            _ if self.is_zero() => Err(ScalarError::ZeroInput),
            Scalar::Rat(r) if r.is_one() => Ok(Some(1)),
            Scalar::Rat(r) if (-r).is_one() => Ok(Some(2)),
            _ => Ok(None),
        }
    }

    pub fn is_root_of_unity(&self) -> Result<bool, ScalarError> {
        self.root_of_unity_order().map(|o| o.is_some())
    }

    /// Evaluates at `q = q0`.
    pub fn specialize(&self, q0: &BigRational) -> Result<BigRational, ScalarError> {
        match self {
            Scalar::Rat(r) => Ok(r.clone()),
            Scalar::Func(f) => {
                let d = f.den.eval(q0);
                if d.is_zero() {
                    return Err(ScalarError::PoleAtPoint { value: self.to_string(), point: q0.to_string() });
                }
                Ok(f.num.eval(q0) / d)
            }
        }
    }

    /// Degree at infinity, `deg num - deg den`; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let f = self.as_func();
        Some(f.num.degree()? as i64 - f.den.degree()? as i64)
    }

    /// Order of vanishing at `q = 0`; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let f = self.as_func();
        Some(f.num.valuation()? as i64 - f.den.valuation()? as i64)
    }

    /// Leading coefficient of the expansion at `q = infinity`.
    pub fn lead_at_infinity(&self) -> BigRational {
        let f = self.as_func();
        BigRational::new(f.num.lead(), f.den.lead())
    }

    /// Leading coefficient of the expansion at `q = 0`.
    pub fn lead_at_zero(&self) -> BigRational {
        let f = self.as_func();
        if f.num.is_zero() {
            return BigRational::zero();
        }
        BigRational::new(f.num.trailing(), f.den.trailing())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::Func(rf) => {
                let wrap = |p: &IntPoly| {
                    let s = p.render("q");
                    if p.term_count() > 1 {
                        format!("({s})")
                    } else {
                        s
                    }
                };
                if rf.den.degree() == Some(0) && rf.den.lead().is_one() {
                    f.write_str(&wrap(&rf.num))
                } else {
                    let den = rf.den.render("q");
                    let bare = rf.den.term_count() == 1 && (rf.den.degree() == Some(0) || rf.den.lead().is_one());
                    if bare {
                        write!(f, "{}/{den}", wrap(&rf.num))
                    } else {
                        write!(f, "{}/({den})", wrap(&rf.num))
                    }
                }
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Rat(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Func(f) => Scalar::Func(RatFunc { num: -f.num.clone(), den: f.den.clone() }),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Builds a scalar from a numerator and denominator known to be coprime.
fn coprime(num: IntPoly, den: IntPoly) -> Scalar {
    let (num, den) = if den.lead().is_negative() { (-num, -den) } else { (num, den) };
    Scalar::from_func(RatFunc { num, den })
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => {
                let (a, b) = (self.as_func(), o.as_func());
                // only factors of gcd(den_a, den_b) can cancel
                let g = a.den.gcd(&b.den);
                let (da, db) = (a.den.div_exact(&g), b.den.div_exact(&g));
                let num = &(&a.num * &db) + &(&b.num * &da);
                let den = &a.den * &db;
                if num.is_zero() {
                    return Scalar::zero();
                }
                let g2 = num.gcd(&g);
                coprime(num.div_exact(&g2), den.div_exact(&g2))
            }
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ if self.is_zero() || o.is_zero() => Scalar::zero(),
            _ => {
                let (a, b) = (self.as_func(), o.as_func());
                let g1 = a.num.gcd(&b.den);
                let g2 = b.num.gcd(&a.den);
                coprime(
                    &a.num.div_exact(&g1) * &b.num.div_exact(&g2),
                    &a.den.div_exact(&g2) * &b.den.div_exact(&g1),
                )
            }
        }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, o: &Scalar) -> Scalar {
        self.checked_div(o).expect("division by zero scalar")
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar { (&self).$m(&o) }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar { (&self).$m(o) }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar { self.$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(it: I) -> Scalar {
        it.fold(Scalar::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(it: I) -> Scalar {
        it.fold(Scalar::one(), |a, b| a * b)
    }
}
