//! Commutative Cartan algebras `H`, their automorphisms and weights.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CartanError {
    #[error("operands come from different Cartan families")]
    FamilyMismatch,
    #[error("the family of finitely supported functions is not a Hopf algebra")]
    NotHopfFamily,
    #[error("invalid Cartan data: {0}")]
    Invalid(String),
}

/// Shape of `Z^rank x Z/n_1 x ... x Z/n_t`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GroupShape {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl GroupShape {
    pub fn new(rank: usize, torsion: Vec<u64>) -> Result<Self, CartanError> {
        if torsion.iter().any(|&n| n < 2) {
            return Err(CartanError::Invalid("torsion orders must be at least 2".into()));
        }
        Ok(GroupShape { rank, torsion })
    }

    pub fn generators(&self) -> usize {
        self.rank + self.torsion.len()
    }

    /// Reduces torsion coordinates into `0..n`.
    pub fn canonical(&self, mut g: Vec<i64>) -> Vec<i64> {
        for (i, &n) in self.torsion.iter().enumerate() {
            let c = &mut g[self.rank + i];
            *c = c.rem_euclid(n as i64);
        }
        g
    }

    pub fn identity(&self) -> Vec<i64> {
        vec![0; self.generators()]
    }

    pub fn compose(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        self.canonical(a.iter().zip(b).map(|(x, y)| x + y).collect())
    }

    pub fn generator_names(&self) -> Vec<String> {
        let free = (0..self.rank).map(|i| if self.rank == 1 { "K".to_string() } else { format!("K{}", i + 1) });
        let t = self.torsion.len();
        let tors = (0..t).map(move |i| if t == 1 { "g".to_string() } else { format!("g{}", i + 1) });
        free.chain(tors).collect()
    }

    pub fn render(&self, g: &[i64]) -> String {
        let names = self.generator_names();
        let parts: Vec<String> = g
            .iter()
            .zip(&names)
            .filter(|(e, _)| **e != 0)
            .map(|(e, n)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
            .collect();
        parts.join("*")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BaseFamily {
    Poly,
    Group(GroupShape),
    FunZ,
}

/// An element of `H` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BaseElement {
    /// Exponent to coefficient.
    Poly(BTreeMap<u32, Scalar>),
    Group { shape: GroupShape, terms: BTreeMap<Vec<i64>, Scalar> },
    /// `constant * 1 + sum of support[m] * t^m`.
    FunZ { constant: Scalar, support: BTreeMap<i64, Scalar> },
}

fn prune<K: Ord>(m: &mut BTreeMap<K, Scalar>) {
    m.retain(|_, v| !v.is_zero());
}

fn add_into<K: Ord + Clone>(m: &mut BTreeMap<K, Scalar>, k: &K, v: Scalar) {
    if v.is_zero() {
        return;
    }
    let e = m.entry(k.clone()).or_insert_with(Scalar::zero);
    *e = &*e + &v;
    if e.is_zero() {
        m.remove(k);
    }
}

impl BaseElement {
    pub fn zero(f: &BaseFamily) -> Self {
        Self::constant(f, Scalar::zero())
    }

    pub fn one(f: &BaseFamily) -> Self {
        Self::constant(f, Scalar::one())
    }

    pub fn constant(f: &BaseFamily, c: Scalar) -> Self {
        match f {
            BaseFamily::Poly => {
                let mut m = BTreeMap::from([(0, c)]);
                prune(&mut m);
                BaseElement::Poly(m)
            }
            BaseFamily::Group(s) => {
                let mut m = BTreeMap::from([(s.identity(), c)]);
                prune(&mut m);
                BaseElement::Group { shape: s.clone(), terms: m }
            }
            BaseFamily::FunZ => BaseElement::FunZ { constant: c, support: BTreeMap::new() },
        }
    }

    /// The generator `h` of `F[h]`.
    pub fn h() -> Self {
        BaseElement::Poly(BTreeMap::from([(1, Scalar::one())]))
    }

    pub fn monomial(shape: &GroupShape, g: Vec<i64>, c: Scalar) -> Self {
        let mut m = BTreeMap::from([(shape.canonical(g), c)]);
        prune(&mut m);
        BaseElement::Group { shape: shape.clone(), terms: m }
    }

    /// The point mass `t^m`.
    pub fn point(m: i64) -> Self {
        BaseElement::FunZ { constant: Scalar::zero(), support: BTreeMap::from([(m, Scalar::one())]) }
    }

    pub fn family(&self) -> BaseFamily {
        match self {
            BaseElement::Poly(_) => BaseFamily::Poly,
            BaseElement::Group { shape, .. } => BaseFamily::Group(shape.clone()),
            BaseElement::FunZ { .. } => BaseFamily::FunZ,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BaseElement::Poly(m) => m.is_empty(),
            BaseElement::Group { terms, .. } => terms.is_empty(),
            BaseElement::FunZ { constant, support } => constant.is_zero() && support.is_empty(),
        }
    }

    /// The scalar `c` if the element is `c * 1`.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self {
            BaseElement::Poly(m) => match m.len() {
                0 => Some(Scalar::zero()),
                1 => m.get(&0).cloned(),
                _ => None,
            },
            BaseElement::Group { shape, terms } => match terms.len() {
                0 => Some(Scalar::zero()),
                1 => terms.get(&shape.identity()).cloned(),
                _ => None,
            },
            BaseElement::FunZ { constant, support } => support.is_empty().then(|| constant.clone()),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = self.clone();
        match &mut out {
            BaseElement::Poly(m) => m.values_mut().for_each(|v| *v = &*v * c),
            BaseElement::Group { terms, .. } => terms.values_mut().for_each(|v| *v = &*v * c),
            BaseElement::FunZ { constant, support } => {
                *constant = &*constant * c;
                support.values_mut().for_each(|v| *v = &*v * c);
            }
        }
        out.pruned()
    }

    /// Drops zero coefficients.
    pub fn pruned(mut self) -> Self {
        match &mut self {
            BaseElement::Poly(m) => prune(m),
            BaseElement::Group { terms, .. } => prune(terms),
            BaseElement::FunZ { support, .. } => prune(support),
        }
        self
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, CartanError> {
        Ok(match (self, o) {
            (BaseElement::Poly(a), BaseElement::Poly(b)) => {
                let mut m = a.clone();
                b.iter().for_each(|(k, v)| add_into(&mut m, k, v.clone()));
                BaseElement::Poly(m)
            }
            (BaseElement::Group { shape, terms: a }, BaseElement::Group { shape: s2, terms: b }) if shape == s2 => {
                let mut m = a.clone();
                b.iter().for_each(|(k, v)| add_into(&mut m, k, v.clone()));
                BaseElement::Group { shape: shape.clone(), terms: m }
            }
            (BaseElement::FunZ { constant: c1, support: a }, BaseElement::FunZ { constant: c2, support: b }) => {
                let mut m = a.clone();
                b.iter().for_each(|(k, v)| add_into(&mut m, k, v.clone()));
                BaseElement::FunZ { constant: c1 + c2, support: m }
            }
            _ => return Err(CartanError::FamilyMismatch),
        })
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, CartanError> {
        Ok(match (self, o) {
            (BaseElement::Poly(a), BaseElement::Poly(b)) => {
                let mut m = BTreeMap::new();
                for (i, x) in a {
                    for (j, y) in b {
                        add_into(&mut m, &(i + j), x * y);
                    }
                }
                BaseElement::Poly(m)
            }
            (BaseElement::Group { shape, terms: a }, BaseElement::Group { shape: s2, terms: b }) if shape == s2 => {
                let mut m = BTreeMap::new();
                for (g, x) in a {
                    for (h, y) in b {
                        add_into(&mut m, &shape.compose(g, h), x * y);
                    }
                }
                BaseElement::Group { shape: shape.clone(), terms: m }
            }
            (BaseElement::FunZ { constant: c1, support: a }, BaseElement::FunZ { constant: c2, support: b }) => {
                // pointwise: (c1 + f1)(c2 + f2) = c1 c2 + c1 f2 + c2 f1 + f1 f2
                let mut m = BTreeMap::new();
                for (k, v) in a {
                    add_into(&mut m, k, v * c2);
                    if let Some(w) = b.get(k) {
                        add_into(&mut m, k, v * w);
                    }
                }
                for (k, v) in b {
                    add_into(&mut m, k, v * c1);
                }
                BaseElement::FunZ { constant: c1 * c2, support: m }
            }
            _ => return Err(CartanError::FamilyMismatch),
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(BaseElement::one(&self.family()), |acc, _| &acc * self)
    }

    /// Poly: the coefficient map. Panics for other families.
    pub fn poly_terms(&self) -> &BTreeMap<u32, Scalar> {
        match self {
            BaseElement::Poly(m) => m,
            _ => panic!("not a polynomial element"),
        }
    }

    /// Evaluates a weight on this element.
    pub fn evaluate(&self, w: &Weight) -> Result<Scalar, CartanError> {
        match (self, w) {
            (BaseElement::Poly(m), Weight::Poly(a)) => Ok(m.iter().map(|(e, c)| c * a.pow(*e as i64)).sum()),
            (BaseElement::Group { shape, terms }, Weight::Group(v)) if v.len() == shape.generators() => {
                Ok(terms.iter().map(|(g, c)| c * character_at(v, g)).sum())
            }
            (BaseElement::FunZ { constant, support }, Weight::ZPoint(m)) => {
                Ok(constant + support.get(m).cloned().unwrap_or_default())
            }
            _ => Err(CartanError::FamilyMismatch),
        }
    }

    /// Iterates coefficients, whatever the family.
    pub fn coefficients(&self) -> Vec<Scalar> {
        match self {
            BaseElement::Poly(m) => m.values().cloned().collect(),
            BaseElement::Group { terms, .. } => terms.values().cloned().collect(),
            BaseElement::FunZ { constant, support } => {
                std::iter::once(constant.clone()).chain(support.values().cloned()).collect()
            }
        }
    }
}

/// `prod values[i]^g[i]`.
pub fn character_at(values: &[Scalar], g: &[i64]) -> Scalar {
    values.iter().zip(g).map(|(v, e)| v.pow(*e)).product()
}

impl Add for &BaseElement {
    type Output = BaseElement;
    fn add(self, o: &BaseElement) -> BaseElement {
        self.try_add(o).expect("Cartan family mismatch")
    }
}

impl Neg for &BaseElement {
    type Output = BaseElement;
    fn neg(self) -> BaseElement {
        self.scale(&Scalar::int(-1))
    }
}

impl Sub for &BaseElement {
    type Output = BaseElement;
    fn sub(self, o: &BaseElement) -> BaseElement {
        self + &(-o)
    }
}

impl Mul for &BaseElement {
    type Output = BaseElement;
    fn mul(self, o: &BaseElement) -> BaseElement {
        self.try_mul(o).expect("Cartan family mismatch")
    }
}

/// Joins `(coefficient, monomial)` pairs into a readable sum.
/// Whether `s` is a sum outside any parentheses.
fn is_top_level_sum(s: &str) -> bool {
    let mut depth = 0i32;
    s.chars().any(|c| {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        c == ' ' && depth == 0
    })
}

pub(crate) fn render_sum(terms: impl IntoIterator<Item = (Scalar, String)>) -> String {
    let mut out = String::new();
    for (c, mono) in terms {
        let cs = c.to_string();
        let (neg, mag) = match cs.strip_prefix('-').filter(|rest| !is_top_level_sum(rest)) {
            Some(rest) => (true, rest.to_string()),
            None => (false, cs),
        };
        let body = match (mono.is_empty(), mag.as_str()) {
            (true, _) => mag,
            (false, "1") => mono,
            (false, m) if is_top_level_sum(m) => format!("({mag})*{mono}"),
            (false, _) => format!("{mag}*{mono}"),
        };
        match (out.is_empty(), neg) {
            (true, true) => out.push('-'),
            (true, false) => {}
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

impl fmt::Display for BaseElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BaseElement::Poly(m) => render_sum(m.iter().rev().map(|(e, c)| {
                let mono = match e {
                    0 => String::new(),
                    1 => "h".into(),
                    _ => format!("h^{e}"),
                };
                (c.clone(), mono)
            })),
            BaseElement::Group { shape, terms } => {
                render_sum(terms.iter().rev().map(|(g, c)| (c.clone(), shape.render(g))))
            }
            BaseElement::FunZ { constant, support } => render_sum(
                std::iter::once((constant.clone(), String::new()))
                    .filter(|(c, _)| !c.is_zero())
                    .chain(support.iter().map(|(m, c)| (c.clone(), format!("t[{m}]")))),
            ),
        };
        f.write_str(&s)
    }
}

impl Serialize for BaseElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Automorphisms of `H` in the three closed families.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Endo {
    /// `h -> a h + b`.
    PolyAffine { a: Scalar, b: Scalar },
    /// `g -> chi(g) g`, with `chi` given on generators.
    CharTwist(Vec<Scalar>),
    /// `t^m -> t^(m+k)`.
    ZShift(i64),
}

impl Endo {
    pub fn validate(&self, f: &BaseFamily) -> Result<(), CartanError> {
        match (self, f) {
            (Endo::PolyAffine { a, .. }, BaseFamily::Poly) => {
                if a.is_zero() {
                    return Err(CartanError::Invalid("affine map with a = 0 is not invertible".into()));
                }
                Ok(())
            }
            (Endo::CharTwist(chi), BaseFamily::Group(s)) => validate_character(chi, s, "character"),
            (Endo::ZShift(_), BaseFamily::FunZ) => Ok(()),
            _ => Err(CartanError::FamilyMismatch),
        }
    }

    /// `theta^n` in closed form, `n` any integer.
    pub fn pow(&self, n: i64) -> Endo {
        match self {
            Endo::PolyAffine { a, b } => {
                let an = a.pow(n);
                let s = if a.is_one() { Scalar::int(n) } else { (&an - Scalar::one()) / (a - Scalar::one()) };
                Endo::PolyAffine { b: b * s, a: an }
            }
            Endo::CharTwist(chi) => Endo::CharTwist(chi.iter().map(|v| v.pow(n)).collect()),
            Endo::ZShift(k) => Endo::ZShift(k * n),
        }
    }

    pub fn inverse(&self) -> Endo {
        self.pow(-1)
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Endo::PolyAffine { a, b } => a.is_one() && b.is_zero(),
            Endo::CharTwist(chi) => chi.iter().all(Scalar::is_one),
            Endo::ZShift(k) => *k == 0,
        }
    }

    /// Order of the automorphism, `None` when infinite.
    pub fn order(&self) -> Option<u64> {
        match self {
            Endo::PolyAffine { a, b } => match a.root_of_unity_order().ok()? {
                Some(1) if b.is_zero() => Some(1),
                Some(1) => None,
                Some(o) => Some(o as u64),
                None => None,
            },
            Endo::CharTwist(chi) => chi.iter().try_fold(1u64, |acc, v| {
                let o = v.root_of_unity_order().ok()?? as u64;
                Some(num_integer::lcm(acc, o))
            }),
            Endo::ZShift(k) => (*k == 0).then_some(1),
        }
    }
}

impl fmt::Display for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endo::PolyAffine { a, b } => {
                let ah = BaseElement::Poly(BTreeMap::from([(1, a.clone()), (0, b.clone())])).pruned();
                write!(f, "h -> {ah}")
            }
            Endo::CharTwist(chi) => {
                let parts: Vec<String> = chi.iter().map(|v| v.to_string()).collect();
                write!(f, "chi = [{}]", parts.join(", "))
            }
            Endo::ZShift(k) => write!(f, "t[m] -> t[m + {k}]"),
        }
    }
}

impl Serialize for Endo {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn validate_character(values: &[Scalar], s: &GroupShape, what: &str) -> Result<(), CartanError> {
    if values.len() != s.generators() {
        return Err(CartanError::Invalid(format!("{what} needs {} generator values", s.generators())));
    }
    if values.iter().any(Scalar::is_zero) {
        return Err(CartanError::Invalid(format!("{what} values must be nonzero")));
    }
    for (i, &n) in s.torsion.iter().enumerate() {
        if !values[s.rank + i].pow(n as i64).is_one() {
            return Err(CartanError::Invalid(format!(
                "{what} value on a torsion generator of order {n} must be an n-th root of unity"
            )));
        }
    }
    Ok(())
}

/// Applies an automorphism to an element of `H`.
pub fn apply_endo(theta: &Endo, x: &BaseElement) -> Result<BaseElement, CartanError> {
    match (theta, x) {
        (Endo::PolyAffine { a, b }, BaseElement::Poly(m)) => {
            let lin = BaseElement::Poly(BTreeMap::from([(1, a.clone()), (0, b.clone())])).pruned();
            let top = m.keys().next_back().copied().unwrap_or(0);
            let mut out = BaseElement::zero(&BaseFamily::Poly);
            let mut power = BaseElement::one(&BaseFamily::Poly);
            for e in 0..=top {
                if let Some(c) = m.get(&e) {
                    out = &out + &power.scale(c);
                }
                if e < top {
                    power = &power * &lin;
                }
            }
            Ok(out)
        }
        (Endo::CharTwist(chi), BaseElement::Group { shape, terms }) if chi.len() == shape.generators() => {
            let terms = terms.iter().map(|(g, c)| (g.clone(), c * character_at(chi, g))).collect();
            Ok(BaseElement::Group { shape: shape.clone(), terms })
        }
        (Endo::ZShift(k), BaseElement::FunZ { constant, support }) => Ok(BaseElement::FunZ {
            constant: constant.clone(),
            support: support.iter().map(|(m, c)| (m + k, c.clone())).collect(),
        }),
        _ => Err(CartanError::FamilyMismatch),
    }
}

/// Algebra homomorphisms `H -> F`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Weight {
    /// The value on `h`.
    Poly(Scalar),
    /// Values on the group generators.
    Group(Vec<Scalar>),
    /// Evaluation at a point of `Z`.
    ZPoint(i64),
}

impl Weight {
    pub fn validate(&self, f: &BaseFamily) -> Result<(), CartanError> {
        match (self, f) {
            (Weight::Poly(_), BaseFamily::Poly) | (Weight::ZPoint(_), BaseFamily::FunZ) => Ok(()),
            (Weight::Group(v), BaseFamily::Group(s)) => validate_character(v, s, "weight"),
            _ => Err(CartanError::FamilyMismatch),
        }
    }

    /// Convolution product of weights of a Hopf family.
    pub fn convolve(&self, o: &Weight) -> Result<Weight, CartanError> {
        match (self, o) {
            (Weight::Poly(a), Weight::Poly(b)) => Ok(Weight::Poly(a + b)),
            (Weight::Group(a), Weight::Group(b)) if a.len() == b.len() => {
                Ok(Weight::Group(a.iter().zip(b).map(|(x, y)| x * y).collect()))
            }
            (Weight::ZPoint(_), Weight::ZPoint(_)) => Err(CartanError::NotHopfFamily),
            _ => Err(CartanError::FamilyMismatch),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Poly(a) => write!(f, "h={a}"),
            Weight::Group(v) => {
                let names = GroupShape { rank: v.len(), torsion: vec![] }.generator_names();
                let parts: Vec<String> = v.iter().zip(names).map(|(x, n)| format!("{n}={x}")).collect();
                f.write_str(&parts.join(","))
            }
            Weight::ZPoint(m) => write!(f, "m={m}"),
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `theta^n * lambda = lambda o theta^(-n)`.
pub fn dual_act(theta: &Endo, n: i64, w: &Weight) -> Result<Weight, CartanError> {
    match (theta, w) {
        (Endo::PolyAffine { .. }, Weight::Poly(x)) => match theta.pow(-n) {
            Endo::PolyAffine { a, b } => Ok(Weight::Poly(a * x + b)),
            _ => unreachable!(),
        },
        (Endo::CharTwist(chi), Weight::Group(v)) if chi.len() == v.len() => {
            Ok(Weight::Group(v.iter().zip(chi).map(|(x, c)| x * c.pow(-n)).collect()))
        }
        (Endo::ZShift(k), Weight::ZPoint(m)) => Ok(Weight::ZPoint(m + n * k)),
        _ => Err(CartanError::FamilyMismatch),
    }
}

/// How the group generated by `theta` acts on the orbit of a weight.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum FreeVerdict {
    Free,
    /// `theta` has infinite order but `theta^n` fixes the weight.
    FixedAt(u64),
    /// `theta` has finite order; the orbit has this length.
    TorsionOrbit(u64),
}

pub fn is_free(theta: &Endo, w: &Weight) -> Result<FreeVerdict, CartanError> {
    match (theta, w) {
        (Endo::PolyAffine { a, b }, Weight::Poly(x)) => {
            let fixed = !a.is_one() && *x == b / (Scalar::one() - a);
            Ok(match theta.order() {
                Some(_) if fixed => FreeVerdict::TorsionOrbit(1),
                Some(o) => FreeVerdict::TorsionOrbit(o),
                None if fixed => FreeVerdict::FixedAt(1),
                None => FreeVerdict::Free,
            })
        }
        (Endo::CharTwist(chi), Weight::Group(v)) if chi.len() == v.len() => {
            Ok(theta.order().map_or(FreeVerdict::Free, FreeVerdict::TorsionOrbit))
        }
        (Endo::ZShift(k), Weight::ZPoint(_)) => {
            Ok(if *k == 0 { FreeVerdict::TorsionOrbit(1) } else { FreeVerdict::Free })
        }
        _ => Err(CartanError::FamilyMismatch),
    }
}

/// The weight-to-root map.
pub fn rho(w: &Weight) -> Result<Endo, CartanError> {
    match w {
        Weight::Poly(a) => Ok(Endo::PolyAffine { a: Scalar::one(), b: -a }),
        Weight::Group(v) => Ok(Endo::CharTwist(
            v.iter().map(|x| x.inv().map_err(|_| CartanError::Invalid("zero weight value".into()))).collect::<Result<_, _>>()?,
        )),
        Weight::ZPoint(_) => Err(CartanError::NotHopfFamily),
    }
}

/// The root-to-weight map `epsilon o theta^(-1)`.
pub fn psi_eps(theta: &Endo) -> Result<Weight, CartanError> {
    match theta.inverse() {
        // the counit kills h
        Endo::PolyAffine { b, .. } => Ok(Weight::Poly(b)),
        Endo::CharTwist(chi) => Ok(Weight::Group(chi)),
        Endo::ZShift(_) => Err(CartanError::NotHopfFamily),
    }
}
