//! Regular triangular monoids and the algebras `A_zeta(E, c)`.
//!
//! A monoid `Q` with an action of `Q` on `Q^-1` satisfying
//!
//! ```text
//! a b^-1          = (a |> b^-1) (b |> a^-1)^-1
//! a |> (b^-1 c^-1) = (a |> b^-1) ((b |> a^-1)^-1 |> c^-1)
//! ```
//!
//! The structured families all live in the group `E x| Z^k`, written as
//! pairs `(e, n)` meaning `t^e` followed by `n`, with `n e n^-1 = zeta^n e`
//! and `E = eta Z[S^-1]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RtmError {
    #[error("zeta_{0} = {1} does not preserve E: its primes must lie in S")]
    Inadmissible(usize, BigRational),
    #[error("{0}")]
    Invalid(String),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("{0} is not in E")]
    NotInE(BigRational),
    #[error("parse error: {0}")]
    Parse(String),
}


fn render_rat(r: &BigRational) -> String {
    if r.is_integer() { r.numer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) }
}

fn prime_factors(mut n: BigInt) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    n = n.abs();
    let mut p = 2u64;
    while BigInt::from(p) * BigInt::from(p) <= n {
        while (&n % p).is_zero() {
            out.insert(p);
            n /= p;
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.insert(n.to_u64().unwrap_or(u64::MAX));
    }
    out
}

/// `E = eta Z[S^-1]`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Lattice {
    #[serde(serialize_with = "ser_rat")]
    pub eta: BigRational,
    pub primes: BTreeSet<u64>,
}

fn ser_rat<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&render_rat(r))
}

fn ser_rats<S: Serializer>(r: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(render_rat))
}

impl Lattice {
    pub fn new(eta: BigRational, primes: impl IntoIterator<Item = u64>) -> Result<Self, RtmError> {
        if !eta.is_positive() {
            return Err(RtmError::Invalid("eta must be positive".into()));
        }
        let primes: BTreeSet<u64> = primes.into_iter().collect();
        for p in &primes {
            if prime_factors(BigInt::from(*p)) != BTreeSet::from([*p]) {
                return Err(RtmError::Invalid(format!("{p} is not prime")));
            }
        }
        Ok(Lattice { eta, primes })
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        let r = v / &self.eta;
        prime_factors(r.denom().clone()).is_subset(&self.primes)
    }

    fn admits(&self, z: &BigRational) -> bool {
        let mut ps = prime_factors(z.numer().clone());
        ps.extend(prime_factors(z.denom().clone()));
        ps.is_subset(&self.primes)
    }

    /// Nonnegative elements `eta a / p^i` with `a, i <= radius`.
    fn ball(&self, radius: u32) -> Vec<BigRational> {
        let mut dens = vec![BigInt::one()];
        for p in &self.primes {
            for i in 1..=radius {
                dens.push(BigInt::from(*p).pow(i));
            }
        }
        let mut out = BTreeSet::new();
        for a in 0..=radius as i64 {
            for d in &dens {
                out.insert(&self.eta * BigRational::new(BigInt::from(a), d.clone()));
            }
        }
        out.into_iter().collect()
    }
}

/// Element `t^e n` of `E x| Z^k`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GroupEl {
    pub e: BigRational,
    pub n: Vec<i64>,
}

impl fmt::Display for GroupEl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ns: Vec<String> = self.n.iter().map(i64::to_string).collect();
        write!(f, "({};{})", render_rat(&self.e), ns.join(","))
    }
}

impl Serialize for GroupEl {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The group `E x| Z^k` with `n e n^-1 = zeta^n e`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Cone {
    pub k: usize,
    #[serde(serialize_with = "ser_rats")]
    pub zeta: Vec<BigRational>,
    /// `None` for the free commutative monoid `N^k`.
    pub lattice: Option<Lattice>,
}

impl Cone {
    pub fn new(zeta: Vec<BigRational>, lattice: Option<Lattice>) -> Result<Self, RtmError> {
        for (j, z) in zeta.iter().enumerate() {
            if !z.is_positive() {
                return Err(RtmError::Invalid(format!("zeta_{} must be positive", j + 1)));
            }
            match &lattice {
                Some(l) if !l.admits(z) => return Err(RtmError::Inadmissible(j + 1, z.clone())),
                None if !z.is_one() => return Err(RtmError::Invalid("zeta needs a lattice E".into())),
                _ => {}
            }
        }
        Ok(Cone { k: zeta.len(), zeta, lattice })
    }

    /// `zeta^n`.
    pub fn scale(&self, n: &[i64]) -> BigRational {
        self.zeta.iter().zip(n).fold(BigRational::one(), |acc, (z, &m)| acc * z.pow(m as i32))
    }

    pub fn identity(&self) -> GroupEl {
        GroupEl { e: BigRational::zero(), n: vec![0; self.k] }
    }

    pub fn mul(&self, a: &GroupEl, b: &GroupEl) -> GroupEl {
        GroupEl { e: &a.e + self.scale(&a.n) * &b.e, n: a.n.iter().zip(&b.n).map(|(x, y)| x + y).collect() }
    }

    pub fn inv(&self, a: &GroupEl) -> GroupEl {
        let n: Vec<i64> = a.n.iter().map(|x| -x).collect();
        GroupEl { e: -(self.scale(&n) * &a.e), n }
    }

    pub fn is_positive(&self, a: &GroupEl) -> bool {
        !a.e.is_negative() && a.n.iter().all(|x| *x >= 0)
    }

    pub fn is_negative(&self, a: &GroupEl) -> bool {
        !a.e.is_positive() && a.n.iter().all(|x| *x <= 0)
    }

    /// `(e, n) |> (a, b) = (zeta^n a, b)`; trivial when `zeta = 1`.
    pub fn act(&self, p: &GroupEl, x: &GroupEl) -> GroupEl {
        GroupEl { e: self.scale(&p.n) * &x.e, n: x.n.clone() }
    }

    pub fn contains(&self, a: &GroupEl) -> bool {
        a.n.len() == self.k
            && match &self.lattice {
                Some(l) => l.contains(&a.e),
                None => a.e.is_zero(),
            }
    }
}

/// A monoid with an action on its inverses, viewed through a finite ball.
pub trait RtmView: Sync {
    type El: Clone + Eq + fmt::Debug + Send + Sync;
    fn one(&self) -> Self::El;
    /// `None` when the product is outside a finite sample.
    fn mul(&self, a: &Self::El, b: &Self::El) -> Option<Self::El>;
    fn inv(&self, a: &Self::El) -> Option<Self::El>;
    fn act(&self, p: &Self::El, x: &Self::El) -> Option<Self::El>;
    fn is_positive(&self, a: &Self::El) -> bool;
    /// Positive elements used by the checks.
    fn ball(&self, radius: u32) -> Vec<Self::El>;
    fn render(&self, a: &Self::El) -> String;
}

impl RtmView for Cone {
    type El = GroupEl;

    fn one(&self) -> GroupEl {
        self.identity()
    }

    fn mul(&self, a: &GroupEl, b: &GroupEl) -> Option<GroupEl> {
        Some(Cone::mul(self, a, b))
    }

    fn inv(&self, a: &GroupEl) -> Option<GroupEl> {
        Some(Cone::inv(self, a))
    }

    fn act(&self, p: &GroupEl, x: &GroupEl) -> Option<GroupEl> {
        Some(Cone::act(self, p, x))
    }

    fn is_positive(&self, a: &GroupEl) -> bool {
        Cone::is_positive(self, a)
    }

    fn ball(&self, radius: u32) -> Vec<GroupEl> {
        let es = self.lattice.as_ref().map_or(vec![BigRational::zero()], |l| l.ball(radius));
        let mut ns: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..self.k {
            ns = ns.into_iter().flat_map(|v| (0..=radius as i64).map(move |m| [v.clone(), vec![m]].concat())).collect();
        }
        es.iter().flat_map(|e| ns.iter().map(move |n| GroupEl { e: e.clone(), n: n.clone() })).collect()
    }

    fn render(&self, a: &GroupEl) -> String {
        a.to_string()
    }
}

/// Direct product with the componentwise action.
pub struct Product<A, B>(pub A, pub B);

impl<A: RtmView, B: RtmView> RtmView for Product<A, B> {
    type El = (A::El, B::El);

    fn one(&self) -> Self::El {
        (self.0.one(), self.1.one())
    }

    fn mul(&self, a: &Self::El, b: &Self::El) -> Option<Self::El> {
        Some((self.0.mul(&a.0, &b.0)?, self.1.mul(&a.1, &b.1)?))
    }

    fn inv(&self, a: &Self::El) -> Option<Self::El> {
        Some((self.0.inv(&a.0)?, self.1.inv(&a.1)?))
    }

    fn act(&self, p: &Self::El, x: &Self::El) -> Option<Self::El> {
        Some((self.0.act(&p.0, &x.0)?, self.1.act(&p.1, &x.1)?))
    }

    fn is_positive(&self, a: &Self::El) -> bool {
        self.0.is_positive(&a.0) && self.1.is_positive(&a.1)
    }

    fn ball(&self, radius: u32) -> Vec<Self::El> {
        let b = self.1.ball(radius);
        self.0.ball(radius).into_iter().flat_map(|x| b.iter().map(move |y| (x.clone(), y.clone()))).collect()
    }

    fn render(&self, a: &Self::El) -> String {
        format!("[{}, {}]", self.0.render(&a.0), self.1.render(&a.1))
    }
}

/// A submonoid cut out by a predicate; the action must stabilize it.
pub struct Sub<A, F>(pub A, pub F);

impl<A: RtmView, F: Fn(&A::El) -> bool + Sync> RtmView for Sub<A, F> {
    type El = A::El;

    fn one(&self) -> A::El {
        self.0.one()
    }

    fn mul(&self, a: &A::El, b: &A::El) -> Option<A::El> {
        self.0.mul(a, b)
    }

    fn inv(&self, a: &A::El) -> Option<A::El> {
        self.0.inv(a)
    }

    fn act(&self, p: &A::El, x: &A::El) -> Option<A::El> {
        self.0.act(p, x)
    }

    fn is_positive(&self, a: &A::El) -> bool {
        self.0.is_positive(a) && (self.1)(a)
    }

    fn ball(&self, radius: u32) -> Vec<A::El> {
        self.0.ball(radius).into_iter().filter(|a| (self.1)(a)).collect()
    }

    fn render(&self, a: &A::El) -> String {
        self.0.render(a)
    }
}

/// Largest sampled table.
pub const SAMPLED_CAP: usize = 64;

/// Finite tables: element `0` is the identity, products outside the
/// sample are `None`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Sampled {
    pub labels: Vec<String>,
    pub positive: Vec<bool>,
    pub mul: Vec<Vec<Option<usize>>>,
    pub inv: Vec<Option<usize>>,
    /// `(p, x) -> p |> x`.
    pub act: BTreeMap<(usize, usize), usize>,
}

impl Sampled {
    pub fn validate(&self) -> Result<(), RtmError> {
        let n = self.labels.len();
        if n == 0 || n > SAMPLED_CAP {
            return Err(RtmError::Invalid(format!("sampled tables hold 1..={SAMPLED_CAP} elements, got {n}")));
        }
        let ok = |i: &usize| *i < n;
        if self.positive.len() != n || self.mul.len() != n || self.inv.len() != n || self.mul.iter().any(|r| r.len() != n) {
            return Err(RtmError::Invalid("table sizes disagree".into()));
        }
        if !self.mul.iter().flatten().flatten().all(ok)
            || !self.inv.iter().flatten().all(ok)
            || !self.act.iter().all(|((a, b), c)| ok(a) && ok(b) && ok(c))
        {
            return Err(RtmError::Invalid("table entry out of range".into()));
        }
        Ok(())
    }

    /// Tabulates a view on the ball and its inverses.
    pub fn from_view<V: RtmView>(v: &V, radius: u32) -> Result<Self, RtmError> {
        let mut els = vec![v.one()];
        for p in v.ball(radius) {
            for x in [Some(p.clone()), v.inv(&p)].into_iter().flatten() {
                if !els.contains(&x) {
                    els.push(x);
                }
            }
        }
        if els.len() > SAMPLED_CAP {
            return Err(RtmError::Invalid(format!("{} elements exceed the cap of {SAMPLED_CAP}", els.len())));
        }
        let idx = |x: &V::El| els.iter().position(|y| y == x);
        let mul = els.iter().map(|a| els.iter().map(|b| v.mul(a, b).and_then(|c| idx(&c))).collect()).collect();
        let inv = els.iter().map(|a| v.inv(a).and_then(|c| idx(&c))).collect();
        let positive: Vec<bool> = els.iter().map(|a| v.is_positive(a)).collect();
        let mut act = BTreeMap::new();
        for (i, p) in els.iter().enumerate().filter(|(i, _)| positive[*i]) {
            for (j, x) in els.iter().enumerate() {
                if v.inv(x).is_some_and(|y| v.is_positive(&y)) {
                    if let Some(r) = v.act(p, x).and_then(|c| idx(&c)) {
                        act.insert((i, j), r);
                    }
                }
            }
        }
        Ok(Sampled { labels: els.iter().map(|a| v.render(a)).collect(), positive, mul, inv, act })
    }

    /// Redirects one action entry to a different negative element.
    pub fn mutate(&self, entry: usize, shift: usize) -> Sampled {
        let mut out = self.clone();
        let negatives: Vec<usize> = (0..self.labels.len()).filter(|&i| self.inv[i].is_some_and(|j| self.positive[j])).collect();
        let (&key, &old) = self.act.iter().nth(entry % self.act.len()).unwrap();
        let pos = negatives.iter().position(|&x| x == old).unwrap_or(0);
        let new = negatives[(pos + 1 + shift % (negatives.len() - 1)) % negatives.len()];
        out.act.insert(key, new);
        out
    }
}

impl RtmView for Sampled {
    type El = usize;

    fn one(&self) -> usize {
        0
    }

    fn mul(&self, a: &usize, b: &usize) -> Option<usize> {
        self.mul[*a][*b]
    }

    fn inv(&self, a: &usize) -> Option<usize> {
        self.inv[*a]
    }

    fn act(&self, p: &usize, x: &usize) -> Option<usize> {
        self.act.get(&(*p, *x)).copied()
    }

    fn is_positive(&self, a: &usize) -> bool {
        self.positive[*a]
    }

    fn ball(&self, _: u32) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.positive[i]).collect()
    }

    fn render(&self, a: &usize) -> String {
        self.labels[*a].clone()
    }
}

/// The monoid families with a spec-file form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Rtm {
    AbelianCone(Lattice),
    FreeMonoid(usize),
    Semidirect { zeta: Vec<BigRational>, lattice: Lattice },
    Sampled(Sampled),
}

impl Rtm {
    pub fn cone(&self) -> Option<Cone> {
        match self {
            Rtm::AbelianCone(l) => Some(Cone { k: 0, zeta: vec![], lattice: Some(l.clone()) }),
            Rtm::FreeMonoid(k) => Some(Cone { k: *k, zeta: vec![BigRational::one(); *k], lattice: None }),
            Rtm::Semidirect { zeta, lattice } => Cone::new(zeta.clone(), Some(lattice.clone())).ok(),
            Rtm::Sampled(_) => None,
        }
    }

    pub fn validate(&self) -> Result<(), RtmError> {
        match self {
            Rtm::Semidirect { zeta, lattice } => Cone::new(zeta.clone(), Some(lattice.clone())).map(|_| ()),
            Rtm::Sampled(s) => s.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum CocycleVerdict {
    Pass { checked: usize },
    Fail { condition: String, witness: Vec<String> },
}

impl CocycleVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, CocycleVerdict::Pass { .. })
    }
}

pub fn check_cocycles(m: &Rtm, ball: u32) -> Result<CocycleVerdict, RtmError> {
    m.validate()?;
    Ok(match m {
        Rtm::Sampled(s) => check_view(s, ball),
        _ => check_view(&m.cone().unwrap(), ball),
    })
}

/// Exhaustive check of the monoid axioms, the action laws and both cocycle
/// identities on the ball; identities whose terms leave a finite sample are
/// skipped. The first failure in enumeration order is reported.
pub fn check_view<V: RtmView>(v: &V, radius: u32) -> CocycleVerdict {
    let pos = v.ball(radius);
    let one = v.one();
    let negs: Vec<(V::El, V::El)> = pos.iter().filter_map(|p| Some((p.clone(), v.inv(p)?))).collect();
    let fail = |cond: &str, els: &[&V::El]| CocycleVerdict::Fail {
        condition: cond.to_string(),
        witness: els.iter().map(|x| v.render(x)).collect(),
    };
    let per_first = |a: &V::El| -> Result<usize, CocycleVerdict> {
        let mut checked = 0;
        let a_inv = v.inv(a);
        for b in &pos {
            if *a != one && *b != one {
                if let Some(ab) = v.mul(a, b) {
                    checked += 1;
                    if ab == one || !v.is_positive(&ab) {
                        return Err(fail("nonunit positives multiply to a nonpositive", &[a, b]));
                    }
                }
            }
        }
        if v.act(a, &one).is_some_and(|x| x != one) {
            return Err(fail("the action does not fix the unit", &[a]));
        }
        for (b, b_inv) in &negs {
            let Some(ab) = v.act(a, b_inv) else { continue };
            checked += 1;
            if !v.inv(&ab).is_some_and(|x| v.is_positive(&x)) {
                return Err(fail("the action leaves the negative monoid", &[a, b_inv]));
            }
            if *a == one && ab != *b_inv {
                return Err(fail("the unit acts nontrivially", &[b_inv]));
            }
            for c in &pos {
                if let (Some(ac), Some(cb)) = (v.mul(a, c), v.act(c, b_inv)) {
                    if let (Some(l), Some(r)) = (v.act(&ac, b_inv), v.act(a, &cb)) {
                        checked += 1;
                        if l != r {
                            return Err(fail("not an action: (ac) |> b^-1 != a |> (c |> b^-1)", &[a, c, b_inv]));
                        }
                    }
                }
            }
            // first cocycle identity
            if let Some(a_inv) = &a_inv {
                let lhs = v.mul(a, b_inv);
                let rhs = v.act(b, a_inv).and_then(|ba| v.inv(&ba)).and_then(|r| v.mul(&ab, &r));
                if let (Some(l), Some(r)) = (lhs, rhs) {
                    checked += 1;
                    if l != r {
                        return Err(fail("first cocycle identity", &[a, b]));
                    }
                }
                // second cocycle identity
                let Some(twist) = v.act(b, a_inv).and_then(|ba| v.inv(&ba)) else { continue };
                for (c, c_inv) in &negs {
                    let lhs = v.mul(b_inv, c_inv).and_then(|bc| v.act(a, &bc));
                    let rhs = v.act(&twist, c_inv).and_then(|r| v.mul(&ab, &r));
                    if let (Some(l), Some(r)) = (lhs, rhs) {
                        checked += 1;
                        if l != r {
                            return Err(fail("second cocycle identity", &[a, b, c]));
                        }
                    }
                }
            }
        }
        Ok(checked)
    };
    let results: Vec<Result<usize, CocycleVerdict>> = pos.par_iter().map(per_first).collect();
    let mut checked = 0;
    for r in results {
        match r {
            Ok(c) => checked += c,
            Err(f) => return f,
        }
    }
    CocycleVerdict::Pass { checked }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Classification {
    pub based: bool,
    pub discretely_graded: bool,
    /// Simple roots when based.
    pub simple_roots: Option<Vec<GroupEl>>,
}

pub fn classify(m: &Rtm) -> Result<Classification, RtmError> {
    m.validate()?;
    let cone = m.cone().ok_or_else(|| RtmError::Invalid("classification needs a structured family".into()))?;
    let lattice_ok = cone.lattice.as_ref().is_none_or(|l| l.primes.is_empty());
    let based = lattice_ok && cone.zeta.iter().all(One::is_one);
    let simple_roots = based.then(|| {
        let mut out: Vec<GroupEl> = (0..cone.k)
            .map(|j| GroupEl { e: BigRational::zero(), n: (0..cone.k).map(|i| (i == j) as i64).collect() })
            .collect();
        if let Some(l) = &cone.lattice {
            out.push(GroupEl { e: l.eta.clone(), n: vec![0; cone.k] });
        }
        out
    });
    Ok(Classification { based, discretely_graded: based, simple_roots })
}

// ---------------------------------------------------------------------------
// the algebra A_zeta(E, c)

/// Basis of `H0`: the unit and point indicators on the group.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum HBasis {
    One,
    Delta(GroupEl),
}

/// `t^(-neg_t) prod x_j^-^neg_x[j] h prod x_j^+^pos_x[j] t^(pos_t)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NfKey {
    pub neg_t: BigRational,
    pub neg_x: Vec<u32>,
    pub h: HBasis,
    pub pos_x: Vec<u32>,
    pub pos_t: BigRational,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RtmAlgebraElement(BTreeMap<NfKey, Scalar>);

impl RtmAlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &BTreeMap<NfKey, Scalar> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_term(&mut self, k: NfKey, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(k.clone()).or_default();
        *e = &*e + &c;
        if e.is_zero() {
            self.0.remove(&k);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.0 {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.0 {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Scalar::int(-1)))
    }
}

fn render_key(k: &NfKey) -> Vec<String> {
    let mut f = Vec::new();
    if !k.neg_t.is_zero() {
        f.push(format!("t^({})", render_rat(&-&k.neg_t)));
    }
    for (j, &m) in k.neg_x.iter().enumerate().rev() {
        match m {
            0 => {}
            1 => f.push(format!("x{}-", j + 1)),
            _ => f.push(format!("x{}-^{m}", j + 1)),
        }
    }
    if let HBasis::Delta(g) = &k.h {
        f.push(format!("delta{g}"));
    }
    for (j, &m) in k.pos_x.iter().enumerate() {
        match m {
            0 => {}
            1 => f.push(format!("x{}+", j + 1)),
            _ => f.push(format!("x{}+^{m}", j + 1)),
        }
    }
    if !k.pos_t.is_zero() {
        f.push(format!("t^({})", render_rat(&k.pos_t)));
    }
    f
}

impl fmt::Display for RtmAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in &self.0 {
            let factors = render_key(k);
            let (neg, mag) = match c.as_rational() {
                Some(r) if r.is_negative() => (true, -c),
                _ => (false, c.clone()),
            };
            let sep = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let body = match (mag.is_one(), factors.is_empty()) {
                (true, true) => "1".to_string(),
                (true, false) => factors.join("*"),
                (false, true) => format!("{mag}"),
                (false, false) if mag.is_rational() => format!("{mag}*{}", factors.join("*")),
                (false, false) => format!("({mag})*{}", factors.join("*")),
            };
            write!(f, "{sep}{body}")?;
            first = false;
        }
        Ok(())
    }
}

impl Serialize for RtmAlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `A_zeta(E, c)`: `k` pairs `x_j^+-` with `[x_j^+, x_j^-] = c_j`,
/// `x_j^+- t^e = t^(zeta_j^(+-1) e) x_j^+-`, and `H0` the functions on
/// `E x| Z^k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AZeta {
    pub cone: Cone,
    pub c: Vec<Scalar>,
}

fn binom(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

impl AZeta {
    pub fn new(m: &Rtm, c: Vec<Scalar>) -> Result<Self, RtmError> {
        m.validate()?;
        let cone = match m {
            Rtm::AbelianCone(_) | Rtm::Semidirect { .. } => m.cone().unwrap(),
            _ => return Err(RtmError::Invalid("the algebra needs a cone or semidirect monoid".into())),
        };
        if c.len() != cone.k {
            return Err(RtmError::ParameterMismatch(format!("expected {} values of c, got {}", cone.k, c.len())));
        }
        Ok(AZeta { cone, c })
    }

    pub fn k(&self) -> usize {
        self.cone.k
    }

    fn lattice(&self) -> &Lattice {
        self.cone.lattice.as_ref().unwrap()
    }

    fn key(&self) -> NfKey {
        NfKey {
            neg_t: BigRational::zero(),
            neg_x: vec![0; self.k()],
            h: HBasis::One,
            pos_x: vec![0; self.k()],
            pos_t: BigRational::zero(),
        }
    }

    fn single(&self, k: NfKey) -> RtmAlgebraElement {
        let mut out = RtmAlgebraElement::zero();
        out.add_term(k, Scalar::one());
        out
    }

    pub fn one(&self) -> RtmAlgebraElement {
        self.single(self.key())
    }

    pub fn scalar(&self, c: Scalar) -> RtmAlgebraElement {
        self.one().scale(&c)
    }

    /// `t^e` for any `e` in `E`.
    pub fn t(&self, e: &BigRational) -> Result<RtmAlgebraElement, RtmError> {
        if !self.lattice().contains(e) {
            return Err(RtmError::NotInE(e.clone()));
        }
        let mut k = self.key();
        if e.is_negative() {
            k.neg_t = -e;
        } else {
            k.pos_t = e.clone();
        }
        Ok(self.single(k))
    }

    pub fn x_plus(&self, j: usize) -> Result<RtmAlgebraElement, RtmError> {
        self.x(j, true)
    }

    pub fn x_minus(&self, j: usize) -> Result<RtmAlgebraElement, RtmError> {
        self.x(j, false)
    }

    fn x(&self, j: usize, plus: bool) -> Result<RtmAlgebraElement, RtmError> {
        if j == 0 || j > self.k() {
            return Err(RtmError::ParameterMismatch(format!("x_{j} with k = {}", self.k())));
        }
        let mut k = self.key();
        if plus {
            k.pos_x[j - 1] = 1;
        } else {
            k.neg_x[j - 1] = 1;
        }
        Ok(self.single(k))
    }

    /// Indicator of a point of the group.
    pub fn delta(&self, g: GroupEl) -> Result<RtmAlgebraElement, RtmError> {
        if !self.cone.contains(&g) {
            return Err(RtmError::ParameterMismatch(format!("{g} is not in the group")));
        }
        let mut k = self.key();
        k.h = HBasis::Delta(g);
        Ok(self.single(k))
    }

    fn check(&self, x: &RtmAlgebraElement) -> Result<(), RtmError> {
        for k in x.0.keys() {
            if k.neg_x.len() != self.k() || k.pos_x.len() != self.k() {
                return Err(RtmError::ParameterMismatch("element built for a different k".into()));
            }
        }
        Ok(())
    }

    /// `f -> f(g . -)` on `H0`.
    fn translate(&self, h: &HBasis, g: &GroupEl) -> HBasis {
        match h {
            HBasis::One => HBasis::One,
            HBasis::Delta(x) => HBasis::Delta(self.cone.mul(&self.cone.inv(g), x)),
        }
    }

    fn hmul(a: &HBasis, b: &HBasis) -> Option<HBasis> {
        match (a, b) {
            (HBasis::One, x) | (x, HBasis::One) => Some(x.clone()),
            (HBasis::Delta(x), HBasis::Delta(y)) => (x == y).then(|| a.clone()),
        }
    }

    fn t_weight(&self, e: BigRational) -> GroupEl {
        GroupEl { e, n: vec![0; self.k()] }
    }

    fn x_weight(&self, n: &[u32], sign: i64) -> GroupEl {
        GroupEl { e: BigRational::zero(), n: n.iter().map(|&m| sign * m as i64).collect() }
    }

    fn scale_by(&self, n: &[u32], sign: i64) -> BigRational {
        self.cone.scale(&n.iter().map(|&m| sign * m as i64).collect::<Vec<_>>())
    }

    fn mul_keys(&self, a: &NfKey, b: &NfKey, out: &mut RtmAlgebraElement, coef: &Scalar) {
        // t^b t^-c = t^-c t^b; then t^-c moves left, t^b moves right
        let th1 = -(&b.neg_t * self.scale_by(&a.pos_x, 1));
        let h1 = self.translate(&a.h, &self.t_weight(th1.clone()));
        let th2 = &th1 * self.scale_by(&a.neg_x, -1);
        let neg_t = &a.neg_t - &th2;
        let th3 = &a.pos_t * self.scale_by(&b.neg_x, 1);
        let h2 = self.translate(&b.h, &self.t_weight(-&th3));
        let pos_t = &th3 * self.scale_by(&b.pos_x, -1) + &b.pos_t;
        // straighten x^+(p) x^-(r) one index at a time
        let mut splits: Vec<(Vec<u32>, Scalar)> = vec![(vec![], coef.clone())];
        for j in 0..self.k() {
            let (p, r) = (a.pos_x[j], b.neg_x[j]);
            let mut next = Vec::new();
            for (idx, c) in &splits {
                for i in 0..=p.min(r) {
                    if i > 0 && self.c[j].is_zero() {
                        break;
                    }
                    let w = Scalar::from(BigRational::from_integer(factorial(i) * binom(p, i) * binom(r, i)));
                    next.push(([idx.clone(), vec![i]].concat(), c * &w * self.c[j].pow(i as i64)));
                }
            }
            splits = next;
        }
        for (idx, c) in splits {
            let r2: Vec<u32> = b.neg_x.iter().zip(&idx).map(|(r, i)| r - i).collect();
            let p2: Vec<u32> = a.pos_x.iter().zip(&idx).map(|(p, i)| p - i).collect();
            let h1b = self.translate(&h1, &self.x_weight(&r2, -1));
            let h2b = self.translate(&h2, &self.x_weight(&p2, -1));
            let Some(h) = Self::hmul(&h1b, &h2b) else { continue };
            let key = NfKey {
                neg_t: neg_t.clone(),
                neg_x: a.neg_x.iter().zip(&r2).map(|(x, y)| x + y).collect(),
                h,
                pos_x: p2.iter().zip(&b.pos_x).map(|(x, y)| x + y).collect(),
                pos_t: pos_t.clone(),
            };
            out.add_term(key, c);
        }
    }

    pub fn multiply(&self, x: &RtmAlgebraElement, y: &RtmAlgebraElement) -> Result<RtmAlgebraElement, RtmError> {
        self.check(x)?;
        self.check(y)?;
        let mut out = RtmAlgebraElement::zero();
        for (ka, ca) in &x.0 {
            for (kb, cb) in &y.0 {
                self.mul_keys(ka, kb, &mut out, &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn product(&self, xs: &[RtmAlgebraElement]) -> Result<RtmAlgebraElement, RtmError> {
        xs.iter().try_fold(self.one(), |acc, x| self.multiply(&acc, x))
    }

    pub fn commutator(&self, x: &RtmAlgebraElement, y: &RtmAlgebraElement) -> Result<RtmAlgebraElement, RtmError> {
        Ok(self.multiply(x, y)?.sub(&self.multiply(y, x)?))
    }

    /// `t^e <-> t^-e`, `x_j^+ <-> x_j^-`, identity on `H0`.
    pub fn anti_involution(&self, x: &RtmAlgebraElement) -> RtmAlgebraElement {
        let mut out = RtmAlgebraElement::zero();
        for (k, c) in &x.0 {
            let key = NfKey {
                neg_t: k.pos_t.clone(),
                neg_x: k.pos_x.clone(),
                h: k.h.clone(),
                pos_x: k.neg_x.clone(),
                pos_t: k.neg_t.clone(),
            };
            out.add_term(key, c.clone());
        }
        out
    }

    /// Parses products of `t^(e)`, `xj+`, `xj-`, `delta(e;n1,..)` and
    /// rationals, joined by `*`, summed with `+`.
    pub fn parse(&self, src: &str) -> Result<RtmAlgebraElement, RtmError> {
        let mut total = RtmAlgebraElement::zero();
        for term in split_sum(src) {
            let (sign, body) = term;
            let mut acc = self.scalar(Scalar::int(sign));
            for factor in body.split('*').map(str::trim) {
                if factor.is_empty() {
                    return Err(RtmError::Parse(format!("empty factor in '{src}'")));
                }
                acc = self.multiply(&acc, &self.parse_factor(factor)?)?;
            }
            total = total.add(&acc);
        }
        Ok(total)
    }

    fn parse_factor(&self, f: &str) -> Result<RtmAlgebraElement, RtmError> {
        let bad = || RtmError::Parse(format!("cannot read factor '{f}'"));
        if let Some(rest) = f.strip_prefix("t^") {
            let inner = rest.trim_start_matches('(').trim_end_matches(')');
            return self.t(&parse_rat(inner).ok_or_else(bad)?);
        }
        if let Some(rest) = f.strip_prefix("delta(").and_then(|r| r.strip_suffix(')')) {
            let (e, n) = rest.split_once(';').unwrap_or((rest, ""));
            let e = parse_rat(e.trim()).ok_or_else(bad)?;
            let n: Vec<i64> = n.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
            return self.delta(GroupEl { e, n });
        }
        if let Some(rest) = f.strip_prefix('x') {
            let (j, plus) = match rest.strip_suffix('+') {
                Some(j) => (j, true),
                None => (rest.strip_suffix('-').ok_or_else(bad)?, false),
            };
            return self.x(j.parse().map_err(|_| bad())?, plus);
        }
        Ok(self.scalar(Scalar::from(parse_rat(f).ok_or_else(bad)?)))
    }
}

fn parse_rat(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let d: BigInt = b.trim().parse().ok()?;
            let n: BigInt = a.trim().parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Splits on top-level `+`/`-` that separate terms, keeping signs inside
/// parentheses and after `^` or `x<j>`.
fn split_sum(src: &str) -> Vec<(i64, String)> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    let mut sign = 1;
    let chars: Vec<char> = src.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        let prev = chars[..i].iter().rev().find(|c| !c.is_whitespace()).copied();
        let next = chars[i + 1..].iter().find(|c| !c.is_whitespace()).copied();
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let binary = depth == 0
            && (ch == '+' || ch == '-')
            && !prev.is_some_and(|p| p.is_ascii_digit() && cur.trim_end().rsplit('*').next().is_some_and(|f| f.trim_start().starts_with('x')))
            && prev != Some('^')
            && !(next.is_none_or(|n| n == '*'));
        if binary {
            if !cur.trim().is_empty() {
                out.push((sign, cur.trim().to_string()));
            } else if ch == '-' {
                sign = -sign;
                continue;
            }
            cur.clear();
            sign = if ch == '-' { -1 } else { 1 };
            continue;
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push((sign, cur.trim().to_string()));
    }
    out
}

// ---------------------------------------------------------------------------
// Verma modules, Casimir and center

/// `theta`-graded vector `t^-e X^-(n) m_lambda` of a Verma module.
fn verma_act( x: &RtmAlgebraElement, g0: &GroupEl) -> BTreeMap<(BigRational, Vec<u32>), Scalar> {
    let mut out: BTreeMap<(BigRational, Vec<u32>), Scalar> = BTreeMap::new();
    for (k, c) in x.terms() {
        if !k.pos_t.is_zero() || k.pos_x.iter().any(|m| *m > 0) {
            continue;
        }
        let v = match &k.h {
            HBasis::One => c.clone(),
            HBasis::Delta(g) if g == g0 => c.clone(),
            HBasis::Delta(_) => continue,
        };
        let e = out.entry((k.neg_t.clone(), k.neg_x.clone())).or_default();
        *e = &*e + &v;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct NonMaximal {
    pub monomial: String,
    pub raising: String,
    pub image: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct MaximalReport {
    pub weight: GroupEl,
    pub depth: u32,
    pub monomials_checked: usize,
    pub maximal: usize,
    pub non_maximal: Vec<NonMaximal>,
    /// Every nonconstant monomial is maximal, so `N^- m_lambda` has
    /// codimension one.
    pub dim_simple_is_one: bool,
}

/// Applies each raising generator to each lowering monomial of bounded
/// depth in the Verma module of the point evaluation at `g0`.
pub fn maximal_vector_check(a: &AZeta, g0: &GroupEl, depth: u32) -> Result<MaximalReport, RtmError> {
    if !a.cone.contains(g0) {
        return Err(RtmError::ParameterMismatch(format!("{g0} is not in the group")));
    }
    let es = a.lattice().ball(depth);
    let mut xs: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..a.k() {
        xs = xs.into_iter().flat_map(|v| (0..=depth).map(move |m| [v.clone(), vec![m]].concat())).collect();
    }
    xs.retain(|v| v.iter().sum::<u32>() <= depth);
    let mut raising: Vec<(String, RtmAlgebraElement)> = Vec::new();
    for e in es.iter().filter(|e| e.is_positive()).take(depth as usize) {
        raising.push((format!("t^({})", render_rat(e)), a.t(e)?));
    }
    for j in 1..=a.k() {
        raising.push((format!("x{j}+"), a.x_plus(j)?));
    }
    let mut report = MaximalReport {
        weight: g0.clone(),
        depth,
        monomials_checked: 0,
        maximal: 0,
        non_maximal: vec![],
        dim_simple_is_one: true,
    };
    for e in &es {
        for n in &xs {
            let key = NfKey { neg_t: e.clone(), neg_x: n.clone(), h: HBasis::One, pos_x: vec![0; a.k()], pos_t: BigRational::zero() };
            if e.is_zero() && n.iter().all(|m| *m == 0) {
                continue;
            }
            let b = a.single(key);
            report.monomials_checked += 1;
            let mut ok = true;
            for (name, r) in &raising {
                let image = verma_act(&a.multiply(r, &b)?, g0);
                if !image.is_empty() {
                    ok = false;
                    let mut v = RtmAlgebraElement::zero();
                    for ((ne, nx), c) in image {
                        v.add_term(NfKey { neg_t: ne, neg_x: nx, h: HBasis::One, pos_x: vec![0; a.k()], pos_t: BigRational::zero() }, c);
                    }
                    report.non_maximal.push(NonMaximal { monomial: b.to_string(), raising: name.clone(), image: format!("({v}) m") });
                }
            }
            if ok {
                report.maximal += 1;
            } else {
                report.dim_simple_is_one = false;
            }
        }
    }
    Ok(report)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CasimirReport {
    pub omega: RtmAlgebraElement,
    /// `[Omega, t^e]` and `[Omega, t^-e]` over the sample.
    pub commutes_with_t: bool,
    /// Computed, not claimed, for `k >= 1`.
    pub x_commutators: Vec<(String, RtmAlgebraElement)>,
}

/// `Omega = sum_{e in Q} t^-e t^e` for a finite `Q` in `E >= 0`.
pub fn casimir_commute(a: &AZeta, qminus: &[BigRational], sample: u32) -> Result<CasimirReport, RtmError> {
    let mut omega = RtmAlgebraElement::zero();
    for e in qminus {
        if e.is_negative() {
            return Err(RtmError::Invalid(format!("{} is negative", render_rat(e))));
        }
        omega = omega.add(&a.multiply(&a.t(&-e)?, &a.t(e)?)?);
    }
    let mut commutes_with_t = true;
    for e in a.lattice().ball(sample).iter().filter(|e| e.is_positive()) {
        for s in [e.clone(), -e] {
            if !a.commutator(&omega, &a.t(&s)?)?.is_zero() {
                commutes_with_t = false;
            }
        }
    }
    let mut x_commutators = Vec::new();
    for j in 1..=a.k() {
        x_commutators.push((format!("x{j}+"), a.commutator(&omega, &a.x_plus(j)?)?));
        x_commutators.push((format!("x{j}-"), a.commutator(&omega, &a.x_minus(j)?)?));
    }
    Ok(CasimirReport { omega, commutes_with_t, x_commutators })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CenterWitness {
    pub j: usize,
    pub expected_central: bool,
    /// Generators with a nonzero commutator against `x_j^- x_j^+`.
    pub nonzero: Vec<(String, RtmAlgebraElement)>,
    pub passes: bool,
}

/// Checks `x_j^- x_j^+` against a sample of generators: central exactly
/// when `c_j = 0`.
pub fn center_witness(a: &AZeta, sample: u32) -> Result<Vec<CenterWitness>, RtmError> {
    let mut gens: Vec<(String, RtmAlgebraElement)> = Vec::new();
    for e in a.lattice().ball(sample).iter().filter(|e| e.is_positive()) {
        gens.push((format!("t^({})", render_rat(e)), a.t(e)?));
        gens.push((format!("t^({})", render_rat(&-e)), a.t(&-e)?));
        let g = GroupEl { e: e.clone(), n: (0..a.k()).map(|i| i as i64 - 1).collect() };
        gens.push((format!("delta{g}"), a.delta(g)?));
    }
    for j in 1..=a.k() {
        gens.push((format!("x{j}+"), a.x_plus(j)?));
        gens.push((format!("x{j}-"), a.x_minus(j)?));
    }
    let mut out = Vec::new();
    for j in 1..=a.k() {
        let z = a.multiply(&a.x_minus(j)?, &a.x_plus(j)?)?;
        let mut nonzero = Vec::new();
        for (name, g) in &gens {
            let c = a.commutator(&z, g)?;
            if !c.is_zero() {
                nonzero.push((name.clone(), c));
            }
        }
        let expected_central = a.c[j - 1].is_zero();
        let passes = expected_central == nonzero.is_empty();
        out.push(CenterWitness { j, expected_central, nonzero, passes });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn semidirect(z: BigRational, primes: &[u64]) -> Rtm {
        Rtm::Semidirect { zeta: vec![z], lattice: Lattice::new(r(1, 1), primes.iter().copied()).unwrap() }
    }

    #[test]
    fn structured_families_pass() {
        for k in 1..=3 {
            assert!(check_cocycles(&Rtm::FreeMonoid(k), if k == 3 { 2 } else { 3 }).unwrap().passed());
        }
        assert!(check_cocycles(&Rtm::AbelianCone(Lattice::new(r(1, 2), [3]).unwrap()), 3).unwrap().passed());
        assert!(check_cocycles(&semidirect(r(2, 1), &[2]), 3).unwrap().passed());
        assert!(check_cocycles(&semidirect(r(3, 2), &[2, 3]), 2).unwrap().passed());
    }

    #[test]
    fn admissibility() {
        let bad = Rtm::Semidirect { zeta: vec![r(3, 1)], lattice: Lattice::new(r(1, 1), [2]).unwrap() };
        assert!(matches!(check_cocycles(&bad, 1), Err(RtmError::Inadmissible(1, _))));
        assert!(Lattice::new(r(1, 1), [4]).is_err());
    }

    #[test]
    fn nontrivial_action_breaks_the_abelian_cone() {
        // zeta = 2 with the trivial action is not an RTM
        struct Wrong(Cone);
        impl RtmView for Wrong {
            type El = GroupEl;
            fn one(&self) -> GroupEl {
                self.0.identity()
            }
            fn mul(&self, a: &GroupEl, b: &GroupEl) -> Option<GroupEl> {
                Some(self.0.mul(a, b))
            }
            fn inv(&self, a: &GroupEl) -> Option<GroupEl> {
                Some(self.0.inv(a))
            }
            fn act(&self, _: &GroupEl, x: &GroupEl) -> Option<GroupEl> {
                Some(x.clone())
            }
            fn is_positive(&self, a: &GroupEl) -> bool {
                self.0.is_positive(a)
            }
            fn ball(&self, radius: u32) -> Vec<GroupEl> {
                RtmView::ball(&self.0, radius)
            }
            fn render(&self, a: &GroupEl) -> String {
                a.to_string()
            }
        }
        let cone = semidirect(r(2, 1), &[2]).cone().unwrap();
        let v = check_view(&Wrong(cone), 2);
        assert!(matches!(v, CocycleVerdict::Fail { .. }), "{v:?}");
    }

    #[test]
    fn products_and_submonoids() {
        let a = semidirect(r(2, 1), &[2]).cone().unwrap();
        let b = Rtm::FreeMonoid(1).cone().unwrap();
        assert!(check_view(&Product(a.clone(), b), 2).passed());
        // even outer exponents form a submonoid stable under the action
        let sub = Sub(a, |g: &GroupEl| g.n[0] % 2 == 0);
        assert!(check_view(&sub, 3).passed());
    }

    #[test]
    fn sampled_mutations_fail() {
        let s = Sampled::from_view(&Rtm::FreeMonoid(2).cone().unwrap(), 2).unwrap();
        assert!(check_view(&s, 0).passed());
        for i in 0..20 {
            let m = s.mutate(i * 7 + 3, i);
            assert_ne!(m, s);
            assert!(!check_view(&m, 0).passed(), "mutation {i}");
        }
    }

    #[test]
    fn classification() {
        let l = |p: &[u64]| Lattice::new(r(1, 1), p.iter().copied()).unwrap();
        let c = classify(&Rtm::Semidirect { zeta: vec![r(1, 1)], lattice: l(&[]) }).unwrap();
        assert!(c.based && c.discretely_graded);
        assert_eq!(c.simple_roots.unwrap().len(), 2);
        assert!(!classify(&Rtm::Semidirect { zeta: vec![r(2, 1)], lattice: l(&[2]) }).unwrap().based);
        assert!(!classify(&Rtm::AbelianCone(l(&[2]))).unwrap().based);
        assert!(!classify(&Rtm::Semidirect { zeta: vec![r(1, 1)], lattice: l(&[2]) }).unwrap().based);
    }

    fn az(zeta: i64, c: i64) -> AZeta {
        AZeta::new(&semidirect(r(zeta, 1), &[2]), vec![Scalar::int(c)]).unwrap()
    }

    #[test]
    fn defining_relations() {
        let a = az(2, 5);
        let e = r(3, 4);
        let lhs = a.multiply(&a.x_plus(1).unwrap(), &a.t(&e).unwrap()).unwrap();
        let rhs = a.multiply(&a.t(&(&e * r(2, 1))).unwrap(), &a.x_plus(1).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.to_string(), "x1+*t^(3/4)");
        let xx = a.multiply(&a.x_plus(1).unwrap(), &a.x_minus(1).unwrap()).unwrap();
        assert_eq!(xx.to_string(), "5 + x1-*x1+");
        let tt = a.multiply(&a.t(&e).unwrap(), &a.t(&-r(1, 2)).unwrap()).unwrap();
        assert_eq!(tt.to_string(), "t^(-1/2)*t^(3/4)");
        assert_eq!(a.parse("x1+ * t^(3/4) - 2*x1-").unwrap().to_string(), "x1+*t^(3/4) - 2*x1-");
        assert_eq!(a.parse("x1+*x1- - 5").unwrap(), a.multiply(&a.x_minus(1).unwrap(), &a.x_plus(1).unwrap()).unwrap());
    }

    #[test]
    fn functions_translate() {
        let a = az(2, 0);
        let g = GroupEl { e: r(1, 1), n: vec![1] };
        // delta_g t^e = t^e delta_{(e,0)^-1 g}
        let e = r(1, 2);
        let lhs = a.multiply(&a.delta(g.clone()).unwrap(), &a.t(&e).unwrap()).unwrap();
        let shifted = a.cone.mul(&a.cone.inv(&GroupEl { e: e.clone(), n: vec![0] }), &g);
        let rhs = a.multiply(&a.t(&e).unwrap(), &a.delta(shifted).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn verma_checks() {
        let g0 = GroupEl { e: r(1, 4), n: vec![2] };
        let rep = maximal_vector_check(&az(2, 0), &g0, 4).unwrap();
        assert!(rep.dim_simple_is_one && rep.non_maximal.is_empty());
        let rep = maximal_vector_check(&az(2, 1), &g0, 2).unwrap();
        assert!(!rep.dim_simple_is_one);
        let first = rep.non_maximal.iter().find(|n| n.monomial == "x1-").unwrap();
        assert_eq!((first.raising.as_str(), first.image.as_str()), ("x1+", "(1) m"));
        assert!(rep.non_maximal.iter().all(|n| n.raising == "x1+"));
    }

    #[test]
    fn casimir_and_center() {
        let a = az(2, 0);
        let c = casimir_commute(&a, &[BigRational::zero()], 2).unwrap();
        assert_eq!(c.omega, a.one());
        assert!(c.commutes_with_t && c.x_commutators.iter().all(|(_, x)| x.is_zero()));
        let c = casimir_commute(&a, &[r(1, 1)], 2).unwrap();
        assert!(c.commutes_with_t);
        assert!(!c.x_commutators[0].1.is_zero());
        let abelian = AZeta::new(&semidirect(r(1, 1), &[]), vec![Scalar::zero()]).unwrap();
        let c = casimir_commute(&abelian, &[BigRational::zero(), r(1, 1)], 2).unwrap();
        assert!(c.commutes_with_t && c.x_commutators.iter().all(|(_, x)| x.is_zero()));

        let w = center_witness(&az(2, 0), 2).unwrap();
        assert!(w[0].expected_central && w[0].passes);
        let w = center_witness(&az(2, 3), 2).unwrap();
        assert!(!w[0].expected_central && w[0].passes);
        let xp = w[0].nonzero.iter().find(|(n, _)| n == "x1+").unwrap();
        assert_eq!(xp.1, a.x_plus(1).unwrap().scale(&Scalar::int(-3)));
        let k0 = AZeta::new(&Rtm::AbelianCone(Lattice::new(r(1, 1), [2]).unwrap()), vec![]).unwrap();
        assert!(center_witness(&k0, 2).unwrap().is_empty());
    }

    fn arb_element(a: AZeta) -> impl Strategy<Value = RtmAlgebraElement> {
        let gens = prop::collection::vec((0usize..6, -2i64..=2, -3i64..=3), 1..4);
        prop::collection::vec(gens, 1..3).prop_map(move |terms| {
            let mut total = RtmAlgebraElement::zero();
            for word in terms {
                let mut acc = a.one();
                for (g, v, c) in word {
                    let f = match g {
                        0 => a.t(&r(v, 2)).unwrap(),
                        1 => a.x_plus(1).unwrap(),
                        2 => a.x_minus(1).unwrap(),
                        3 => a.delta(GroupEl { e: r(v, 4), n: vec![v.signum()] }).unwrap(),
                        4 => a.scalar(Scalar::int(c)),
                        _ => a.t(&r(-v.abs(), 1)).unwrap(),
                    };
                    acc = a.multiply(&acc, &f).unwrap();
                }
                total = total.add(&acc);
            }
            total
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn associative_with_involution(
            (x, y, z) in (arb_element(az(2, 3)), arb_element(az(2, 3)), arb_element(az(2, 3)))
        ) {
            let a = az(2, 3);
            let l = a.multiply(&a.multiply(&x, &y).unwrap(), &z).unwrap();
            let rr = a.multiply(&x, &a.multiply(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(l, rr);
            prop_assert_eq!(a.multiply(&a.one(), &x).unwrap(), x.clone());
            let ixy = a.anti_involution(&a.multiply(&x, &y).unwrap());
            let iyix = a.multiply(&a.anti_involution(&y), &a.anti_involution(&x)).unwrap();
            prop_assert_eq!(ixy, iyix);
        }
    }
}
