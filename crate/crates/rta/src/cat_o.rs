//! Category O for rank-one triangular GWAs.
//!
//! Everything is driven by the scalars `lambda(z~_n)`: the Verma module
//! `M(lambda)` has a maximal vector in degree `n > 0` exactly when
//! `lambda(z~_n) = 0`, and the linkage class of `lambda` collects
//! `theta^(-n) * lambda` over all integer zeros. When `z1` is a scalar these
//! values form an exponential polynomial in `n`, whose integer zeros are
//! found by a window scan plus a dominance bound that closes both tails.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cartan::{character_at, dual_act, is_free, BaseElement, CartanError, Endo, FreeVerdict, Weight};
use crate::gwa::{CasimirOutcome, GwaError, TriangularGwa};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatOError {
    #[error(transparent)]
    Gwa(#[from] GwaError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error("weight is not free: {0:?}")]
    NotFree(FreeVerdict),
    #[error("invalid polynomial-exponential problem: {0}")]
    Validation(String),
}

/// Largest `|n|` the solver will scan to close a tail.
pub const SCAN_CAP: i64 = 16_384;

/// Default scan window.
pub const DEFAULT_WINDOW: u64 = 64;

// ---------------------------------------------------------------------------
// polynomials in n

type NPoly = Vec<Scalar>;

fn trim(mut p: NPoly) -> NPoly {
    while p.last().is_some_and(Scalar::is_zero) {
        p.pop();
    }
    p
}

fn peval(p: &[Scalar], n: i64) -> Scalar {
    let x = Scalar::int(n);
    p.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * &x) + c)
}

fn padd(a: &[Scalar], b: &[Scalar]) -> NPoly {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default()).collect())
}

fn pscale(a: &[Scalar], c: &Scalar) -> NPoly {
    trim(a.iter().map(|x| x * c).collect())
}

fn pmul(a: &[Scalar], b: &[Scalar]) -> NPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(out)
}

fn binom(n: usize, k: usize) -> Scalar {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Scalar::Rat(BigRational::from_integer(r))
}

/// `p(a n + b)`.
fn paffine(p: &[Scalar], a: i64, b: i64) -> NPoly {
    let lin = vec![Scalar::int(b), Scalar::int(a)];
    p.iter().rev().fold(vec![], |acc, c| padd(&pmul(&acc, &lin), std::slice::from_ref(c)))
}

/// `P` with `P(n+1) - P(n) = p(n)` and `P(0) = 0`.
fn sum_antidifference(p: &[Scalar]) -> NPoly {
    let d = p.len();
    let mut out = vec![Scalar::zero(); d + 1];
    for i in (0..d).rev() {
        let mut rhs = p[i].clone();
        for k in (i + 2)..=d {
            rhs = rhs - &binom(k, i) * &out[k];
        }
        out[i + 1] = rhs / Scalar::int(i as i64 + 1);
    }
    trim(out)
}

/// `Q` with `g Q(n+1) - Q(n) = p(n)`, for `g != 1`.
fn geometric_antidifference(p: &[Scalar], g: &Scalar) -> NPoly {
    let d = p.len();
    let mut out = vec![Scalar::zero(); d];
    let diag = g - &Scalar::one();
    for i in (0..d).rev() {
        let mut rhs = p[i].clone();
        for k in (i + 1)..d {
            rhs = rhs - &(g * &binom(k, i)) * &out[k];
        }
        out[i] = rhs / diag.clone();
    }
    trim(out)
}

// ---------------------------------------------------------------------------
// exponential polynomials

/// `F(n) = sum_j p_j(n) * base_j^n`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ExpPoly {
    terms: Vec<(NPoly, Scalar)>,
}

impl ExpPoly {
    pub fn new(terms: Vec<(Vec<Scalar>, Scalar)>) -> Self {
        let mut e = ExpPoly::default();
        for (p, b) in terms {
            e.push(p, b);
        }
        e
    }

    fn push(&mut self, p: NPoly, base: Scalar) {
        let p = trim(p);
        if p.is_empty() {
            return;
        }
        match self.terms.iter().position(|(_, b)| *b == base) {
            Some(i) => {
                let s = padd(&self.terms[i].0, &p);
                if s.is_empty() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].0 = s;
                }
            }
            None => self.terms.push((p, base)),
        }
    }

    pub fn terms(&self) -> &[(Vec<Scalar>, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, n: i64) -> Scalar {
        self.terms.iter().map(|(p, b)| peval(p, n) * b.pow(n)).sum()
    }

    /// `n -> F(-n)`.
    pub fn reflect(&self) -> ExpPoly {
        ExpPoly::new(self.terms.iter().map(|(p, b)| (paffine(p, -1, 0), b.inv().unwrap())).collect())
    }

    /// `m -> F(a m + r)`.
    fn substitute(&self, a: i64, r: i64) -> ExpPoly {
        ExpPoly::new(self.terms.iter().map(|(p, b)| (pscale(&paffine(p, a, r), &b.pow(r)), b.pow(a))).collect())
    }

    fn has_sign_ratio(&self) -> bool {
        self.terms.iter().enumerate().any(|(i, (_, a))| self.terms[i + 1..].iter().any(|(_, b)| (a / b) == Scalar::int(-1)))
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, b)| {
                let poly = BaseElement::Poly(p.iter().enumerate().map(|(i, c)| (i as u32, c.clone())).collect()).pruned();
                format!("({})*({b})^n", poly.to_string().replace('h', "n"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// the solver

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Certification {
    Certified,
    /// Only the scan window `[-W, W]` is known.
    WindowOnly(u64),
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified)
    }

    fn and(self, o: Certification) -> Certification {
        match (self, o) {
            (Certification::Certified, Certification::Certified) => Certification::Certified,
            (Certification::WindowOnly(a), Certification::WindowOnly(b)) => Certification::WindowOnly(a.min(b)),
            (Certification::WindowOnly(a), _) | (_, Certification::WindowOnly(a)) => Certification::WindowOnly(a),
        }
    }
}

/// `sum_j p_j(n) alpha_j^n = 0` over the integers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyExpProblem {
    pub terms: Vec<(Vec<Scalar>, Scalar)>,
    pub window: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PolyExpSolution {
    pub solutions: BTreeSet<i64>,
    pub status: Certification,
    /// No zeros at or beyond these, when known.
    pub upper_bound: Option<i64>,
    pub lower_bound: Option<i64>,
}

impl PolyExpProblem {
    pub fn validate(&self) -> Result<(), CatOError> {
        for (i, (p, a)) in self.terms.iter().enumerate() {
            if trim(p.clone()).is_empty() {
                return Err(CatOError::Validation(format!("term {i} has the zero polynomial")));
            }
            if a.is_zero() {
                return Err(CatOError::Validation(format!("term {i} has base 0")));
            }
        }
        for i in 0..self.terms.len() {
            for j in i + 1..self.terms.len() {
                let (a, b) = (&self.terms[i].1, &self.terms[j].1);
                if a == b {
                    return Err(CatOError::Validation(format!("terms {i} and {j} share the base {a}")));
                }
                if (a / b).is_root_of_unity().unwrap_or(false) {
                    return Err(CatOError::Validation(format!("the ratio of bases {a} and {b} is a root of unity")));
                }
            }
        }
        Ok(())
    }
}

pub fn polyexp_solve(problem: &PolyExpProblem) -> Result<PolyExpSolution, CatOError> {
    problem.validate()?;
    Ok(solve_validated(&ExpPoly::new(problem.terms.clone()), problem.window))
}

fn all_rational(e: &ExpPoly) -> bool {
    e.terms.iter().all(|(p, b)| b.is_rational() && p.iter().all(Scalar::is_rational))
}

fn solve_validated(e: &ExpPoly, window: u64) -> PolyExpSolution {
    let up = tail_bound(e);
    let down = tail_bound(&e.reflect());
    let w = window as i64;
    let hi = up.map_or(w, |n| n.max(w));
    let lo = down.map_or(w, |n| n.max(w));
    let solutions = (-lo..=hi).filter(|&n| e.eval(n).is_zero()).collect();
    let status = if up.is_some() && down.is_some() { Certification::Certified } else { Certification::WindowOnly(window) };
    PolyExpSolution { solutions, status, upper_bound: up, lower_bound: down.map(|n| -n) }
}

/// Some `N >= 1` with `F(n) != 0` for all `n >= N`.
fn tail_bound(e: &ExpPoly) -> Option<i64> {
    if all_rational(e) {
        let terms: Vec<(Vec<BigRational>, BigRational)> = e
            .terms
            .iter()
            .map(|(p, b)| (p.iter().map(|c| c.as_rational().unwrap().clone()).collect(), b.as_rational().unwrap().clone()))
            .collect();
        rational_tail(&terms)
    } else {
        q_tail(e, true).or_else(|| q_tail(e, false))
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ceil_i64(x: &BigRational) -> Option<i64> {
    let c = x.ceil().to_integer();
    i64::try_from(c).ok()
}

/// Dominance of the term with the largest `|alpha|`.
fn rational_tail(terms: &[(Vec<BigRational>, BigRational)]) -> Option<i64> {
    let (dom, rest): (Vec<_>, Vec<_>) = {
        let max = terms.iter().map(|(_, a)| a.abs()).max()?;
        terms.iter().partition(|(_, a)| a.abs() == max)
    };
    if dom.len() != 1 {
        return None;
    }
    let (p, a) = dom[0];
    let d = p.len() - 1;
    let lead = p[d].abs();
    let r: BigRational = p[..d].iter().map(|c| c.abs()).sum();
    let na = ceil_i64(&(&r * rat(2) / &lead))?.max(1);
    if rest.is_empty() {
        return Some(na);
    }
    // h_j(n) = c_j n^e_j rho_j^n bounds |p_j(n) alpha_j^n| / (|lead| n^d |alpha|^n / 2)
    let hs: Vec<(BigRational, i64, BigRational)> = rest
        .iter()
        .map(|(pj, aj)| {
            let b: BigRational = pj.iter().map(|c| c.abs()).sum();
            (b * rat(2) / &lead, pj.len() as i64 - 1 - d as i64, (aj / a).abs())
        })
        .collect();
    let h = |n: i64| -> BigRational {
        hs.iter()
            .map(|(c, e, rho)| c * rat(n).pow(*e as i32) * rho.pow(n as i32))
            .sum()
    };
    // beyond n0 every h_j is nonincreasing
    let mut n0 = na;
    for (_, e, rho) in &hs {
        if *e <= 0 {
            continue;
        }
        let ok = |n: i64| (rat(n + 1) / rat(n)).pow(*e as i32) * rho <= BigRational::one();
        n0 = n0.max(first_true(1, ok)?);
    }
    let below_one = |n: i64| h(n) < BigRational::one();
    first_true(n0, below_one)
}

/// Smallest `n >= start` with `pred(n)`, for a predicate that stays true
/// once true; `None` past the scan cap.
fn first_true(start: i64, pred: impl Fn(i64) -> bool) -> Option<i64> {
    if pred(start) {
        return Some(start);
    }
    let mut lo = start;
    let mut hi = start.max(1) * 2;
    while !pred(hi) {
        if hi > SCAN_CAP {
            return None;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Dominance in `Q(q)`: compare the degrees in `q` (at infinity, or at zero
/// when `at_infinity` is false) of the terms, then certify that the
/// coefficient of the top power is nonzero with the rational solver.
fn q_tail(e: &ExpPoly, at_infinity: bool) -> Option<i64> {
    let deg = |x: &Scalar| -> i64 {
        if at_infinity { x.degree().unwrap() } else { -x.valuation().unwrap() }
    };
    let lead = |x: &Scalar| if at_infinity { x.lead_at_infinity() } else { x.lead_at_zero() };
    let info: Vec<(i64, i64)> = e
        .terms
        .iter()
        .map(|(p, b)| (deg(b), p.iter().filter(|c| !c.is_zero()).map(deg).max().unwrap()))
        .collect();
    let top = info.iter().map(|(dl, _)| *dl).max()?;
    let dstar = info.iter().filter(|(dl, _)| *dl == top).map(|(_, dp)| *dp).max()?;
    let mut n1 = 1i64;
    for (dl, dp) in &info {
        if *dl < top {
            // need dp + n dl < dstar + n top
            n1 = n1.max(Integer::div_floor(&(dp - dstar), &(top - dl)) + 1);
        }
    }
    let mut leading = Vec::new();
    for ((p, b), (dl, _)) in e.terms.iter().zip(&info) {
        if *dl != top {
            continue;
        }
        let r: Vec<BigRational> =
            p.iter().map(|c| if !c.is_zero() && deg(c) == dstar { lead(c) } else { BigRational::zero() }).collect();
        leading.push((r, lead(b)));
    }
    let mut merged: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    for (p, b) in leading {
        match merged.iter_mut().find(|(_, c)| *c == b) {
            Some((q, _)) => {
                let n = q.len().max(p.len());
                *q = (0..n).map(|i| q.get(i).cloned().unwrap_or_default() + p.get(i).cloned().unwrap_or_default()).collect();
            }
            None => merged.push((p, b)),
        }
    }
    for (p, _) in merged.iter_mut() {
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
    }
    merged.retain(|(p, _)| !p.is_empty());
    if merged.is_empty() {
        return None;
    }
    let ne = rational_tail(&merged)?;
    Some(n1.max(ne))
}

/// Outcome of solving an exponential polynomial over the integers.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum ZeroSet {
    /// `F` vanishes on the whole residue class `residue mod modulus`.
    Infinite { residue: i64, modulus: i64 },
    Solved(PolyExpSolution),
}

/// Integer zeros of an arbitrary exponential polynomial: equal bases are
/// merged and a ratio of `-1` splits by parity.
pub fn exp_poly_zeros(e: &ExpPoly, window: u64) -> ZeroSet {
    zeros_rec(e, window, 1, 0)
}

fn zeros_rec(e: &ExpPoly, window: u64, modulus: i64, residue: i64) -> ZeroSet {
    if e.is_zero() {
        return ZeroSet::Infinite { residue, modulus };
    }
    if !e.has_sign_ratio() {
        let mut s = solve_validated(e, window);
        s.solutions = s.solutions.into_iter().map(|m| modulus * m + residue).collect();
        s.upper_bound = s.upper_bound.map(|m| modulus * m + residue);
        s.lower_bound = s.lower_bound.map(|m| modulus * m + residue);
        return ZeroSet::Solved(s);
    }
    let mut merged: Option<PolyExpSolution> = None;
    for r in 0..2 {
        match zeros_rec(&e.substitute(2, r), window, modulus * 2, residue + modulus * r) {
            inf @ ZeroSet::Infinite { .. } => return inf,
            ZeroSet::Solved(s) => {
                merged = Some(match merged {
                    None => s,
                    Some(m) => PolyExpSolution {
                        solutions: m.solutions.union(&s.solutions).copied().collect(),
                        status: m.status.and(s.status),
                        upper_bound: m.upper_bound.zip(s.upper_bound).map(|(a, b)| a.max(b)),
                        lower_bound: m.lower_bound.zip(s.lower_bound).map(|(a, b)| a.min(b)),
                    },
                })
            }
        }
    }
    ZeroSet::Solved(merged.unwrap())
}

// ---------------------------------------------------------------------------
// lambda(z~_n) as an exponential polynomial

/// `F` with `lambda(z~_n) = F(n)` for `n >= 0` and
/// `lambda(z~_-n) = -z1^n F(-n)`, when `z1` is a nonzero scalar and the
/// family admits closed forms. `F` and `n -> lambda(z~_n)` have the same
/// integer zeros.
pub fn linkage_exp_poly(a: &TriangularGwa, w: &Weight) -> Option<ExpPoly> {
    let sigma = a.z1().as_constant().filter(|s| !s.is_zero())?;
    let g = orbit_exp_poly(a, a.z0(), w)?;
    let mut out = ExpPoly::default();
    let sinv = sigma.inv().ok()?;
    for (p, beta) in g.terms {
        let gamma = &beta / &sigma;
        if gamma.is_one() {
            out.push(pscale(&sum_antidifference(&p), &sinv), sigma.clone());
        } else {
            let q = geometric_antidifference(&p, &gamma);
            let q0 = q.first().cloned().unwrap_or_default();
            out.push(pscale(&q, &sinv), beta);
            out.push(vec![-(&q0 * &sinv)], sigma.clone());
        }
    }
    Some(out)
}

/// `j -> lambda(theta^j x)` as an exponential polynomial.
fn orbit_exp_poly(a: &TriangularGwa, x: &BaseElement, w: &Weight) -> Option<ExpPoly> {
    match (a.theta(), x, w) {
        (Endo::PolyAffine { a: ca, b }, BaseElement::Poly(m), Weight::Poly(val)) => {
            let mut out = ExpPoly::default();
            if ca.is_one() {
                let lin = vec![val.clone(), b.clone()];
                let mut acc = vec![];
                for (e, c) in m {
                    let mut pw = vec![Scalar::one()];
                    for _ in 0..*e {
                        pw = pmul(&pw, &lin);
                    }
                    acc = padd(&acc, &pscale(&pw, c));
                }
                out.push(acc, Scalar::one());
            } else {
                // lambda(theta^j h) = a^j y - c with c = b/(a-1), y = lambda(h) + c
                let c = b / &(ca - &Scalar::one());
                let y = val + &c;
                for (e, coef) in m {
                    let e = *e as usize;
                    for k in 0..=e {
                        let v = coef * &binom(e, k) * y.pow(k as i64) * (-&c).pow((e - k) as i64);
                        out.push(vec![v], ca.pow(k as i64));
                    }
                }
            }
            Some(out)
        }
        (Endo::CharTwist(chi), BaseElement::Group { terms, .. }, Weight::Group(vals)) => {
            let mut out = ExpPoly::default();
            for (g, c) in terms {
                out.push(vec![c * &character_at(vals, g)], character_at(chi, g));
            }
            Some(out)
        }
        _ => None,
    }
}

/// Direct evaluation of `mu(z~_n)` for a quantum GWA with scalar `z1 = s`,
/// from the closed forms in terms of `alpha(g) s`.
pub fn quantum_closed_form(a: &TriangularGwa, mu: &Weight, n: i64) -> Option<Scalar> {
    let (Endo::CharTwist(chi), BaseElement::Group { terms, .. }, Weight::Group(vals)) = (a.theta(), a.z0(), mu) else {
        return None;
    };
    let s = a.z1().as_constant()?;
    if n == 0 {
        return Some(Scalar::zero());
    }
    let m = n.abs();
    let mut total = Scalar::zero();
    for (g, ag) in terms {
        // theta = rho(alpha), so alpha(g) = chi(g)^-1
        let alpha = character_at(chi, g).inv().ok()?;
        let mug = character_at(vals, g);
        let x = &alpha * &s;
        let term = if n > 0 {
            if x.is_one() {
                Scalar::int(m) * s.pow(m - 1) * ag * &mug
            } else {
                s.pow(m - 1) * ag * &mug * ((Scalar::one() - x.pow(-m)) / (Scalar::one() - x.pow(-1)))
            }
        } else if x.is_one() {
            Scalar::int(m) * s.pow(-1) * ag * &mug
        } else {
            ag * &alpha * &mug * ((Scalar::one() - x.pow(m)) / (Scalar::one() - x))
        };
        total = total + term;
    }
    Some(total)
}

// ---------------------------------------------------------------------------
// finiteness

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Finiteness {
    FiniteCertified,
    InfiniteCertified,
    Unknown,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FinitenessReport {
    pub verdict: Finiteness,
    pub reasons: Vec<String>,
    /// All integers `n` with `lambda(z~_n) = 0`, when certified.
    pub zeros: Option<BTreeSet<i64>>,
}

/// Decides whether the linkage class of `w` is finite.
pub fn finiteness_certificate(a: &TriangularGwa, w: &Weight, window: u64) -> Result<FinitenessReport, CatOError> {
    w.validate(a.family())?;
    let mut reasons = Vec::new();
    if a.z0().is_zero() {
        return Ok(FinitenessReport {
            verdict: Finiteness::InfiniteCertified,
            reasons: vec!["z0 = 0, so every z~_n vanishes".into()],
            zeros: None,
        });
    }
    if let Some(e) = linkage_exp_poly(a, w) {
        match exp_poly_zeros(&e, window) {
            ZeroSet::Infinite { residue, modulus } => {
                return Ok(FinitenessReport {
                    verdict: Finiteness::InfiniteCertified,
                    reasons: vec![format!("lambda(z~_n) vanishes for every n = {residue} mod {modulus}")],
                    zeros: None,
                });
            }
            ZeroSet::Solved(s) if s.status.is_certified() => {
                reasons.push("zero set of lambda(z~_n) certified by dominance bounds".into());
                reasons.extend(structural_reasons(a, w, window));
                return Ok(FinitenessReport { verdict: Finiteness::FiniteCertified, reasons, zeros: Some(s.solutions) });
            }
            ZeroSet::Solved(_) => reasons.push(format!("solver could not close both tails beyond |n| = {window}")),
        }
    }
    if let Some(r) = funz_zeros(a, w) {
        return Ok(r);
    }
    let structural = structural_reasons(a, w, window);
    if !structural.is_empty() {
        reasons.extend(structural);
        return Ok(FinitenessReport { verdict: Finiteness::FiniteCertified, reasons, zeros: None });
    }
    Ok(FinitenessReport { verdict: Finiteness::Unknown, reasons, zeros: None })
}

/// Finiteness arguments that do not produce the zero set.
fn structural_reasons(a: &TriangularGwa, w: &Weight, window: u64) -> Vec<String> {
    let mut out = Vec::new();
    let s_inv = a.z1().as_constant();
    match (a.theta(), &s_inv) {
        (Endo::PolyAffine { a: ca, b }, Some(z1)) if ca.is_one() && !b.is_zero() => {
            if z1.is_one() {
                out.push("down-up algebra with r = s = 1 and gamma != 0 in characteristic zero".into());
            } else if !z1.is_root_of_unity().unwrap_or(true) {
                out.push("down-up algebra with r = 1, gamma != 0 and s not a root of unity".into());
            }
        }
        (Endo::CharTwist(_), Some(_)) => {
            if let Some(r) = kleinian_exclusion(a, w, window) {
                out.push(r);
            }
        }
        _ => {}
    }
    out
}

/// For a quantum GWA with scalar `z1 = s`: if neither orbit condition can
/// hold at any point of the orbit of `w`, the linkage class is finite.
fn kleinian_exclusion(a: &TriangularGwa, w: &Weight, window: u64) -> Option<String> {
    let (Endo::CharTwist(chi), BaseElement::Group { terms, .. }, Weight::Group(vals)) = (a.theta(), a.z0(), w) else {
        return None;
    };
    let s = a.z1().as_constant()?;
    let mut gamma1 = Vec::new();
    let mut classes: Vec<Vec<(Vec<i64>, Scalar)>> = Vec::new();
    for (g, c) in terms {
        let alpha = character_at(chi, g).inv().ok()?;
        let x = &alpha * &s;
        if x.is_one() {
            gamma1.push((g.clone(), c.clone()));
        } else if x.is_root_of_unity().ok()? {
            // terms in the second set drop out of both conditions
        } else {
            let same = |h: &Vec<i64>| {
                let ah = character_at(chi, h).inv().unwrap();
                (&alpha / &ah).is_root_of_unity().unwrap_or(false)
            };
            match classes.iter_mut().find(|cl| same(&cl[0].0)) {
                Some(cl) => cl.push((g.clone(), c.clone())),
                None => classes.push(vec![(g.clone(), c.clone())]),
            }
        }
    }
    // at the orbit point theta^n * w, the value on g is w(g) chi(g)^(-n)
    let equation = |items: &[(Vec<i64>, Scalar)], twist: bool| -> ExpPoly {
        ExpPoly::new(
            items
                .iter()
                .map(|(g, c)| {
                    let alpha = character_at(chi, g).inv().unwrap();
                    let x = &alpha * &s;
                    let mut coef = c * &character_at(vals, g);
                    if !gamma1.iter().any(|(h, _)| h == g) {
                        coef = coef / (Scalar::one() - x.pow(-1));
                    }
                    if twist {
                        coef = coef * alpha;
                    }
                    (vec![coef], character_at(chi, g).inv().unwrap())
                })
                .collect(),
        )
    };
    let holds_somewhere = |twist: bool| -> Option<bool> {
        let mut eqs = vec![equation(&gamma1, false)];
        eqs.extend(classes.iter().map(|cl| equation(cl, twist)));
        let mut common: Option<BTreeSet<i64>> = None;
        for e in eqs {
            match exp_poly_zeros(&e, window) {
                ZeroSet::Infinite { modulus: 1, .. } => continue,
                ZeroSet::Infinite { .. } => return None,
                ZeroSet::Solved(sol) if sol.status.is_certified() => {
                    common = Some(match common {
                        None => sol.solutions,
                        Some(c) => c.intersection(&sol.solutions).copied().collect(),
                    });
                }
                ZeroSet::Solved(_) => return None,
            }
        }
        Some(common.is_none_or(|c| !c.is_empty()))
    };
    match (holds_somewhere(false)?, holds_somewhere(true)?) {
        (false, false) => Some("quantum GWA: neither orbit condition holds anywhere on the orbit".into()),
        _ => None,
    }
}

/// The continuous Hecke algebra case: `z~_n` is a moving window sum of the
/// coefficients of `z0`, so the tails are affine in `n`.
fn funz_zeros(a: &TriangularGwa, w: &Weight) -> Option<FinitenessReport> {
    let (Endo::ZShift(k), BaseElement::FunZ { constant, support }, Weight::ZPoint(m)) = (a.theta(), a.z0(), w) else {
        return None;
    };
    if !a.z1().as_constant().is_some_and(|c| c.is_one()) || *k == 0 {
        return None;
    }
    let lo = support.keys().next().copied().unwrap_or(0);
    let hi = support.keys().next_back().copied().unwrap_or(0);
    let reach = (m.abs() + lo.abs() + hi.abs()) / k.abs() + 2;
    let values = a.weighted_z_tilde(w, reach as usize).ok()?;
    let mut zeros: BTreeSet<i64> = (-reach..=reach).filter(|&n| values.at(n).is_zero()).collect();
    // beyond reach each step adds the constant part
    for sign in [1i64, -1] {
        let last = values.at(sign * reach).clone();
        if constant.is_zero() {
            if last.is_zero() {
                return Some(FinitenessReport {
                    verdict: Finiteness::InfiniteCertified,
                    reasons: vec![format!("z~_n is eventually constant 0 under the weight as n -> {}", if sign > 0 { "+oo" } else { "-oo" })],
                    zeros: None,
                });
            }
        } else {
            let steps = -&last / constant;
            if let Some(t) = steps.as_integer() {
                let t = i64::try_from(t).ok()?;
                if t > 0 {
                    zeros.insert(sign * (reach + t));
                }
            }
        }
    }
    Some(FinitenessReport {
        verdict: Finiteness::FiniteCertified,
        reasons: vec!["z~_n is affine in n outside the support window".into()],
        zeros: Some(zeros),
    })
}

// ---------------------------------------------------------------------------
// Verma modules, linkage and blocks

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct VermaReport {
    pub weight: Weight,
    pub freeness: FreeVerdict,
    pub bound: u64,
    pub maximal_degrees: Vec<u64>,
    pub composition_factors: Vec<Weight>,
    pub series_certified: bool,
}

pub fn verma_report(a: &TriangularGwa, w: &Weight, bound: u64, window: u64) -> Result<VermaReport, CatOError> {
    let freeness = is_free(a.theta(), w)?;
    let values = a.weighted_z_tilde(w, bound as usize)?;
    let maximal_degrees: Vec<u64> = (1..=bound).filter(|&n| values.positive[n as usize].is_zero()).collect();
    let mut composition_factors = vec![w.clone()];
    for &n in &maximal_degrees {
        composition_factors.push(dual_act(a.theta(), -(n as i64), w)?);
    }
    let series_certified = freeness == FreeVerdict::Free && {
        let cert = finiteness_certificate(a, w, window)?;
        cert.zeros.is_some_and(|z| z.iter().filter(|&&n| n > 0).all(|&n| n as u64 <= bound))
    };
    Ok(VermaReport { weight: w.clone(), freeness, bound, maximal_degrees, composition_factors, series_certified })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LinkageClass {
    /// `(n, theta^(-n) * lambda)` with `lambda(z~_n) = 0`, by increasing `n`.
    pub members: Vec<(i64, Weight)>,
    pub certification: Certification,
}

pub fn linkage_class(a: &TriangularGwa, w: &Weight, bound: u64, window: u64) -> Result<LinkageClass, CatOError> {
    let freeness = is_free(a.theta(), w)?;
    if freeness != FreeVerdict::Free {
        return Err(CatOError::NotFree(freeness));
    }
    let cert = finiteness_certificate(a, w, window)?;
    let (ns, certification): (Vec<i64>, Certification) = match cert.zeros {
        Some(z) => (z.into_iter().collect(), Certification::Certified),
        None => {
            let values = a.weighted_z_tilde(w, bound as usize)?;
            let b = bound as i64;
            ((-b..=b).filter(|&n| values.at(n).is_zero()).collect(), Certification::WindowOnly(bound))
        }
    };
    let members = ns
        .into_iter()
        .map(|n| Ok((n, dual_act(a.theta(), -n, w)?)))
        .collect::<Result<Vec<_>, CartanError>>()?;
    Ok(LinkageClass { members, certification })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct BlockReport {
    pub representative: Vec<Weight>,
    /// Highest first; tuples for tensor products.
    pub members: Vec<Vec<Weight>>,
    pub decomposition: Vec<Vec<u64>>,
    pub cartan: Vec<Vec<u64>>,
    pub s1: Vec<Vec<Weight>>,
    pub s3: Vec<Vec<Weight>>,
    pub s4_note: Option<String>,
    pub certification: Certification,
}

pub fn block_report(a: &TriangularGwa, w: &Weight, bound: u64, window: u64) -> Result<BlockReport, CatOError> {
    let class = linkage_class(a, w, bound, window)?;
    let span = class.members.last().map_or(0, |m| m.0) - class.members.first().map_or(0, |m| m.0);
    let k = class.members.len();
    let mut d = vec![vec![0u64; k]; k];
    for (i, (ni, wi)) in class.members.iter().enumerate() {
        let values = a.weighted_z_tilde(wi, span.max(0) as usize)?;
        for (j, (nj, _)) in class.members.iter().enumerate() {
            if nj >= ni && values.at(nj - ni).is_zero() {
                d[i][j] = 1;
            }
        }
    }
    let cartan = gram(&d);
    let members: Vec<Vec<Weight>> = class.members.iter().map(|(_, x)| vec![x.clone()]).collect();
    let s1 = class.members.iter().filter(|(n, _)| *n >= 0).map(|(_, x)| vec![x.clone()]).collect();
    let s4_note = match a.z1().as_constant().filter(Scalar::is_one).map(|_| a.casimir()) {
        Some(Ok(CasimirOutcome::Found { .. })) => {
            Some("a quadratic Casimir exists, so on the orbit of lambda S4 agrees with S3".into())
        }
        _ => None,
    };
    Ok(BlockReport {
        representative: vec![w.clone()],
        s3: members.clone(),
        members,
        decomposition: d,
        cartan,
        s1,
        s4_note,
        certification: class.certification,
    })
}

/// `D^T D`.
fn gram(d: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let k = d.len();
    (0..k).map(|i| (0..k).map(|j| (0..k).map(|r| d[r][i] * d[r][j]).sum()).collect()).collect()
}

fn kron(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let (ra, rb) = (a.len(), b.len());
    (0..ra * rb)
        .map(|i| (0..ra * rb).map(|j| a[i / rb][j / rb] * b[i % rb][j % rb]).collect())
        .collect()
}

/// Blocks of a tensor product: members are tuples, matrices are Kronecker
/// products.
pub fn tensor_block(reports: &[BlockReport]) -> BlockReport {
    let one = vec![vec![1u64]];
    let mut out = BlockReport {
        representative: vec![],
        members: vec![vec![]],
        decomposition: one.clone(),
        cartan: one,
        s1: vec![vec![]],
        s3: vec![],
        s4_note: None,
        certification: Certification::Certified,
    };
    let cross = |a: &[Vec<Weight>], b: &[Vec<Weight>]| -> Vec<Vec<Weight>> {
        a.iter().flat_map(|x| b.iter().map(move |y| [x.clone(), y.clone()].concat())).collect()
    };
    for r in reports {
        out.representative.extend(r.representative.iter().cloned());
        out.members = cross(&out.members, &r.members);
        out.s1 = cross(&out.s1, &r.s1);
        out.decomposition = kron(&out.decomposition, &r.decomposition);
        out.cartan = kron(&out.cartan, &r.cartan);
        out.certification = out.certification.and(r.certification);
    }
    out.s3 = out.members.clone();
    if !reports.is_empty() && reports.iter().all(|r| r.s4_note.is_some()) {
        out.s4_note = Some("every factor has a quadratic Casimir, so S4 agrees with S3 factorwise".into());
    }
    out
}

/// Verma subquotients of the truncated projective `P(lambda, l)`.
pub fn projective_filtration(a: &TriangularGwa, w: &Weight, l: u64) -> Result<Vec<Weight>, CatOError> {
    (0..l as i64).map(|k| Ok(dual_act(a.theta(), k, w)?)).collect()
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum FreeSet {
    All,
    AllExcept(Scalar),
    Empty,
}

/// Free weights of a down-up algebra with `theta(h) = (h + gamma)/r`.
pub fn downup_free_set(r: &Scalar, gamma: &Scalar) -> FreeSet {
    if r.is_one() {
        return if gamma.is_zero() { FreeSet::Empty } else { FreeSet::All };
    }
    if r.is_zero() || r.is_root_of_unity().unwrap_or(true) {
        return FreeSet::Empty;
    }
    let rinv = r.inv().unwrap();
    FreeSet::AllExcept(gamma * &rinv / (Scalar::one() - rinv))
}
