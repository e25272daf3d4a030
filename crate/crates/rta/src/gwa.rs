//! Triangular generalized Weyl algebras `W(H, theta, z0, z1)`.
//!
//! Elements are kept in the coordinates `sum d^m * h_{m,n} * u^n`. The
//! product commutes `u^b` past `d^c` with a memoized expansion built from
//! `u d^j = d^(j-1) A_j + d^j B_j u`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cartan::{apply_endo, dual_act, BaseElement, BaseFamily, CartanError, Endo, GroupShape, Weight};
use crate::linalg;
use crate::rewrite::{gwa_presentation, FiniteAlgebra, FreePoly, Presentation, RewriteError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GwaError {
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error("this operation needs z1 = 1")]
    PreconditionZ1,
    #[error("theta has finite order {0}; only PBW checks accept that")]
    FiniteOrder(u64),
    #[error("{0}")]
    Invalid(String),
}

/// `sum d^m * h * u^n`, keyed by `(m, n)`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GwaElement(BTreeMap<(u32, u32), BaseElement>);

impl GwaElement {
    pub fn zero() -> Self {
        GwaElement(BTreeMap::new())
    }

    pub fn term(m: u32, h: BaseElement, n: u32) -> Self {
        let mut x = Self::zero();
        x.add_term(m, n, h);
        x
    }

    pub fn from_h(h: BaseElement) -> Self {
        Self::term(0, h, 0)
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), BaseElement> {
        &self.0
    }

    pub fn coefficient(&self, m: u32, n: u32) -> Option<&BaseElement> {
        self.0.get(&(m, n))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_term(&mut self, m: u32, n: u32, h: BaseElement) {
        if h.is_zero() {
            return;
        }
        match self.0.remove(&(m, n)) {
            Some(old) => {
                let s = &old + &h;
                if !s.is_zero() {
                    self.0.insert((m, n), s);
                }
            }
            None => {
                self.0.insert((m, n), h);
            }
        }
    }

    pub fn add(&self, o: &GwaElement) -> GwaElement {
        let mut out = self.clone();
        for (&(m, n), h) in &o.0 {
            out.add_term(m, n, h.clone());
        }
        out
    }

    pub fn sub(&self, o: &GwaElement) -> GwaElement {
        self.add(&o.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> GwaElement {
        let mut out = Self::zero();
        for (&(m, n), h) in &self.0 {
            out.add_term(m, n, h.scale(c));
        }
        out
    }
}

impl fmt::Display for GwaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(&(m, n), h)| {
                let mut factors = Vec::new();
                let pow = |g: &str, e: u32| if e == 1 { g.to_string() } else { format!("{g}^{e}") };
                let hs = h.to_string();
                if m == 0 && n == 0 {
                    return hs;
                }
                let constant = h.as_constant();
                let wrap = |s: String| if s.contains(' ') { format!("({s})") } else { s };
                let mut sign = "";
                match &constant {
                    Some(c) if c.is_one() => {}
                    Some(c) if (-c).is_one() => sign = "-",
                    Some(_) => factors.push(wrap(hs.clone())),
                    None => {}
                }
                if m > 0 {
                    factors.push(pow("d", m));
                }
                if constant.is_none() {
                    match hs.strip_prefix('-').filter(|r| !r.contains(' ')) {
                        Some(r) => {
                            sign = "-";
                            factors.push(r.to_string());
                        }
                        None => factors.push(wrap(hs)),
                    }
                }
                if n > 0 {
                    factors.push(pow("u", n));
                }
                format!("{sign}{}", factors.join("*"))
            })
            .collect();
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            match (i, p.strip_prefix('-')) {
                (0, _) => out.push_str(p),
                (_, Some(rest)) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                _ => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        f.write_str(&out)
    }
}

impl Serialize for GwaElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `z'_n` (for `n >= 0`) and `z~_n`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ZElements {
    pub n: i64,
    pub zprime: Option<BaseElement>,
    pub ztilde: BaseElement,
}

/// `lambda(z~_n)` and `lambda(z~_{-n})` for `n = 0..=N`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightedZ {
    pub positive: Vec<Scalar>,
    pub negative: Vec<Scalar>,
}

impl WeightedZ {
    pub fn at(&self, n: i64) -> &Scalar {
        if n >= 0 {
            &self.positive[n as usize]
        } else {
            &self.negative[n.unsigned_abs() as usize]
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum CasimirOutcome {
    /// `Omega = d u + zeta` with `(id - theta)(zeta) = z0`.
    Found { zeta: BaseElement, omega: GwaElement },
    NotInImage { witness: String },
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum CenterKind {
    All,
    Constants,
    /// Polynomials in the given element.
    PolynomialsIn(BaseElement),
    /// Spanned by the group elements fixed by `theta`.
    FixedGroupElements,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CenterReport {
    pub kind: CenterKind,
    /// Basis of the kernel inside the truncation used for the check.
    pub basis: Vec<BaseElement>,
    pub brute_force_dimension: usize,
    pub verified: bool,
}

type UdCache = Mutex<HashMap<(u32, u32), Arc<Vec<BaseElement>>>>;

/// A triangular GWA over a commutative Cartan family.
pub struct TriangularGwa {
    family: BaseFamily,
    theta: Endo,
    z0: BaseElement,
    z1: BaseElement,
    name: Option<String>,
    ud: UdCache,
    ab: Mutex<Vec<(BaseElement, BaseElement)>>,
}

impl Clone for TriangularGwa {
    fn clone(&self) -> Self {
        let mut a = Self::build(self.family.clone(), self.theta.clone(), self.z0.clone(), self.z1.clone());
        a.name = self.name.clone();
        a
    }
}

impl fmt::Debug for TriangularGwa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TriangularGwa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            write!(f, "{n}: ")?;
        }
        write!(f, "W(theta: {}, z0 = {}, z1 = {})", self.theta, self.z0, self.z1)
    }
}

impl TriangularGwa {
    fn build(family: BaseFamily, theta: Endo, z0: BaseElement, z1: BaseElement) -> Self {
        TriangularGwa { family, theta, z0, z1, name: None, ud: Mutex::default(), ab: Mutex::default() }
    }

    /// Requires `theta` of infinite order.
    pub fn new(family: BaseFamily, theta: Endo, z0: BaseElement, z1: BaseElement) -> Result<Self, GwaError> {
        if let Some(o) = theta.order() {
            return Err(GwaError::FiniteOrder(o));
        }
        Self::with_finite_order(family, theta, z0, z1)
    }

    /// As [`TriangularGwa::new`] but admits finite-order `theta`.
    pub fn with_finite_order(family: BaseFamily, theta: Endo, z0: BaseElement, z1: BaseElement) -> Result<Self, GwaError> {
        theta.validate(&family)?;
        if z0.family() != family || z1.family() != family {
            return Err(CartanError::FamilyMismatch.into());
        }
        Ok(Self::build(family, theta, z0, z1))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn family(&self) -> &BaseFamily {
        &self.family
    }

    pub fn theta(&self) -> &Endo {
        &self.theta
    }

    pub fn z0(&self) -> &BaseElement {
        &self.z0
    }

    pub fn z1(&self) -> &BaseElement {
        &self.z1
    }

    pub fn one(&self) -> GwaElement {
        GwaElement::from_h(BaseElement::one(&self.family))
    }

    pub fn d(&self) -> GwaElement {
        GwaElement::term(1, BaseElement::one(&self.family), 0)
    }

    pub fn u(&self) -> GwaElement {
        GwaElement::term(0, BaseElement::one(&self.family), 1)
    }

    pub fn scalar(&self, c: Scalar) -> GwaElement {
        GwaElement::from_h(BaseElement::constant(&self.family, c))
    }

    fn theta_pow(&self, n: i64, h: &BaseElement) -> BaseElement {
        if n == 0 {
            return h.clone();
        }
        apply_endo(&self.theta.pow(n), h).expect("family checked on construction")
    }

    /// `(A_j, B_j)` with `u d^j = d^(j-1) A_j + d^j B_j u`.
    fn ab(&self, j: u32) -> (BaseElement, BaseElement) {
        let mut memo = self.ab.lock().unwrap();
        if memo.is_empty() {
            memo.push((BaseElement::zero(&self.family), BaseElement::one(&self.family)));
        }
        while memo.len() <= j as usize {
            let (a, b) = memo.last().unwrap().clone();
            let next = if memo.len() == 1 {
                (self.z0.clone(), self.z1.clone())
            } else {
                (&self.theta_pow(1, &a) + &(&b * &self.z0), &self.theta_pow(1, &b) * &self.z1)
            };
            memo.push(next);
        }
        memo[j as usize].clone()
    }

    /// `u^b d^c = sum_k d^(c-k) P_k u^(b-k)`; returns the `P_k`.
    fn ud_expansion(&self, b: u32, c: u32) -> Arc<Vec<BaseElement>> {
        if b == 0 || c == 0 {
            return Arc::new(vec![BaseElement::one(&self.family)]);
        }
        if let Some(v) = self.ud.lock().unwrap().get(&(b, c)) {
            return v.clone();
        }
        let prev = self.ud_expansion(b - 1, c);
        let mut next = vec![BaseElement::zero(&self.family); b.min(c) as usize + 1];
        for (k, p) in prev.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let j = c - k as u32;
            let tp = self.theta_pow(1, p);
            if j == 0 {
                next[k] = &next[k] + &tp;
            } else {
                let (a, bj) = self.ab(j);
                next[k + 1] = &next[k + 1] + &(&a * p);
                next[k] = &next[k] + &(&bj * &tp);
            }
        }
        let next = Arc::new(next);
        self.ud.lock().unwrap().insert((b, c), next.clone());
        next
    }

    fn check(&self, x: &GwaElement) -> Result<(), GwaError> {
        if x.0.values().any(|h| h.family() != self.family) {
            return Err(CartanError::FamilyMismatch.into());
        }
        Ok(())
    }

    pub fn multiply(&self, x: &GwaElement, y: &GwaElement) -> Result<GwaElement, GwaError> {
        self.check(x)?;
        self.check(y)?;
        let mut out = GwaElement::zero();
        for (&(a, b), h) in &x.0 {
            for (&(c, e), h2) in &y.0 {
                for (k, p) in self.ud_expansion(b, c).iter().enumerate() {
                    if p.is_zero() {
                        continue;
                    }
                    let k = k as u32;
                    let left = self.theta_pow((c - k) as i64, h);
                    let right = self.theta_pow((b - k) as i64, h2);
                    out.add_term(a + c - k, b - k + e, &(&left * p) * &right);
                }
            }
        }
        Ok(out)
    }

    /// Product of a list of elements, left to right.
    pub fn product(&self, xs: &[GwaElement]) -> Result<GwaElement, GwaError> {
        xs.iter().try_fold(self.one(), |acc, x| self.multiply(&acc, x))
    }

    pub fn pow(&self, x: &GwaElement, e: u32) -> Result<GwaElement, GwaError> {
        (0..e).try_fold(self.one(), |acc, _| self.multiply(&acc, x))
    }

    pub fn commutator(&self, x: &GwaElement, y: &GwaElement) -> Result<GwaElement, GwaError> {
        Ok(self.multiply(x, y)?.sub(&self.multiply(y, x)?))
    }

    pub fn z_prime(&self, n: u32) -> BaseElement {
        (0..n).fold(BaseElement::one(&self.family), |acc, i| &acc * &self.theta_pow(i as i64, &self.z1))
    }

    /// `z~_n` straight from its defining sum.
    pub fn z_tilde(&self, n: i64) -> BaseElement {
        if n < 0 {
            return self.theta_pow(n, &self.z_tilde(-n));
        }
        (0..n).fold(BaseElement::zero(&self.family), |acc, j| {
            &acc + &self.theta_pow(j, &(&self.z0 * &self.z_prime((n - 1 - j) as u32)))
        })
    }

    pub fn z_elements(&self, n: i64) -> ZElements {
        ZElements { n, zprime: (n >= 0).then(|| self.z_prime(n as u32)), ztilde: self.z_tilde(n) }
    }

    /// `lambda(z~_n)` for `|n| <= n_max` in linear time.
    ///
    /// With `a_j = lambda(theta^j z0)` and `b_j = lambda(theta^j z1)`,
    /// `lambda(z~_(n+1)) = a_n + b_(n-1) lambda(z~_n)` and
    /// `lambda(z~_-(n+1)) = lambda(z~_-n) + a_(-n-1) b_(-n-1) ... b_(-2)`.
    pub fn weighted_z_tilde(&self, w: &Weight, n_max: usize) -> Result<WeightedZ, GwaError> {
        w.validate(&self.family)?;
        let at = |j: i64, x: &BaseElement| -> Result<Scalar, GwaError> {
            Ok(x.evaluate(&dual_act(&self.theta, -j, w)?)?)
        };
        let mut positive = vec![Scalar::zero()];
        for n in 0..n_max as i64 {
            let prev = positive.last().unwrap();
            let b = if n == 0 { Scalar::zero() } else { at(n - 1, &self.z1)? };
            positive.push(at(n, &self.z0)? + &b * prev);
        }
        let mut negative = vec![Scalar::zero()];
        let mut run = Scalar::one();
        for n in 0..n_max as i64 {
            if n > 0 {
                run = &run * &at(-n - 1, &self.z1)?;
            }
            let next = negative.last().unwrap() + &(at(-n - 1, &self.z0)? * &run);
            negative.push(next);
        }
        Ok(WeightedZ { positive, negative })
    }

    pub fn anti_involution(&self, x: &GwaElement) -> GwaElement {
        GwaElement(x.0.iter().map(|(&(m, n), h)| ((n, m), h.clone())).collect())
    }

    pub fn shapovalov(&self, x: &GwaElement, y: &GwaElement) -> Result<BaseElement, GwaError> {
        Ok(harish_chandra(&self.multiply(&self.anti_involution(x), y)?, &self.family))
    }

    /// Solves `(id - theta)(zeta) = z0`.
    pub fn casimir(&self) -> Result<CasimirOutcome, GwaError> {
        if self.z1.as_constant().is_none_or(|c| !c.is_one()) {
            return Err(GwaError::PreconditionZ1);
        }
        let zeta = match (&self.theta, &self.z0) {
            (Endo::PolyAffine { .. }, BaseElement::Poly(m)) => {
                let top = m.keys().next_back().map_or(0, |&e| e as usize) + 1;
                // columns: (id - theta)(h^e), rows: coefficient of h^i
                let cols: Vec<Vec<Scalar>> = (0..=top)
                    .map(|e| {
                        let he = BaseElement::h().pow(e as u32);
                        let img = &he - &self.theta_pow(1, &he);
                        (0..=top).map(|i| img.poly_terms().get(&(i as u32)).cloned().unwrap_or_default()).collect()
                    })
                    .collect();
                let rows: Vec<Vec<Scalar>> = (0..=top).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
                let rhs: Vec<Scalar> = (0..=top).map(|i| m.get(&(i as u32)).cloned().unwrap_or_default()).collect();
                match linalg::solve(&rows, &rhs) {
                    Some(x) => BaseElement::Poly(x.into_iter().enumerate().map(|(e, c)| (e as u32, c)).collect()).pruned(),
                    None => {
                        return Ok(CasimirOutcome::NotInImage {
                            witness: format!("no polynomial of degree <= {top} maps to z0 under id - theta"),
                        })
                    }
                }
            }
            (Endo::CharTwist(chi), BaseElement::Group { shape, terms }) => {
                let mut out = BTreeMap::new();
                for (g, c) in terms {
                    let x = crate::cartan::character_at(chi, g);
                    if x.is_one() {
                        return Ok(CasimirOutcome::NotInImage {
                            witness: format!("theta fixes {} but z0 has coefficient {c} there", shape.render(g)),
                        });
                    }
                    out.insert(g.clone(), c / &(Scalar::one() - x));
                }
                BaseElement::Group { shape: shape.clone(), terms: out }
            }
            (Endo::ZShift(k), BaseElement::FunZ { constant, support }) => {
                if !constant.is_zero() {
                    return Ok(CasimirOutcome::NotInImage { witness: format!("z0 has constant part {constant}") });
                }
                match funz_antidifference(*k, support) {
                    Ok(s) => BaseElement::FunZ { constant: Scalar::zero(), support: s },
                    Err(w) => return Ok(CasimirOutcome::NotInImage { witness: w }),
                }
            }
            _ => return Err(CartanError::FamilyMismatch.into()),
        };
        let omega = self.multiply(&self.d(), &self.u())?.add(&GwaElement::from_h(zeta.clone()));
        Ok(CasimirOutcome::Found { zeta, omega })
    }

    /// `ker(id - theta)`, in closed form and checked by linear algebra on a
    /// truncation of size `bound`.
    pub fn center_in_h(&self, bound: u32) -> CenterReport {
        let fam = &self.family;
        let (kind, basis) = match &self.theta {
            t if t.is_identity() => (CenterKind::All, truncation_basis(fam, bound)),
            Endo::PolyAffine { a, b } => match a.root_of_unity_order().ok().flatten() {
                Some(n) if n > 1 => {
                    let fixed = b / &(Scalar::one() - a);
                    let gen = (&BaseElement::h() - &BaseElement::constant(fam, fixed)).pow(n);
                    let basis = (0..=bound / n).map(|i| gen.pow(i)).collect();
                    (CenterKind::PolynomialsIn(gen), basis)
                }
                _ => (CenterKind::Constants, vec![BaseElement::one(fam)]),
            },
            Endo::CharTwist(chi) => {
                let basis = truncation_basis(fam, bound)
                    .into_iter()
                    .filter(|g| match g {
                        BaseElement::Group { terms, .. } => {
                            terms.keys().all(|k| crate::cartan::character_at(chi, k).is_one())
                        }
                        _ => false,
                    })
                    .collect();
                (CenterKind::FixedGroupElements, basis)
            }
            Endo::ZShift(_) => (CenterKind::Constants, vec![BaseElement::one(fam)]),
        };
        let brute = self.brute_force_kernel_dim(bound);
        let verified = brute == basis.len() && basis.iter().all(|x| self.theta_pow(1, x) == *x);
        CenterReport { kind, basis, brute_force_dimension: brute, verified }
    }

    fn brute_force_kernel_dim(&self, bound: u32) -> usize {
        let basis = truncation_basis(&self.family, bound);
        let images: Vec<BaseElement> = basis.iter().map(|x| x - &self.theta_pow(1, x)).collect();
        let mut keys: Vec<String> = Vec::new();
        let mut cols: Vec<BTreeMap<usize, Scalar>> = Vec::new();
        for img in &images {
            let mut col = BTreeMap::new();
            for (k, c) in coordinate_terms(img) {
                let idx = keys.iter().position(|x| *x == k).unwrap_or_else(|| {
                    keys.push(k);
                    keys.len() - 1
                });
                col.insert(idx, c);
            }
            cols.push(col);
        }
        let rows: Vec<Vec<Scalar>> = (0..keys.len())
            .map(|r| cols.iter().map(|c| c.get(&r).cloned().unwrap_or_default()).collect())
            .collect();
        if rows.is_empty() {
            return basis.len();
        }
        linalg::nullspace(&rows, basis.len()).len()
    }

    /// The finite-dimensional model of a GWA over a finite abelian group.
    pub fn finite_model(&self) -> Option<FiniteModel> {
        let BaseFamily::Group(shape) = &self.family else { return None };
        if shape.rank != 0 {
            return None;
        }
        let orders = shape.torsion.clone();
        let algebra = FiniteAlgebra::group_algebra(&orders);
        let elems: Vec<Vec<i64>> = orders.iter().fold(vec![vec![]], |acc, &n| {
            acc.into_iter().flat_map(|e: Vec<i64>| (0..n as i64).map(move |i| [e.clone(), vec![i]].concat())).collect()
        });
        let coords = |x: &BaseElement| -> Vec<Scalar> {
            let BaseElement::Group { terms, .. } = x else { unreachable!() };
            elems.iter().map(|g| terms.get(g).cloned().unwrap_or_default()).collect()
        };
        let theta = elems
            .iter()
            .map(|g| coords(&self.theta_pow(1, &BaseElement::monomial(shape, g.clone(), Scalar::one()))))
            .collect();
        Some(FiniteModel { z0: coords(&self.z0), z1: coords(&self.z1), algebra, theta, elems, shape: shape.clone() })
    }
}

/// `H` as a finite algebra together with the GWA data in its basis.
pub struct FiniteModel {
    pub algebra: FiniteAlgebra,
    /// Column `i` is the image of basis element `i`.
    pub theta: Vec<Vec<Scalar>>,
    pub z0: Vec<Scalar>,
    pub z1: Vec<Scalar>,
    elems: Vec<Vec<i64>>,
    shape: GroupShape,
}

impl FiniteModel {
    pub fn presentation(&self) -> Result<Presentation, RewriteError> {
        gwa_presentation(&self.algebra, &self.theta, &self.z0, &self.z1)
    }

    /// The word `d^m g u^n` for each term.
    pub fn to_free(&self, p: &Presentation, x: &GwaElement) -> FreePoly {
        let d = p.generator_index("d").unwrap();
        let u = p.generator_index("u").unwrap();
        let mut out = FreePoly::zero();
        for (&(m, n), h) in x.terms() {
            let BaseElement::Group { terms, .. } = h else { continue };
            for (g, c) in terms {
                let i = self.elems.iter().position(|e| e == g).unwrap();
                let mut w = vec![d; m as usize];
                w.extend(p.generator_index(&self.algebra.names[i]));
                w.extend(std::iter::repeat_n(u, n as usize));
                out.add_term(w, c.clone());
            }
        }
        out
    }

    pub fn basis_element(&self, i: usize) -> BaseElement {
        BaseElement::monomial(&self.shape, self.elems[i].clone(), Scalar::one())
    }
}

/// The `(0, 0)` coordinate.
pub fn harish_chandra(x: &GwaElement, family: &BaseFamily) -> BaseElement {
    x.coefficient(0, 0).cloned().unwrap_or_else(|| BaseElement::zero(family))
}

/// `zeta` of finite support with `zeta_m - zeta_(m-k) = z0_m`.
fn funz_antidifference(k: i64, z0: &BTreeMap<i64, Scalar>) -> Result<BTreeMap<i64, Scalar>, String> {
    if z0.is_empty() {
        return Ok(BTreeMap::new());
    }
    if k == 0 {
        return Err("theta is the identity and z0 is nonzero".into());
    }
    let step = k.abs();
    let mut classes: BTreeMap<i64, Scalar> = BTreeMap::new();
    for (m, c) in z0 {
        let e = classes.entry(m.rem_euclid(step)).or_default();
        *e = &*e + c;
    }
    if let Some((r, s)) = classes.iter().find(|(_, s)| !s.is_zero()) {
        return Err(format!("z0 sums to {s} over the residue class {r} mod {step}"));
    }
    let lo = *z0.keys().next().unwrap();
    let hi = *z0.keys().next_back().unwrap();
    let mut zeta: BTreeMap<i64, Scalar> = BTreeMap::new();
    if k > 0 {
        // walk upward: zeta_m = zeta_(m-k) + z0_m
        for m in lo..=hi {
            let prev = zeta.get(&(m - k)).cloned().unwrap_or_default();
            let v = prev + z0.get(&m).cloned().unwrap_or_default();
            zeta.insert(m, v);
        }
    } else {
        // walk downward: zeta_m = zeta_(m+|k|) + z0_m
        for m in (lo..=hi).rev() {
            let prev = zeta.get(&(m + step)).cloned().unwrap_or_default();
            let v = prev + z0.get(&m).cloned().unwrap_or_default();
            zeta.insert(m, v);
        }
    }
    zeta.retain(|_, v| !v.is_zero());
    Ok(zeta)
}

fn truncation_basis(f: &BaseFamily, bound: u32) -> Vec<BaseElement> {
    let b = bound as i64;
    match f {
        BaseFamily::Poly => (0..=bound).map(|e| BaseElement::h().pow(e)).collect(),
        BaseFamily::FunZ => {
            std::iter::once(BaseElement::one(f)).chain((-b..=b).map(BaseElement::point)).collect()
        }
        BaseFamily::Group(s) => {
            let ranges: Vec<Vec<i64>> = (0..s.rank)
                .map(|_| (-b..=b).collect())
                .chain(s.torsion.iter().map(|&n| (0..n as i64).collect()))
                .collect();
            ranges
                .iter()
                .fold(vec![vec![]], |acc: Vec<Vec<i64>>, r| {
                    acc.into_iter().flat_map(|e| r.iter().map(move |&i| [e.clone(), vec![i]].concat())).collect()
                })
                .into_iter()
                .map(|g| BaseElement::monomial(s, g, Scalar::one()))
                .collect()
        }
    }
}

fn coordinate_terms(x: &BaseElement) -> Vec<(String, Scalar)> {
    match x {
        BaseElement::Poly(m) => m.iter().map(|(e, c)| (format!("h{e}"), c.clone())).collect(),
        BaseElement::Group { terms, .. } => terms.iter().map(|(g, c)| (format!("{g:?}"), c.clone())).collect(),
        BaseElement::FunZ { constant, support } => std::iter::once(("1".to_string(), constant.clone()))
            .filter(|(_, c)| !c.is_zero())
            .chain(support.iter().map(|(m, c)| (format!("t{m}"), c.clone())))
            .collect(),
    }
}

/// `f(x)` for a polynomial `f` in `h` and `x` in any family.
pub fn substitute(f: &BaseElement, x: &BaseElement) -> BaseElement {
    let fam = x.family();
    let terms = f.poly_terms();
    let top = terms.keys().next_back().copied().unwrap_or(0);
    (0..=top).rev().fold(BaseElement::zero(&fam), |acc, e| {
        let c = terms.get(&e).cloned().unwrap_or_default();
        &(&acc * x) + &BaseElement::constant(&fam, c)
    })
}

/// The catalog of named algebras.
impl TriangularGwa {
    /// The first Weyl algebra: `theta(h) = h - 1`, `z0 = z1 = 1`.
    pub fn weyl() -> Self {
        let f = BaseFamily::Poly;
        Self::new(f.clone(), shift_by(-1), BaseElement::one(&f), BaseElement::one(&f)).unwrap().named("weyl")
    }

    /// The dispin superalgebra: `theta(h) = h - 1`, `z0 = h`, `z1 = 1`.
    pub fn dispin() -> Self {
        Self::new(BaseFamily::Poly, shift_by(-1), BaseElement::h(), BaseElement::one(&BaseFamily::Poly))
            .unwrap()
            .named("dispin")
    }

    /// Generalized down-up algebra: `theta(h) = (h + gamma)/r`, `z0 = f/s`,
    /// `z1 = 1/s`.
    pub fn down_up(r: Scalar, gamma: Scalar, s: Scalar, f: BaseElement) -> Result<Self, GwaError> {
        let rinv = r.inv().map_err(|_| GwaError::Invalid("r must be nonzero".into()))?;
        let sinv = s.inv().map_err(|_| GwaError::Invalid("s must be nonzero".into()))?;
        if f.family() != BaseFamily::Poly {
            return Err(CartanError::FamilyMismatch.into());
        }
        let theta = Endo::PolyAffine { b: &gamma * &rinv, a: rinv };
        let z1 = BaseElement::constant(&BaseFamily::Poly, sinv.clone());
        Ok(Self::new(BaseFamily::Poly, theta, f.scale(&sinv), z1)?.named(format!("down-up({r},{gamma},{s},{f})")))
    }

    /// Smith's deformations of `U(sl_2)`, as `down-up(1, -1, 1, f)`.
    pub fn smith(f: BaseElement) -> Result<Self, GwaError> {
        let name = format!("smith({f})");
        Ok(Self::down_up(Scalar::one(), Scalar::int(-1), Scalar::one(), f)?.named(name))
    }

    /// `theta(h) = nu^-4 h + 1 + nu^-2`, `z0 = h/nu`, `z1 = nu^-2`.
    pub fn woronowicz(nu: Scalar) -> Result<Self, GwaError> {
        if nu.is_zero() || nu.pow(2).is_one() {
            return Err(GwaError::Invalid("nu must avoid 0 and +-1".into()));
        }
        let theta = Endo::PolyAffine { a: nu.pow(-4), b: Scalar::one() + nu.pow(-2) };
        let z1 = BaseElement::constant(&BaseFamily::Poly, nu.pow(-2));
        Ok(Self::new(BaseFamily::Poly, theta, BaseElement::h().scale(&nu.pow(-1)), z1)?.named(format!("woronowicz({nu})")))
    }

    /// The sl_2 quotient of the Jing-Zhang algebra: `theta(h) = q h - 2`,
    /// `z0 = h + (1 - q) h^2 / 4`, `z1 = q`.
    pub fn jing_zhang(q: Scalar) -> Result<Self, GwaError> {
        let f = BaseFamily::Poly;
        let h = BaseElement::h();
        let z0 = &h + &h.pow(2).scale(&((Scalar::one() - &q) / Scalar::int(4)));
        let z1 = BaseElement::constant(&f, q.clone());
        Ok(Self::new(f, Endo::PolyAffine { a: q.clone(), b: Scalar::int(-2) }, z0, z1)?.named(format!("jing-zhang({q})")))
    }

    /// Quantum GWA over a group algebra with `theta = rho(alpha)`.
    pub fn quantum_gwa(shape: GroupShape, alpha: Vec<Scalar>, z0: BaseElement, z1: BaseElement) -> Result<Self, GwaError> {
        let w = Weight::Group(alpha);
        let fam = BaseFamily::Group(shape);
        w.validate(&fam)?;
        let theta = crate::cartan::rho(&w)?;
        Ok(Self::new(fam, theta, z0, z1)?.named(format!("quantum-gwa({w})")))
    }

    /// `U_q(sl_2)`: `alpha(K) = q^2`, `z0 = (K - K^-1)/(q - q^-1)`, `z1 = 1`.
    pub fn uq_sl2() -> Self {
        let shape = GroupShape::new(1, vec![]).unwrap();
        let q = Scalar::q();
        let k = BaseElement::monomial(&shape, vec![1], Scalar::one());
        let kinv = BaseElement::monomial(&shape, vec![-1], Scalar::one());
        let z0 = (&k - &kinv).scale(&(&q - &q.pow(-1)).inv().unwrap());
        let fam = BaseFamily::Group(shape.clone());
        Self::quantum_gwa(shape, vec![q.pow(2)], z0, BaseElement::one(&fam)).unwrap().named("uq-sl2")
    }

    /// Continuous Hecke algebra of `GL(1)`: shift by one, `z0 = kappa`, `z1 = 1`.
    pub fn continuous_hecke_gl1(kappa: BaseElement) -> Result<Self, GwaError> {
        let name = format!("continuous-hecke-gl1({kappa})");
        Ok(Self::new(BaseFamily::FunZ, Endo::ZShift(1), kappa, BaseElement::one(&BaseFamily::FunZ))?.named(name))
    }

    /// The quantization `W_q(l, m, n)` of `down-up(1, gamma, s, f)`:
    /// `theta(K) = q^-l K`, `z0 = q^m K^n f(-(gamma/l)(K - 1)/(q - 1)) / s`,
    /// `z1 = 1/s`.
    pub fn wq(l: i64, m: i64, n: i64, s: Scalar, gamma: Scalar, f: BaseElement) -> Result<Self, GwaError> {
        if l == 0 {
            return Err(GwaError::Invalid("l must be nonzero".into()));
        }
        let sinv = s.inv().map_err(|_| GwaError::Invalid("s must be nonzero".into()))?;
        let shape = GroupShape::new(1, vec![]).unwrap();
        let fam = BaseFamily::Group(shape.clone());
        let q = Scalar::q();
        let k = BaseElement::monomial(&shape, vec![1], Scalar::one());
        let arg = (&k - &BaseElement::one(&fam)).scale(&(-(&gamma / &Scalar::int(l)) / (&q - &Scalar::one())));
        let z0 = (&BaseElement::monomial(&shape, vec![n], q.pow(m)) * &substitute(&f, &arg)).scale(&sinv);
        let theta = Endo::CharTwist(vec![q.pow(-l)]);
        let z1 = BaseElement::constant(&fam, sinv);
        Ok(Self::new(fam, theta, z0, z1)?.named(format!("wq({l},{m},{n},{s},{gamma},{f})")))
    }
}

fn shift_by(b: i64) -> Endo {
    Endo::PolyAffine { a: Scalar::one(), b: Scalar::int(b) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(cs: &[i64]) -> BaseElement {
        BaseElement::Poly(cs.iter().enumerate().map(|(e, c)| (e as u32, Scalar::int(*c))).collect()).pruned()
    }

    fn presets() -> Vec<TriangularGwa> {
        vec![
            TriangularGwa::weyl(),
            TriangularGwa::dispin(),
            TriangularGwa::smith(poly(&[0, 0, 1])).unwrap(),
            TriangularGwa::uq_sl2(),
            TriangularGwa::woronowicz(Scalar::q()).unwrap(),
            TriangularGwa::jing_zhang(Scalar::q()).unwrap(),
            TriangularGwa::down_up(Scalar::one(), Scalar::one(), Scalar::int(2), poly(&[1, 1])).unwrap(),
            TriangularGwa::continuous_hecke_gl1(&BaseElement::point(0) - &BaseElement::point(2)).unwrap(),
        ]
    }

    #[test]
    fn defining_relation() {
        let a = TriangularGwa::dispin();
        let ud = a.multiply(&a.u(), &a.d()).unwrap();
        let want = GwaElement::from_h(BaseElement::h()).add(&GwaElement::term(1, BaseElement::one(a.family()), 1));
        assert_eq!(ud, want);
        assert_eq!(ud.to_string(), "h + d*u");
    }

    #[test]
    fn u_past_h() {
        let a = TriangularGwa::dispin();
        let x = a.multiply(&a.u(), &GwaElement::from_h(poly(&[0, 0, 1]))).unwrap();
        assert_eq!(x, GwaElement::term(0, poly(&[1, -2, 1]), 1));
    }

    #[test]
    fn weyl_u2_d2() {
        let a = TriangularGwa::weyl();
        let x = a.multiply(&a.pow(&a.u(), 2).unwrap(), &a.pow(&a.d(), 2).unwrap()).unwrap();
        assert_eq!(x.to_string(), "2 + 4*d*u + d^2*u^2");
    }

    #[test]
    fn dispin_z_tilde_closed_form() {
        let a = TriangularGwa::dispin();
        for n in 0..10i64 {
            let want = &BaseElement::h().scale(&Scalar::int(n)) - &BaseElement::one(&BaseFamily::Poly).scale(&Scalar::ratio(n * (n - 1), 2));
            assert_eq!(a.z_tilde(n), want);
        }
        assert_eq!(a.z_tilde(1), *a.z0());
    }

    #[test]
    fn uq_z_tilde_two() {
        let a = TriangularGwa::uq_sl2();
        let q = Scalar::q();
        let BaseFamily::Group(s) = a.family().clone() else { panic!() };
        let c = (&q - &q.pow(-1)).inv().unwrap();
        let want = &BaseElement::monomial(&s, vec![1], (Scalar::one() + q.pow(-2)) * &c)
            - &BaseElement::monomial(&s, vec![-1], (Scalar::one() + q.pow(2)) * &c);
        assert_eq!(a.z_tilde(2), want);
    }

    #[test]
    fn weighted_recursion_matches_definition() {
        let cases: Vec<(TriangularGwa, Weight)> = vec![
            (TriangularGwa::dispin(), Weight::Poly(Scalar::ratio(3, 2))),
            (TriangularGwa::uq_sl2(), Weight::Group(vec![Scalar::q().pow(3)])),
            (TriangularGwa::jing_zhang(Scalar::q()).unwrap(), Weight::Poly(Scalar::int(5))),
            (TriangularGwa::down_up(Scalar::one(), Scalar::one(), Scalar::int(2), poly(&[1, 1])).unwrap(), Weight::Poly(Scalar::int(-3))),
            (TriangularGwa::continuous_hecke_gl1(&BaseElement::point(1) - &BaseElement::point(3)).unwrap(), Weight::ZPoint(0)),
        ];
        for (a, w) in cases {
            let fast = a.weighted_z_tilde(&w, 7).unwrap();
            for n in -7..=7i64 {
                assert_eq!(fast.at(n), &a.z_tilde(n).evaluate(&w).unwrap(), "{a} at {n}");
            }
        }
    }

    #[test]
    fn dispin_negative_side() {
        let a = TriangularGwa::dispin();
        let v = a.weighted_z_tilde(&Weight::Poly(Scalar::one()), 12).unwrap();
        for n in 1..=12i64 {
            assert_eq!(v.at(-n), &Scalar::ratio(n * (n + 3), 2));
        }
    }

    #[test]
    fn egwa_and_gram_diagonal() {
        for a in presets() {
            for n in 0..=6u32 {
                let dn = a.pow(&a.d(), n).unwrap();
                for m in 0..=n {
                    let x = a.multiply(&a.pow(&a.u(), m).unwrap(), &dn).unwrap();
                    let want = ((n - m)..n).fold(BaseElement::one(a.family()), |acc, j| &acc * &a.z_tilde(j as i64 + 1));
                    assert_eq!(x.coefficient(n - m, 0).cloned().unwrap_or_else(|| BaseElement::zero(a.family())), want);
                    assert!(x.terms().keys().all(|&(i, j)| (i, j) == (n - m, 0) || j > 0));
                    let gram = a.shapovalov(&a.pow(&a.d(), m).unwrap(), &dn).unwrap();
                    if m == n {
                        assert_eq!(gram, want);
                    } else {
                        assert!(gram.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn z_tilde_additivity() {
        for a in presets() {
            for m in 1..4i64 {
                for n in 1..4i64 {
                    let lhs = a.z_tilde(m + n);
                    let rhs = &(&a.z_tilde(m) * &a.theta_pow(m - 1, &a.z_prime(n as u32))) + &a.theta_pow(m, &a.z_tilde(n));
                    assert_eq!(lhs, rhs, "{a} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn dispin_casimir() {
        let a = TriangularGwa::dispin();
        let CasimirOutcome::Found { zeta, omega } = a.casimir().unwrap() else { panic!() };
        assert_eq!(zeta, poly(&[0, 1, 1]).scale(&Scalar::ratio(1, 2)));
        assert_eq!(&zeta - &a.theta_pow(1, &zeta), *a.z0());
        for g in [a.u(), a.d(), GwaElement::from_h(BaseElement::h())] {
            assert!(a.commutator(&omega, &g).unwrap().is_zero());
        }
    }

    #[test]
    fn uq_casimir() {
        let a = TriangularGwa::uq_sl2();
        let CasimirOutcome::Found { zeta, omega } = a.casimir().unwrap() else { panic!() };
        let q = Scalar::q();
        let BaseFamily::Group(s) = a.family().clone() else { panic!() };
        let c = (&q - &q.pow(-1)).inv().unwrap();
        let want = &BaseElement::monomial(&s, vec![1], &c / &(Scalar::one() - q.pow(-2)))
            - &BaseElement::monomial(&s, vec![-1], &c / &(Scalar::one() - q.pow(2)));
        assert_eq!(zeta, want);
        assert_eq!(&zeta - &a.theta_pow(1, &zeta), *a.z0());
        assert!(a.commutator(&omega, &a.u()).unwrap().is_zero());
        assert!(a.commutator(&omega, &a.d()).unwrap().is_zero());
    }

    #[test]
    fn casimir_failures() {
        let s = GroupShape::new(2, vec![]).unwrap();
        let fam = BaseFamily::Group(s.clone());
        let z0 = BaseElement::monomial(&s, vec![0, 1], Scalar::one());
        let a = TriangularGwa::new(fam.clone(), Endo::CharTwist(vec![Scalar::q().pow(2), Scalar::one()]), z0, BaseElement::one(&fam)).unwrap();
        assert!(matches!(a.casimir().unwrap(), CasimirOutcome::NotInImage { .. }));
        let j = TriangularGwa::jing_zhang(Scalar::q()).unwrap();
        assert_eq!(j.casimir().unwrap_err(), GwaError::PreconditionZ1);
        let h = TriangularGwa::continuous_hecke_gl1(BaseElement::point(0)).unwrap();
        assert!(matches!(h.casimir().unwrap(), CasimirOutcome::NotInImage { .. }));
        let h = TriangularGwa::continuous_hecke_gl1(&BaseElement::point(0) - &BaseElement::point(2)).unwrap();
        let CasimirOutcome::Found { zeta, omega } = h.casimir().unwrap() else { panic!() };
        assert_eq!(&zeta - &h.theta_pow(1, &zeta), *h.z0());
        assert!(h.commutator(&omega, &h.u()).unwrap().is_zero());
        assert!(h.commutator(&omega, &h.d()).unwrap().is_zero());
    }

    #[test]
    fn center() {
        let r = TriangularGwa::dispin().center_in_h(6);
        assert_eq!(r.kind, CenterKind::Constants);
        assert!(r.verified);
        let s = GroupShape::new(2, vec![]).unwrap();
        let fam = BaseFamily::Group(s.clone());
        let a = TriangularGwa::new(fam.clone(), Endo::CharTwist(vec![Scalar::q().pow(2), Scalar::one()]), BaseElement::one(&fam), BaseElement::one(&fam)).unwrap();
        let r = a.center_in_h(3);
        assert!(r.verified);
        let want: Vec<BaseElement> = (-3..=3).map(|m| BaseElement::monomial(&s, vec![0, m], Scalar::one())).collect();
        assert_eq!(r.basis, want);
        let id = TriangularGwa::with_finite_order(BaseFamily::Poly, shift_by(0), BaseElement::h(), BaseElement::h()).unwrap();
        let r = id.center_in_h(4);
        assert_eq!((r.kind, r.basis.len(), r.verified), (CenterKind::All, 5, true));
        let refl = TriangularGwa::with_finite_order(BaseFamily::Poly, Endo::PolyAffine { a: Scalar::int(-1), b: Scalar::int(2) }, BaseElement::h(), BaseElement::h()).unwrap();
        let r = refl.center_in_h(6);
        assert_eq!(r.basis.len(), 4);
        assert!(r.verified);
        let h = TriangularGwa::continuous_hecke_gl1(BaseElement::point(0)).unwrap().center_in_h(3);
        assert!(h.verified);
    }

    #[test]
    fn finite_order_rejected_by_default() {
        let s = GroupShape::new(0, vec![3]).unwrap();
        let fam = BaseFamily::Group(s);
        assert_eq!(
            TriangularGwa::new(fam.clone(), Endo::CharTwist(vec![Scalar::one()]), BaseElement::one(&fam), BaseElement::one(&fam)).unwrap_err(),
            GwaError::FiniteOrder(1)
        );
    }

    #[test]
    fn wq_classical_data() {
        let a = TriangularGwa::wq(2, 0, 0, Scalar::one(), Scalar::int(-1), BaseElement::h()).unwrap();
        // f = h gives z0 = (K - 1)/(2(q - 1))
        let BaseFamily::Group(s) = a.family().clone() else { panic!() };
        let c = (Scalar::int(2) * (Scalar::q() - Scalar::one())).inv().unwrap();
        let want = &BaseElement::monomial(&s, vec![1], c.clone()) - &BaseElement::monomial(&s, vec![0], c);
        assert_eq!(*a.z0(), want);
    }

    fn element(a: &TriangularGwa, seed: &[(u32, i64, u32)]) -> GwaElement {
        seed.iter().fold(GwaElement::zero(), |acc, &(m, c, n)| {
            let h = match a.family() {
                BaseFamily::Poly => poly(&[c, 1]),
                BaseFamily::Group(s) => BaseElement::monomial(s, vec![c], Scalar::one()),
                BaseFamily::FunZ => &BaseElement::point(c) + &BaseElement::one(&BaseFamily::FunZ),
            };
            acc.add(&GwaElement::term(m, h, n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn associative_and_anti_involutive(
            which in 0usize..8,
            x in prop::collection::vec((0u32..3, -2i64..3, 0u32..3), 1..3),
            y in prop::collection::vec((0u32..3, -2i64..3, 0u32..3), 1..3),
            z in prop::collection::vec((0u32..3, -2i64..3, 0u32..3), 1..3),
        ) {
            let a = &presets()[which];
            let (x, y, z) = (element(a, &x), element(a, &y), element(a, &z));
            let xy = a.multiply(&x, &y).unwrap();
            prop_assert_eq!(a.multiply(&xy, &z).unwrap(), a.multiply(&x, &a.multiply(&y, &z).unwrap()).unwrap());
            prop_assert_eq!(a.anti_involution(&xy), a.multiply(&a.anti_involution(&y), &a.anti_involution(&x)).unwrap());
            prop_assert_eq!(a.multiply(&a.one(), &x).unwrap(), x.clone());
            prop_assert_eq!(a.anti_involution(&a.anti_involution(&x)), x);
        }
    }
}
