//! Diamond-lemma rewriting for finitely presented associative algebras.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("normal form not reached within {0} reduction steps")]
    StepCapExceeded(usize),
    #[error("more than {0} overlap ambiguities")]
    AmbiguityCapExceeded(usize),
    #[error("rule {lhs} -> {rhs}: monomial {monomial} is not smaller than the left-hand side")]
    OrderViolation { lhs: String, rhs: String, monomial: String },
    #[error("two rules share the left-hand side {0}")]
    DuplicateLhs(String),
    #[error("theta is not an algebra automorphism of H: {0}")]
    NotAnAutomorphism(String),
    #[error("no basis element of H acts as the unit")]
    UnitMissing,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Word = Vec<usize>;

/// Linear combination of words; the empty word is the unit.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FreePoly(pub BTreeMap<Word, Scalar>);

impl FreePoly {
    pub fn zero() -> Self {
        FreePoly::default()
    }

    pub fn word(w: Word) -> Self {
        Self::term(w, Scalar::one())
    }

    pub fn term(w: Word, c: Scalar) -> Self {
        let mut p = FreePoly::zero();
        p.add_term(w, c);
        p
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(w.clone()).or_insert_with(Scalar::zero);
        *e = &*e + &c;
        if e.is_zero() {
            self.0.remove(&w);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &FreePoly) -> FreePoly {
        let mut out = self.clone();
        for (w, c) in &o.0 {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &FreePoly) -> FreePoly {
        self.add(&o.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> FreePoly {
        let mut out = FreePoly::zero();
        for (w, x) in &self.0 {
            out.add_term(w.clone(), x * c);
        }
        out
    }

    /// Concatenation product in the free algebra.
    pub fn mul(&self, o: &FreePoly) -> FreePoly {
        let mut out = FreePoly::zero();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                out.add_term([a.as_slice(), b].concat(), x * y);
            }
        }
        out
    }

    pub fn render(&self, names: &[String]) -> String {
        crate::cartan::render_sum(self.0.iter().map(|(w, c)| (c.clone(), render_word(w, names))))
    }
}

pub fn render_word(w: &[usize], names: &[String]) -> String {
    w.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join(".")
}

/// Monomial order on words.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum WordOrder {
    /// Length first, then lexicographic by generator index.
    LengthLex,
    /// Weighted degree first, then the subword of positive-weight letters
    /// compared lexicographically, then length-lex.
    Graded(Vec<u32>),
}

impl WordOrder {
    pub fn cmp(&self, a: &[usize], b: &[usize]) -> Ordering {
        let length_lex = || a.len().cmp(&b.len()).then_with(|| a.cmp(b));
        match self {
            WordOrder::LengthLex => length_lex(),
            WordOrder::Graded(wt) => {
                let deg = |w: &[usize]| w.iter().map(|&i| wt[i] as u64).sum::<u64>();
                let heavy = |w: &[usize]| w.iter().copied().filter(|&i| wt[i] > 0).collect::<Vec<_>>();
                deg(a).cmp(&deg(b)).then_with(|| heavy(a).cmp(&heavy(b))).then_with(length_lex)
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: FreePoly,
}

/// Which redex to contract first.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    /// Leftmost occurrence of the largest applicable left-hand side.
    LeftmostLargest,
    /// Rightmost occurrence of any left-hand side.
    Rightmost,
}

#[derive(Clone, Debug)]
pub struct Presentation {
    generators: Vec<String>,
    rules: Vec<Rule>,
    order: WordOrder,
    inclusions: Vec<(usize, usize)>,
}

/// Result of a confluence check.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum ConfluenceVerdict {
    Confluent { ambiguities: usize },
    NotConfluent { ambiguity: String, nf_left: String, nf_right: String, difference: String },
    /// A left-hand side occurs inside another one.
    InclusionAmbiguity { inner: String, outer: String },
}

fn occurs_at(word: &[usize], pat: &[usize]) -> Vec<usize> {
    if pat.len() > word.len() {
        return vec![];
    }
    (0..=word.len() - pat.len()).filter(|&i| &word[i..i + pat.len()] == pat).collect()
}

impl Presentation {
    /// Validates order compatibility and lhs uniqueness; inclusion
    /// ambiguities are recorded and surfaced by [`Self::check_confluence`].
    pub fn new(generators: Vec<String>, rules: Vec<Rule>, order: WordOrder) -> Result<Self, RewriteError> {
        for (i, r) in rules.iter().enumerate() {
            if rules[..i].iter().any(|s| s.lhs == r.lhs) {
                return Err(RewriteError::DuplicateLhs(render_word(&r.lhs, &generators)));
            }
            for w in r.rhs.0.keys() {
                if order.cmp(w, &r.lhs) != Ordering::Less {
                    return Err(RewriteError::OrderViolation {
                        lhs: render_word(&r.lhs, &generators),
                        rhs: r.rhs.render(&generators),
                        monomial: render_word(w, &generators),
                    });
                }
            }
        }
        let mut inclusions = Vec::new();
        for (i, a) in rules.iter().enumerate() {
            for (j, b) in rules.iter().enumerate() {
                if i != j && !occurs_at(&b.lhs, &a.lhs).is_empty() {
                    inclusions.push((i, j));
                }
            }
        }
        Ok(Presentation { generators, rules, order, inclusions })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn order(&self) -> &WordOrder {
        &self.order
    }

    /// Pairs `(inner, outer)` of rules whose lhs is a factor of another.
    pub fn inclusions(&self) -> &[(usize, usize)] {
        &self.inclusions
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    fn redex(&self, w: &[usize], strategy: Strategy) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for (ri, r) in self.rules.iter().enumerate() {
            for pos in occurs_at(w, &r.lhs) {
                let better = match (strategy, best) {
                    (_, None) => true,
                    (Strategy::LeftmostLargest, Some((bp, br))) => {
                        match self.order.cmp(&r.lhs, &self.rules[br].lhs) {
                            Ordering::Greater => true,
                            Ordering::Equal => pos < bp,
                            Ordering::Less => false,
                        }
                    }
                    (Strategy::Rightmost, Some((bp, _))) => pos > bp,
                };
                if better {
                    best = Some((pos, ri));
                }
            }
        }
        best
    }

    /// Reduces `w` once at the chosen redex, or returns `None` if irreducible.
    pub fn reduce_word(&self, w: &[usize], strategy: Strategy) -> Option<FreePoly> {
        let (pos, ri) = self.redex(w, strategy)?;
        let r = &self.rules[ri];
        let (pre, post) = (&w[..pos], &w[pos + r.lhs.len()..]);
        let mut out = FreePoly::zero();
        for (m, c) in &r.rhs.0 {
            out.add_term([pre, m.as_slice(), post].concat(), c.clone());
        }
        Some(out)
    }

    pub fn is_irreducible(&self, w: &[usize]) -> bool {
        self.rules.iter().all(|r| occurs_at(w, &r.lhs).is_empty())
    }

    pub fn normal_form(&self, f: &FreePoly, step_cap: usize) -> Result<FreePoly, RewriteError> {
        self.normal_form_with(f, step_cap, Strategy::LeftmostLargest)
    }

    pub fn normal_form_with(&self, f: &FreePoly, step_cap: usize, strategy: Strategy) -> Result<FreePoly, RewriteError> {
        let mut pending = f.clone();
        let mut done = FreePoly::zero();
        let mut steps = 0;
        while let Some((w, c)) = pending.0.pop_last() {
            match self.reduce_word(&w, strategy) {
                None => done.add_term(w, c),
                Some(r) => {
                    steps += 1;
                    if steps > step_cap {
                        return Err(RewriteError::StepCapExceeded(step_cap));
                    }
                    for (m, x) in r.0 {
                        pending.add_term(m, &x * &c);
                    }
                }
            }
        }
        Ok(done)
    }

    /// Words `ABC` with `AB` and `BC` both left-hand sides, with the two
    /// one-step resolutions.
    pub fn overlap_ambiguities(&self) -> Vec<(Word, FreePoly, FreePoly)> {
        let mut out = Vec::new();
        for a in &self.rules {
            for b in &self.rules {
                for k in 1..a.lhs.len().min(b.lhs.len()) {
                    if a.lhs[a.lhs.len() - k..] != b.lhs[..k] {
                        continue;
                    }
                    let tail = &b.lhs[k..];
                    let head = &a.lhs[..a.lhs.len() - k];
                    let word = [a.lhs.as_slice(), tail].concat();
                    let left = a.rhs.mul(&FreePoly::word(tail.to_vec()));
                    let right = FreePoly::word(head.to_vec()).mul(&b.rhs);
                    out.push((word, left, right));
                }
            }
        }
        out
    }

    pub fn check_confluence(&self, ambiguity_cap: usize, step_cap: usize) -> Result<ConfluenceVerdict, RewriteError> {
        if let Some(&(i, j)) = self.inclusions.first() {
            return Ok(ConfluenceVerdict::InclusionAmbiguity {
                inner: render_word(&self.rules[i].lhs, &self.generators),
                outer: render_word(&self.rules[j].lhs, &self.generators),
            });
        }
        let amb = self.overlap_ambiguities();
        if amb.len() > ambiguity_cap {
            return Err(RewriteError::AmbiguityCapExceeded(ambiguity_cap));
        }
        let results: Vec<Result<Option<ConfluenceVerdict>, RewriteError>> = amb
            .par_iter()
            .map(|(w, l, r)| {
                let nl = self.normal_form(l, step_cap)?;
                let nr = self.normal_form(r, step_cap)?;
                Ok((nl != nr).then(|| ConfluenceVerdict::NotConfluent {
                    ambiguity: render_word(w, &self.generators),
                    nf_left: nl.render(&self.generators),
                    nf_right: nr.render(&self.generators),
                    difference: nl.sub(&nr).render(&self.generators),
                }))
            })
            .collect();
        for r in results {
            if let Some(v) = r? {
                return Ok(v);
            }
        }
        Ok(ConfluenceVerdict::Confluent { ambiguities: amb.len() })
    }

    /// Length plus number of inversions with respect to the generator order.
    pub fn misordering_index(w: &[usize]) -> usize {
        let inv = (0..w.len()).flat_map(|i| (i + 1..w.len()).map(move |j| (i, j))).filter(|&(i, j)| w[i] > w[j]).count();
        w.len() + inv
    }

    /// Parses a word of `.`-joined generator names; `1` is the empty word.
    pub fn parse_word(&self, s: &str) -> Option<Word> {
        let s = s.trim();
        if s == "1" {
            return Some(vec![]);
        }
        s.split('.').map(|g| self.generator_index(g.trim())).collect()
    }

    /// Parses `c*w + c*w - ...` with rational or parenthesized coefficients.
    pub fn parse_poly(&self, s: &str) -> Option<FreePoly> {
        parse_free_poly(s, &|w| self.parse_word(w))
    }

    /// Text format: an `order: g1 < g2 < ...` line, then `word -> poly` rules.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, RewriteError> {
        let mut generators: Option<Vec<String>> = None;
        let mut raw = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| RewriteError::Parse { line: n + 1, msg: msg.into() };
            if let Some(rest) = line.strip_prefix("order:") {
                generators = Some(rest.split('<').map(|g| g.trim().to_string()).collect());
                continue;
            }
            let (l, r) = line.split_once("->").ok_or_else(|| err("expected `lhs -> rhs`"))?;
            let gens = generators.as_ref().ok_or_else(|| err("rules must follow an `order:` line"))?;
            let probe = Presentation { generators: gens.clone(), rules: vec![], order: WordOrder::LengthLex, inclusions: vec![] };
            let lhs = probe.parse_word(l).ok_or_else(|| err("unknown generator in lhs"))?;
            let rhs = probe.parse_poly(r).ok_or_else(|| err("malformed rhs"))?;
            raw.push(Rule { lhs, rhs });
        }
        let generators = generators.ok_or(RewriteError::Parse { line: 0, msg: "missing `order:` line".into() })?;
        Presentation::new(generators, raw, WordOrder::LengthLex)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("order: {}\n", self.generators.join(" < "));
        for r in &self.rules {
            s.push_str(&format!("{} -> {}\n", render_word(&r.lhs, &self.generators), r.rhs.render(&self.generators)));
        }
        s
    }
}

fn split_terms(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    let mut neg = false;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == '+' || ch == '-') {
            if !cur.trim().is_empty() {
                out.push((neg, cur.trim().to_string()));
            }
            neg = ch == '-';
            cur.clear();
            continue;
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push((neg, cur.trim().to_string()));
    }
    out
}

fn parse_free_poly(s: &str, word: &dyn Fn(&str) -> Option<Word>) -> Option<FreePoly> {
    let mut p = FreePoly::zero();
    if s.trim() == "0" {
        return Some(p);
    }
    for (neg, t) in split_terms(s) {
        let (c, w) = match t.split_once('*') {
            Some((c, w)) => (crate::expr::parse_scalar(c).ok()?, word(w)?),
            None => match crate::expr::parse_scalar(&t) {
                Ok(c) => (c, vec![]),
                Err(_) => (Scalar::one(), word(&t)?),
            },
        };
        p.add_term(w, if neg { -c } else { c });
    }
    Some(p)
}

/// A finite-dimensional algebra given by structure constants on a basis.
#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    pub names: Vec<String>,
    /// `table[i][j]` is the coordinate vector of `b_i * b_j`.
    pub table: Vec<Vec<Vec<Scalar>>>,
}

fn basis_vec(n: usize, i: usize) -> Vec<Scalar> {
    (0..n).map(|k| if k == i { Scalar::one() } else { Scalar::zero() }).collect()
}

impl FiniteAlgebra {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn mul(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let n = self.dim();
        let mut out = vec![Scalar::zero(); n];
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let ab = a * b;
                for (k, c) in self.table[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] = &out[k] + &(&ab * c);
                    }
                }
            }
        }
        out
    }

    /// Index of the basis element acting as a two-sided unit.
    pub fn unit(&self) -> Option<usize> {
        let n = self.dim();
        (0..n).find(|&e| (0..n).all(|j| self.table[e][j] == basis_vec(n, j) && self.table[j][e] == basis_vec(n, j)))
    }

    pub fn is_central(&self, z: &[Scalar]) -> bool {
        (0..self.dim()).all(|i| {
            let b = basis_vec(self.dim(), i);
            self.mul(z, &b) == self.mul(&b, z)
        })
    }

    /// `F[Z/n_1 x ... x Z/n_t]` with basis the group elements, identity first.
    pub fn group_algebra(orders: &[u64]) -> Self {
        let elems: Vec<Vec<u64>> = orders.iter().fold(vec![vec![]], |acc, &n| {
            acc.into_iter().flat_map(|e| (0..n).map(move |i| [e.clone(), vec![i]].concat())).collect()
        });
        let index = |g: &[u64]| elems.iter().position(|e| e == g).unwrap();
        let n = elems.len();
        let table = elems
            .iter()
            .map(|a| {
                elems
                    .iter()
                    .map(|b| {
                        let ab: Vec<u64> = a.iter().zip(b).zip(orders).map(|((x, y), m)| (x + y) % m).collect();
                        basis_vec(n, index(&ab))
                    })
                    .collect()
            })
            .collect();
        let names = elems
            .iter()
            .map(|e| {
                if e.iter().all(|&x| x == 0) {
                    return "1".to_string();
                }
                let parts: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(i, &x)| {
                        let g = if orders.len() == 1 { "g".to_string() } else { format!("g{}", i + 1) };
                        if x == 1 { g } else { format!("{g}^{x}") }
                    })
                    .collect();
                parts.join("*")
            })
            .collect();
        FiniteAlgebra { names, table }
    }

    /// 2x2 matrices with basis `1, e11, e12, e21` (so `e22 = 1 - e11`).
    pub fn matrix_units() -> Self {
        // coordinates of the four matrix units in the basis (1, e11, e12, e21)
        let e = |i: usize, j: usize| -> Vec<Scalar> {
            let s = |v: [i64; 4]| v.iter().map(|&x| Scalar::int(x)).collect::<Vec<_>>();
            match (i, j) {
                (1, 1) => s([0, 1, 0, 0]),
                (1, 2) => s([0, 0, 1, 0]),
                (2, 1) => s([0, 0, 0, 1]),
                _ => s([1, -1, 0, 0]),
            }
        };
        // matrix unit products, expressed in the basis
        let prod_units = |a: (usize, usize), b: (usize, usize)| -> Vec<Scalar> {
            if a.1 == b.0 { e(a.0, b.1) } else { vec![Scalar::zero(); 4] }
        };
        let add = |x: Vec<Scalar>, y: Vec<Scalar>| x.iter().zip(&y).map(|(a, b)| a + b).collect::<Vec<_>>();
        // each basis element as a combination of matrix units
        let basis: [Vec<((usize, usize), i64)>; 4] = [
            vec![((1, 1), 1), ((2, 2), 1)],
            vec![((1, 1), 1)],
            vec![((1, 2), 1)],
            vec![((2, 1), 1)],
        ];
        let table = basis
            .iter()
            .map(|x| {
                basis
                    .iter()
                    .map(|y| {
                        let mut acc = vec![Scalar::zero(); 4];
                        for (a, ca) in x {
                            for (b, cb) in y {
                                let p: Vec<Scalar> = prod_units(*a, *b).iter().map(|v| v * Scalar::int(ca * cb)).collect();
                                acc = add(acc, p);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        FiniteAlgebra { names: ["1", "e11", "e12", "e21"].map(String::from).to_vec(), table }
    }

    /// Coordinates of a `+`-separated combination of basis names.
    pub fn parse_element(&self, s: &str) -> Option<Vec<Scalar>> {
        let p = parse_free_poly(s, &|w| {
            let w = w.trim();
            self.names.iter().position(|n| n == w).map(|i| vec![i])
        })?;
        let mut v = vec![Scalar::zero(); self.dim()];
        for (w, c) in p.0 {
            let i = match w.as_slice() {
                [] => self.unit()?,
                [i] => *i,
                _ => return None,
            };
            v[i] = &v[i] + &c;
        }
        Some(v)
    }
}

/// Checks that `theta` (columns `theta[i]` = image of `b_i`) is an algebra
/// automorphism.
pub fn check_automorphism(h: &FiniteAlgebra, theta: &[Vec<Scalar>]) -> Result<(), RewriteError> {
    let n = h.dim();
    let unit = h.unit().ok_or(RewriteError::UnitMissing)?;
    if theta.len() != n || theta.iter().any(|c| c.len() != n) {
        return Err(RewriteError::NotAnAutomorphism("matrix has the wrong size".into()));
    }
    let apply = |x: &[Scalar]| -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); n];
        for (i, a) in x.iter().enumerate() {
            for (k, c) in theta[i].iter().enumerate() {
                out[k] = &out[k] + &(a * c);
            }
        }
        out
    };
    if theta[unit] != basis_vec(n, unit) {
        return Err(RewriteError::NotAnAutomorphism("the unit is not fixed".into()));
    }
    if linalg::rank(theta) != n {
        return Err(RewriteError::NotAnAutomorphism("not invertible".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if apply(&h.table[i][j]) != h.mul(&theta[i], &theta[j]) {
                return Err(RewriteError::NotAnAutomorphism(format!(
                    "theta({} * {}) differs from theta({}) * theta({})",
                    h.names[i], h.names[j], h.names[i], h.names[j]
                )));
            }
        }
    }
    Ok(())
}

/// The reduction system of `W(H, theta, z0, z1)` for finite-dimensional `H`.
///
/// Generators are `d`, the non-unit basis elements, `u`; the unit of `H` is
/// the empty word. When `z1` is not a scalar the rule `ud -> z0 + d z1 u`
/// lengthens words, so a graded order is used instead of length-lex.
pub fn gwa_presentation(
    h: &FiniteAlgebra,
    theta: &[Vec<Scalar>],
    z0: &[Scalar],
    z1: &[Scalar],
) -> Result<Presentation, RewriteError> {
    check_automorphism(h, theta)?;
    let unit = h.unit().ok_or(RewriteError::UnitMissing)?;
    let n = h.dim();
    let hidx: Vec<usize> = (0..n).filter(|&i| i != unit).collect();
    let mut generators = vec!["d".to_string()];
    generators.extend(hidx.iter().map(|&i| h.names[i].clone()));
    generators.push("u".into());
    let (d, u) = (0, hidx.len() + 1);
    let gen_of = |i: usize| hidx.iter().position(|&j| j == i).map(|p| p + 1);
    let to_poly = |v: &[Scalar]| {
        let mut p = FreePoly::zero();
        for (i, c) in v.iter().enumerate() {
            p.add_term(gen_of(i).map_or(vec![], |g| vec![g]), c.clone());
        }
        p
    };
    let mut rules = Vec::new();
    for &i in &hidx {
        for &j in &hidx {
            rules.push(Rule { lhs: vec![gen_of(i).unwrap(), gen_of(j).unwrap()], rhs: to_poly(&h.table[i][j]) });
        }
    }
    for &i in &hidx {
        let img = to_poly(&theta[i]);
        rules.push(Rule { lhs: vec![u, gen_of(i).unwrap()], rhs: img.mul(&FreePoly::word(vec![u])) });
    }
    for &i in &hidx {
        let img = to_poly(&theta[i]);
        rules.push(Rule { lhs: vec![gen_of(i).unwrap(), d], rhs: FreePoly::word(vec![d]).mul(&img) });
    }
    let middle = FreePoly::word(vec![d]).mul(&to_poly(z1)).mul(&FreePoly::word(vec![u]));
    rules.push(Rule { lhs: vec![u, d], rhs: to_poly(z0).add(&middle) });
    let scalar_z1 = z1.iter().enumerate().all(|(i, c)| i == unit || c.is_zero());
    let order = if scalar_z1 {
        WordOrder::LengthLex
    } else {
        let mut wt = vec![0; generators.len()];
        wt[d] = 1;
        wt[u] = 1;
        WordOrder::Graded(wt)
    };
    Presentation::new(generators, rules, order)
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Vec<Vec<Scalar>> {
        (0..n).map(|i| basis_vec(n, i)).collect()
    }

    fn weyl() -> Presentation {
        Presentation::parse("order: d < u\nu.d -> 1 + d.u\n").unwrap()
    }

    #[test]
    fn weyl_normal_form() {
        let p = weyl();
        let w = p.parse_poly("u.d.d").unwrap();
        assert_eq!(p.normal_form(&w, 100).unwrap(), p.parse_poly("2*d + d.d.u").unwrap());
        assert_eq!(p.normal_form(&FreePoly::word(vec![]), 10).unwrap(), FreePoly::word(vec![]));
    }

    #[test]
    fn single_rule_without_overlaps() {
        let p = Presentation::parse("order: a < b < c\na.b -> c\n").unwrap();
        assert_eq!(p.check_confluence(10, 10).unwrap(), ConfluenceVerdict::Confluent { ambiguities: 0 });
    }

    #[test]
    fn order_violation_rejected() {
        assert!(matches!(Presentation::parse("order: a < b\na.b -> b.a\n"), Err(RewriteError::OrderViolation { .. })));
    }

    #[test]
    fn inclusion_ambiguity_reported() {
        let p = Presentation::parse("order: a < b < c\na.b.c -> a\nb -> a\n").unwrap();
        assert!(matches!(p.check_confluence(10, 10).unwrap(), ConfluenceVerdict::InclusionAmbiguity { .. }));
    }

    #[test]
    fn step_cap_guards() {
        let p = weyl();
        let w = p.parse_poly("u.u.u.d.d.d").unwrap();
        assert_eq!(p.normal_form(&w, 2), Err(RewriteError::StepCapExceeded(2)));
    }

    #[test]
    fn cyclic_group_presentation_shape() {
        let h = FiniteAlgebra::group_algebra(&[3]);
        // theta(g) = g^2
        let theta = vec![basis_vec(3, 0), basis_vec(3, 2), basis_vec(3, 1)];
        let one = basis_vec(3, 0);
        let p = gwa_presentation(&h, &theta, &one, &one).unwrap();
        assert_eq!(p.generators().len(), 4);
        assert_eq!(p.rules().len(), 4 + 2 * 2 + 1);
        assert!(matches!(p.check_confluence(1000, 1000).unwrap(), ConfluenceVerdict::Confluent { .. }));
    }

    #[test]
    fn one_dimensional_h_is_weyl() {
        let h = FiniteAlgebra { names: vec!["1".into()], table: vec![vec![vec![Scalar::one()]]] };
        let p = gwa_presentation(&h, &identity(1), &[Scalar::one()], &[Scalar::one()]).unwrap();
        assert_eq!(p.to_text(), weyl().to_text());
    }

    #[test]
    fn z5_trivial_theta_is_confluent() {
        let h = FiniteAlgebra::group_algebra(&[5]);
        let p = gwa_presentation(&h, &identity(5), &basis_vec(5, 0), &basis_vec(5, 0)).unwrap();
        assert!(matches!(p.check_confluence(10_000, 10_000).unwrap(), ConfluenceVerdict::Confluent { .. }));
    }

    #[test]
    fn matrix_units_fail_at_u_e12_d() {
        let h = FiniteAlgebra::matrix_units();
        let e11 = h.parse_element("e11").unwrap();
        let one = h.parse_element("1").unwrap();
        let p = gwa_presentation(&h, &identity(4), &e11, &one).unwrap();
        match p.check_confluence(10_000, 10_000).unwrap() {
            ConfluenceVerdict::NotConfluent { ambiguity, difference, .. } => {
                assert_eq!(ambiguity, "u.e12.d");
                assert!(difference == "e12" || difference == "-e12", "{difference}");
            }
            v => panic!("expected failure, got {v:?}"),
        }
        let w = p.parse_poly("u.e12.d").unwrap();
        let a = p.normal_form_with(&w, 100, Strategy::LeftmostLargest).unwrap();
        let b = p.normal_form_with(&w, 100, Strategy::Rightmost).unwrap();
        let mut got = [a.render(p.generators()), b.render(p.generators())];
        got.sort();
        assert_eq!(got, ["d.e12.u".to_string(), "d.e12.u + e12".to_string()]);
    }

    #[test]
    fn matrix_units_multiply_correctly() {
        let h = FiniteAlgebra::matrix_units();
        let v = |s: &str| h.parse_element(s).unwrap();
        assert_eq!(h.unit(), Some(0));
        assert_eq!(h.mul(&v("e21"), &v("e12")), v("1 - e11"));
        assert_eq!(h.mul(&v("e12"), &v("e21")), v("e11"));
        assert!(!h.is_central(&v("e11")));
        assert!(h.is_central(&v("3")));
    }

    #[test]
    fn non_automorphisms_rejected() {
        let h = FiniteAlgebra::group_algebra(&[3]);
        let mut theta = identity(3);
        theta[1] = basis_vec(3, 0);
        let one = basis_vec(3, 0);
        assert!(matches!(gwa_presentation(&h, &theta, &one, &one), Err(RewriteError::NotAnAutomorphism(_))));
        let no_unit = FiniteAlgebra { names: vec!["e".into()], table: vec![vec![vec![Scalar::zero()]]] };
        assert_eq!(
            gwa_presentation(&no_unit, &identity(1), &[Scalar::zero()], &[Scalar::zero()]).unwrap_err(),
            RewriteError::UnitMissing
        );
    }

    #[test]
    fn misordering_index_decreases_on_scalar_z1_rules() {
        let h = FiniteAlgebra::group_algebra(&[2, 2]);
        let theta = identity(4);
        let z = h.parse_element("1 + 2*g1").unwrap();
        let p = gwa_presentation(&h, &theta, &z, &basis_vec(4, 0)).unwrap();
        for r in p.rules() {
            for w in r.rhs.0.keys() {
                assert!(Presentation::misordering_index(w) < Presentation::misordering_index(&r.lhs));
            }
        }
    }
}
