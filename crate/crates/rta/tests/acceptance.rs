//! The twelve acceptance criteria, each at its tolerance and time limit.
//!
//! Every criterion prints one `PASS`/`FAIL` line. Random instances are drawn
//! from a ChaCha stream seeded by `RTA_SEED` (default 20241019).

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rta::cartan::{apply_endo, dual_act, is_free, BaseElement, BaseFamily, Endo, FreeVerdict, GroupShape, Weight};
use rta::cat_o::{
    block_report, downup_free_set, finiteness_certificate, polyexp_solve, quantum_closed_form, tensor_block, verma_report,
    Certification, FreeSet, Finiteness, PolyExpProblem, DEFAULT_WINDOW,
};
use rta::cli::classical_limit;
use rta::gwa::{CasimirOutcome, GwaElement, TriangularGwa};
use rta::rewrite::{gwa_presentation, ConfluenceVerdict, FiniteAlgebra, FreePoly};
use rta::rtm::{self, check_cocycles, classify, AZeta, GroupEl, Lattice, Rtm, Sampled};
use rta::scalar::Scalar;

type Check = Result<(), String>;

fn rng(salt: u64) -> ChaCha8Rng {
    let seed = std::env::var("RTA_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20241019u64);
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn q() -> Scalar {
    Scalar::q()
}

/// `[n]_q = (q^n - q^-n)/(q - q^-1)`.
fn qint(n: i64) -> Scalar {
    &(&q().pow(n) - &q().pow(-n)) / &(&q() - &q().pow(-1))
}

fn random_rat(r: &mut ChaCha8Rng, bound: i64) -> Scalar {
    let mut n = r.gen_range(-bound..=bound);
    if n == 0 {
        n = 1;
    }
    Scalar::ratio(n, r.gen_range(1..=bound))
}

/// Presets shared by the Gram-diagonal and `u^m d^n` criteria.
fn gram_presets() -> Vec<TriangularGwa> {
    let h = BaseElement::h();
    vec![
        TriangularGwa::weyl(),
        TriangularGwa::dispin(),
        TriangularGwa::smith(h.pow(2)).unwrap(),
        TriangularGwa::uq_sl2(),
        TriangularGwa::woronowicz(q()).unwrap(),
        TriangularGwa::jing_zhang(q()).unwrap(),
        TriangularGwa::down_up(Scalar::one(), Scalar::one(), Scalar::int(2), &h.pow(2) + &h).unwrap(),
    ]
}

// ---------------------------------------------------------------------------
// 1. PBW / confluence

/// Exponent vector of a group-algebra basis name such as `g1^2*g2`.
fn exponents(name: &str, rank: usize) -> Vec<u64> {
    let mut e = vec![0; rank];
    if name == "1" {
        return e;
    }
    for f in name.split('*') {
        let (g, p) = f.split_once('^').map_or((f, 1), |(g, p)| (g, p.parse().unwrap()));
        let i = if g == "g" { 0 } else { g[1..].parse::<usize>().unwrap() - 1 };
        e[i] = p;
    }
    e
}

fn group_word(e: &[u64]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0)
        .map(|(i, &p)| {
            let g = if e.len() == 1 { "g".to_string() } else { format!("g{}", i + 1) };
            if p == 1 { g } else { format!("{g}^{p}") }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn random_element(r: &mut ChaCha8Rng, alg: &FiniteAlgebra) -> Vec<Scalar> {
    (0..alg.dim()).map(|_| Scalar::int(r.gen_range(-3..=3))).collect()
}

/// 2x2 matrix of a matrix-unit element `c1*1 + c2*e11 + c3*e12 + c4*e21`.
fn as_matrix(x: &[Scalar]) -> [[Scalar; 2]; 2] {
    [[&x[0] + &x[1], x[2].clone()], [x[3].clone(), x[0].clone()]]
}

fn matmul(a: &[[Scalar; 2]; 2], b: &[[Scalar; 2]; 2]) -> [[Scalar; 2]; 2] {
    let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn pbw_confluence() -> Check {
    let mut r = rng(1);
    let shapes: [&[u64]; 8] = [&[2], &[3], &[4], &[5], &[2, 2], &[2, 3], &[6], &[3, 3]];
    for i in 0..12 {
        let orders = shapes[r.gen_range(0..shapes.len())];
        let h = FiniteAlgebra::group_algebra(orders);
        // theta(g_i) = g_i^k with k a unit mod the order
        let ks: Vec<u64> = orders
            .iter()
            .map(|&n| loop {
                let k = r.gen_range(1..=n.max(2));
                if k.gcd(&n) == 1 {
                    break k;
                }
            })
            .collect();
        let theta: Vec<Vec<Scalar>> = h
            .names
            .iter()
            .map(|name| {
                let e = exponents(name, orders.len());
                let img: Vec<u64> = e.iter().zip(&ks).zip(orders).map(|((a, k), n)| a * k % n).collect();
                let j = h.names.iter().position(|n| *n == group_word(&img)).expect("group element");
                (0..h.dim()).map(|k| if k == j { Scalar::one() } else { Scalar::zero() }).collect()
            })
            .collect();
        let z0 = random_element(&mut r, &h);
        let z1 = if i % 3 == 0 {
            random_element(&mut r, &h)
        } else {
            (0..h.dim()).map(|k| if h.names[k] == "1" { Scalar::int(r.gen_range(1..=3)) } else { Scalar::zero() }).collect()
        };
        let p = gwa_presentation(&h, &theta, &z0, &z1).map_err(|e| e.to_string())?;
        let v = p.check_confluence(20_000, 20_000).map_err(|e| e.to_string())?;
        ensure(matches!(v, ConfluenceVerdict::Confluent { .. }), || format!("F[{orders:?}] instance {i}: {v:?}"))?;
    }

    let m = FiniteAlgebra::matrix_units();
    let el = |s: &str| m.parse_element(s).unwrap();
    let identity: Vec<Vec<Scalar>> = m.names.iter().map(|n| el(n)).collect();
    // conjugation by the permutation matrix
    let swap = vec![el("1"), el("1 - e11"), el("e21"), el("e12")];
    let cases = [
        (&identity, "e11", "1"),
        (&identity, "e12", "1"),
        (&identity, "e21", "2"),
        (&identity, "e11 + 2*e12", "1"),
        (&swap, "e11", "1"),
        (&swap, "3*e21 - e11", "1"),
    ];
    let units = ["e11", "e12", "e21"].map(|s| as_matrix(&el(s)));
    for (theta, z0, z1) in cases {
        let zm = as_matrix(&el(z0));
        let central = units.iter().all(|x| matmul(&zm, x) == matmul(x, &zm));
        ensure(!central, || format!("{z0} is central"))?;
        let p = gwa_presentation(&m, theta, &el(z0), &el(z1)).map_err(|e| e.to_string())?;
        match p.check_confluence(20_000, 20_000).map_err(|e| e.to_string())? {
            ConfluenceVerdict::NotConfluent { ambiguity, nf_left, nf_right, difference } => {
                ensure(!difference.is_empty() && nf_left != nf_right, || format!("{z0}: empty witness at {ambiguity}"))?
            }
            v => return Err(format!("z0 = {z0}: expected NotConfluent, got {v:?}")),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 2-3. Gram diagonal and u^m d^n

fn gram_diagonal() -> Check {
    for a in gram_presets() {
        let name = a.name().unwrap_or("?").to_string();
        let powers: Vec<GwaElement> = (0..=8).map(|n| a.pow(&a.d(), n).unwrap()).collect();
        let mut product = BaseElement::one(a.family());
        for n in 0..=8usize {
            if n > 0 {
                product = &product * &a.z_tilde(n as i64);
            }
            for m in 0..=8usize {
                let g = a.shapovalov(&powers[m], &powers[n]).map_err(|e| e.to_string())?;
                if m == n {
                    ensure(g == product, || format!("{name}: <d^{n}, d^{n}> = {g}, product {product}"))?;
                } else {
                    ensure(g.is_zero(), || format!("{name}: <d^{m}, d^{n}> = {g}"))?;
                }
            }
        }
    }
    // classical Shapovalov values at h = x and K = q^m
    let dispin = TriangularGwa::dispin();
    let uq = TriangularGwa::uq_sl2();
    for x in [rat(1, 3), rat(2, 1), rat(-5, 2)] {
        let xs = Scalar::from(x);
        let v = dispin.weighted_z_tilde(&Weight::Poly(xs.clone()), 8).map_err(|e| e.to_string())?;
        for j in 1..=8i64 {
            let want = &(&Scalar::int(j) * &(&(&Scalar::int(2) * &xs) - &Scalar::int(j - 1))) / &Scalar::int(2);
            ensure(v.at(j) == &want, || format!("dispin z~_{j}({xs})"))?;
        }
    }
    for m in -2..=4i64 {
        let v = uq.weighted_z_tilde(&Weight::Group(vec![q().pow(m)]), 8).map_err(|e| e.to_string())?;
        for j in 1..=8i64 {
            ensure(v.at(j) == &(&qint(j) * &qint(m - j + 1)), || format!("uq z~_{j}(q^{m})"))?;
        }
    }
    Ok(())
}

fn u_m_d_n() -> Check {
    for a in gram_presets() {
        let name = a.name().unwrap_or("?").to_string();
        for n in 0..=8u32 {
            let dn = a.pow(&a.d(), n).unwrap();
            for m in 0..=n {
                let x = a.multiply(&a.pow(&a.u(), m).unwrap(), &dn).map_err(|e| e.to_string())?;
                let mut want = BaseElement::one(a.family());
                for j in (n - m)..n {
                    want = &want * &a.z_tilde(j as i64 + 1);
                }
                let got = x.coefficient(n - m, 0).cloned().unwrap_or_else(|| BaseElement::zero(a.family()));
                ensure(got == want, || format!("{name}: u^{m} d^{n} has {got}, expected {want}"))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 4-6. Verma modules, blocks, Casimir

fn verma_structure() -> Check {
    let uq = TriangularGwa::uq_sl2();
    for m in 0..=6i64 {
        let w = Weight::Group(vec![q().pow(m)]);
        let rep = verma_report(&uq, &w, 50, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
        ensure(rep.maximal_degrees == vec![m as u64 + 1], || format!("K = q^{m}: {:?}", rep.maximal_degrees))?;
        // the first vanishing Gram value gives dim L
        let v = uq.weighted_z_tilde(&w, 50).map_err(|e| e.to_string())?;
        let mut gram = Scalar::one();
        let mut dim = None;
        for j in 1..=50i64 {
            gram = &gram * v.at(j);
            let oracle = &qint(j) * &qint(m - j + 1);
            ensure(v.at(j) == &oracle, || format!("K = q^{m}: z~_{j}"))?;
            if gram.is_zero() && dim.is_none() {
                dim = Some(j);
            }
        }
        ensure(dim == Some(m + 1), || format!("dim L(q^{m}) = {dim:?}"))?;
    }
    let rep = verma_report(&TriangularGwa::dispin(), &Weight::Poly(Scalar::one()), 50, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
    ensure(rep.maximal_degrees == vec![3], || format!("dispin h=1: {:?}", rep.maximal_degrees))
}

fn kron(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0; a[0].len() * b[0].len()]; a.len() * b.len()];
    for (i, ra) in a.iter().enumerate() {
        for (j, rb) in b.iter().enumerate() {
            for (k, x) in ra.iter().enumerate() {
                for (l, y) in rb.iter().enumerate() {
                    out[i * b.len() + j][k * rb.len() + l] = x * y;
                }
            }
        }
    }
    out
}

fn transpose_product(d: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = d[0].len();
    (0..n).map(|i| (0..n).map(|j| d.iter().map(|row| row[i] * row[j]).sum()).collect()).collect()
}

fn blocks() -> Check {
    let d = vec![vec![1, 1], vec![0, 1]];
    let c = vec![vec![1, 1], vec![1, 2]];
    ensure(transpose_product(&d) == c, || "C != D^T D".into())?;
    let dispin = TriangularGwa::dispin();
    let b1 = block_report(&dispin, &Weight::Poly(Scalar::one()), 50, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
    let members = vec![vec![Weight::Poly(Scalar::one())], vec![Weight::Poly(Scalar::int(-2))]];
    ensure(b1.members == members, || format!("dispin members {:?}", b1.members))?;
    ensure(b1.decomposition == d && b1.cartan == c, || format!("dispin D {:?} C {:?}", b1.decomposition, b1.cartan))?;
    ensure(b1.certification == Certification::Certified, || "dispin block not certified".into())?;

    let uq = TriangularGwa::uq_sl2();
    let b2 = block_report(&uq, &Weight::Group(vec![q().pow(3)]), 50, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
    let members = vec![vec![Weight::Group(vec![q().pow(3)])], vec![Weight::Group(vec![q().pow(-5)])]];
    ensure(b2.members == members, || format!("uq members {:?}", b2.members))?;
    ensure(b2.decomposition == d && b2.cartan == c, || "uq block shape".into())?;
    ensure(b2.certification == Certification::Certified, || "uq block not certified".into())?;

    let b3 = block_report(&dispin, &Weight::Poly(Scalar::ratio(3, 2)), 50, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
    let t = tensor_block(&[b1.clone(), b3.clone()]);
    ensure(t.decomposition == kron(&b1.decomposition, &b3.decomposition), || "tensor D".into())?;
    ensure(t.cartan == kron(&b1.cartan, &b3.cartan), || "tensor C".into())?;
    ensure(t.cartan == transpose_product(&t.decomposition), || "tensor BGG reciprocity".into())?;
    ensure(t.members.len() == b1.members.len() * b3.members.len(), || "tensor members".into())?;
    for (i, x) in b1.members.iter().enumerate() {
        for (j, y) in b3.members.iter().enumerate() {
            let pair = [x.clone(), y.clone()].concat();
            ensure(t.members[i * b3.members.len() + j] == pair, || "tensor member order".into())?;
        }
    }
    Ok(())
}

fn casimir() -> Check {
    let mut r = rng(6);
    for a in [TriangularGwa::dispin(), TriangularGwa::uq_sl2()] {
        let name = a.name().unwrap_or("?").to_string();
        let CasimirOutcome::Found { zeta, omega } = a.casimir().map_err(|e| e.to_string())? else {
            return Err(format!("{name}: no Casimir"));
        };
        let image = &zeta - &apply_endo(a.theta(), &zeta).map_err(|e| e.to_string())?;
        ensure(&image == a.z0(), || format!("{name}: (id - theta) zeta = {image}"))?;
        for g in [a.u(), a.d()] {
            ensure(a.commutator(&omega, &g).map_err(|e| e.to_string())?.is_zero(), || format!("{name}: Omega not central"))?;
        }
        for _ in 0..20 {
            let w = match a.family() {
                BaseFamily::Poly => Weight::Poly(random_rat(&mut r, 9)),
                _ => Weight::Group(vec![&random_rat(&mut r, 9) * &q().pow(r.gen_range(-6..=6))]),
            };
            let v = a.weighted_z_tilde(&w, 10).map_err(|e| e.to_string())?;
            let at = zeta.evaluate(&w).map_err(|e| e.to_string())?;
            for n in 1..=10 {
                let shifted = dual_act(a.theta(), -n, &w).map_err(|e| e.to_string())?;
                let diff = &at - &zeta.evaluate(&shifted).map_err(|e| e.to_string())?;
                ensure(&diff == v.at(n), || format!("{name} at {w}: n = {n}"))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 7-9. Freeness, finiteness, quantum closed form

fn free_weights() -> Check {
    let mut r = rng(7);
    ensure(downup_free_set(&Scalar::int(2), &Scalar::one()) == FreeSet::AllExcept(Scalar::one()), || "r=2, gamma=1".into())?;
    let du = TriangularGwa::down_up(Scalar::int(2), Scalar::one(), Scalar::one(), BaseElement::h()).unwrap();
    let jz = TriangularGwa::jing_zhang(q()).unwrap();
    let ejz = &Scalar::int(-2) / &(&Scalar::one() - &q());
    ensure(
        downup_free_set(&q().pow(-1), &(&Scalar::int(-2) / &q())) == FreeSet::AllExcept(ejz.clone()),
        || "jing-zhang free set".into(),
    )?;
    for (a, bad) in [(&du, Scalar::one()), (&jz, ejz)] {
        let v = is_free(a.theta(), &Weight::Poly(bad.clone())).map_err(|e| e.to_string())?;
        ensure(v != FreeVerdict::Free, || format!("{bad} should not be free"))?;
        for _ in 0..20 {
            let x = &random_rat(&mut r, 9) + &(if r.gen_bool(0.5) { q() } else { Scalar::zero() });
            if x != bad {
                ensure(is_free(a.theta(), &Weight::Poly(x.clone())).map_err(|e| e.to_string())? == FreeVerdict::Free, || format!("{x} should be free"))?;
            }
        }
    }
    // quantum GWAs: free exactly when alpha has infinite order
    let shapes = [GroupShape::new(1, vec![]).unwrap(), GroupShape::new(2, vec![]).unwrap(), GroupShape::new(1, vec![2]).unwrap()];
    let choices = [Scalar::one(), Scalar::int(-1), q(), q().pow(-2), Scalar::int(2), -&q()];
    for shape in &shapes {
        for _ in 0..12 {
            let mut alpha: Vec<Scalar> = (0..shape.rank).map(|_| choices[r.gen_range(0..choices.len())].clone()).collect();
            alpha.extend(shape.torsion.iter().map(|_| if r.gen_bool(0.5) { Scalar::one() } else { Scalar::int(-1) }));
            let finite_order = (1..=12).any(|n| alpha.iter().all(|a| a.pow(n).is_one()));
            let z0 = BaseElement::one(&BaseFamily::Group(shape.clone()));
            let theta = rta::cartan::rho(&Weight::Group(alpha.clone())).map_err(|e| e.to_string())?;
            let mut lam: Vec<Scalar> = (0..shape.rank).map(|_| &random_rat(&mut r, 5) * &q().pow(r.gen_range(-3..=3))).collect();
            lam.extend(shape.torsion.iter().map(|_| Scalar::int(-1)));
            let v = is_free(&theta, &Weight::Group(lam)).map_err(|e| e.to_string())?;
            ensure((v == FreeVerdict::Free) == !finite_order, || format!("alpha = {alpha:?}: {v:?}"))?;
            if !finite_order {
                TriangularGwa::quantum_gwa(shape.clone(), alpha, z0.clone(), z0).map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

/// Integer zeros of `sum p_j(n) a_j^n` for `|n| <= range`, by clearing
/// denominators and stepping integer powers.
fn brute_zeros(terms: &[(Vec<i64>, (i64, i64))], constant: &BigRational, range: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for sign in [1i64, -1] {
        // a^(sign n) = (num/den)^n with the reciprocal for negative n
        let bases: Vec<(BigInt, BigInt)> = terms
            .iter()
            .map(|(_, (p, q))| if sign == 1 { (BigInt::from(*p), BigInt::from(*q)) } else { (BigInt::from(*q), BigInt::from(*p)) })
            .collect();
        let lcm = bases.iter().fold(BigInt::one(), |l, (_, d)| l.lcm(&d.abs()));
        let scaled: Vec<BigInt> = bases.iter().map(|(n, d)| n * (&lcm / d)).collect();
        let mut pow: Vec<BigInt> = vec![BigInt::one(); terms.len()];
        let mut lpow = BigInt::one();
        for n in 0..=range {
            let m = sign * n;
            // sum_j p_j(m) (a_j L)^n + c L^n, all times the denominator of c
            let mut total = constant.numer() * &lpow;
            for ((coeffs, _), pw) in terms.iter().zip(&pow) {
                let pm: i64 = coeffs.iter().rev().fold(0, |acc, c| acc * m + c);
                total += constant.denom() * pw * pm;
            }
            if total.is_zero() && (sign == 1 || n > 0) {
                out.push(m);
            }
            for (pw, s) in pow.iter_mut().zip(&scaled) {
                *pw *= s;
            }
            lpow *= &lcm;
        }
    }
    out.sort();
    out
}

fn finiteness() -> Check {
    let mut r = rng(8);
    let uq = TriangularGwa::uq_sl2();
    for _ in 0..20 {
        let w = Weight::Group(vec![&random_rat(&mut r, 9) * &q().pow(r.gen_range(-8..=8))]);
        let rep = finiteness_certificate(&uq, &w, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
        ensure(rep.verdict == Finiteness::FiniteCertified, || format!("uq at {w}: {:?}", rep.verdict))?;
    }
    for rr in [Scalar::one(), Scalar::int(2)] {
        let a = TriangularGwa::down_up(rr, Scalar::int(-1), Scalar::one(), BaseElement::zero(&BaseFamily::Poly)).unwrap();
        let rep = finiteness_certificate(&a, &Weight::Poly(Scalar::ratio(1, 3)), DEFAULT_WINDOW).map_err(|e| e.to_string())?;
        ensure(rep.verdict == Finiteness::InfiniteCertified, || format!("f = 0: {:?}", rep.verdict))?;
    }
    let two_n = PolyExpProblem {
        terms: vec![(vec![Scalar::one()], Scalar::int(2)), (vec![Scalar::zero(), Scalar::zero(), Scalar::int(-1)], Scalar::one())],
        window: DEFAULT_WINDOW,
    };
    let sol = polyexp_solve(&two_n).map_err(|e| e.to_string())?;
    ensure(sol.status.is_certified(), || "2^n - n^2 not certified".into())?;
    ensure(sol.solutions.iter().copied().collect::<Vec<i64>>() == vec![2, 4], || format!("2^n = n^2: {:?}", sol.solutions))?;

    let bases = [(2, 1), (3, 1), (1, 2), (3, 2), (-2, 1), (5, 3), (2, 3), (-3, 1), (4, 1), (-1, 3)];
    for i in 0..50 {
        let k = r.gen_range(1..=3);
        let mut picked: Vec<(i64, i64)> = Vec::new();
        while picked.len() < k {
            let b = bases[r.gen_range(0..bases.len())];
            // no two bases with a root-of-unity ratio
            if !picked.iter().any(|p| p.0 * b.1 == b.0 * p.1 || p.0 * b.1 == -b.0 * p.1) {
                picked.push(b);
            }
        }
        let terms: Vec<(Vec<i64>, (i64, i64))> =
            picked.into_iter().map(|b| ((0..r.gen_range(1..=2)).map(|_| r.gen_range(-3..=3)).collect(), b)).collect();
        let mut terms = terms;
        for (c, _) in terms.iter_mut() {
            if c.iter().all(|x| *x == 0) {
                c[0] = 1;
            }
        }
        // a base-one term planted to vanish at n0
        let n0: i64 = r.gen_range(-6..=6);
        let at_n0: BigRational = terms
            .iter()
            .map(|(c, (p, d))| {
                let pm: i64 = c.iter().rev().fold(0, |acc, x| acc * n0 + x);
                BigRational::from_integer(BigInt::from(pm)) * rat(*p, *d).pow(n0 as i32)
            })
            .fold(BigRational::zero(), |a, b| a + b);
        let constant = if i % 2 == 0 { -at_n0 } else { BigRational::from_integer(BigInt::from(r.gen_range(-4..=4))) };
        let mut problem_terms: Vec<(Vec<Scalar>, Scalar)> = terms
            .iter()
            .map(|(c, (p, d))| (c.iter().map(|x| Scalar::int(*x)).collect(), Scalar::ratio(*p, *d)))
            .collect();
        if !constant.is_zero() {
            problem_terms.push((vec![Scalar::from(constant.clone())], Scalar::one()));
        }
        let problem = PolyExpProblem { terms: problem_terms, window: DEFAULT_WINDOW };
        let sol = polyexp_solve(&problem).map_err(|e| format!("instance {i}: {e}"))?;
        let brute = brute_zeros(&terms, &constant, 10_000);
        let got: Vec<i64> = sol.solutions.iter().copied().filter(|n| n.abs() <= 10_000).collect();
        ensure(got == brute, || format!("instance {i} {terms:?} + {constant}: solver {got:?}, brute {brute:?}"))?;
    }
    Ok(())
}

fn random_laurent(r: &mut ChaCha8Rng, shape: &GroupShape) -> BaseElement {
    let mut x = BaseElement::zero(&BaseFamily::Group(shape.clone()));
    for _ in 0..r.gen_range(1..=3) {
        let mut g: Vec<i64> = (0..shape.rank).map(|_| r.gen_range(-2..=2)).collect();
        g.extend(shape.torsion.iter().map(|&t| r.gen_range(0..t as i64)));
        x = &x + &BaseElement::monomial(shape, g, &random_rat(r, 5) * &q().pow(r.gen_range(-2..=2)));
    }
    x
}

fn quantum_closed_forms() -> Check {
    let mut r = rng(9);
    let shapes = [GroupShape::new(1, vec![]).unwrap(), GroupShape::new(2, vec![]).unwrap(), GroupShape::new(1, vec![2]).unwrap()];
    let mut done = 0;
    while done < 20 {
        let shape = shapes[done % shapes.len()].clone();
        let mut alpha: Vec<Scalar> = (0..shape.rank).map(|_| &random_rat(&mut r, 3) * &q().pow(r.gen_range(-3..=3))).collect();
        alpha.extend(shape.torsion.iter().map(|_| Scalar::int(-1)));
        let z0 = random_laurent(&mut r, &shape);
        let s = if r.gen_bool(0.5) { Scalar::one() } else { &random_rat(&mut r, 4) * &q().pow(r.gen_range(-1..=1)) };
        let fam = BaseFamily::Group(shape.clone());
        let Ok(a) = TriangularGwa::quantum_gwa(shape.clone(), alpha, z0, BaseElement::constant(&fam, s)) else {
            continue;
        };
        let mut mu: Vec<Scalar> = (0..shape.rank).map(|_| &random_rat(&mut r, 5) * &q().pow(r.gen_range(-3..=3))).collect();
        mu.extend(shape.torsion.iter().map(|_| Scalar::int(-1)));
        let mu = Weight::Group(mu);
        let v = a.weighted_z_tilde(&mu, 30).map_err(|e| e.to_string())?;
        for n in -30..=30i64 {
            let closed = quantum_closed_form(&a, &mu, n).ok_or("no closed form")?;
            ensure(&closed == v.at(n), || format!("instance {done}, n = {n}: {closed} vs {}", v.at(n)))?;
        }
        done += 1;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 10. Regular triangular monoids

fn rtm_suite() -> Check {
    let lat = |eta: BigRational, p: &[u64]| Lattice::new(eta, p.iter().copied()).unwrap();
    let structured = [
        Rtm::FreeMonoid(1),
        Rtm::FreeMonoid(2),
        Rtm::FreeMonoid(3),
        Rtm::AbelianCone(lat(rat(1, 1), &[])),
        Rtm::AbelianCone(lat(rat(1, 2), &[3])),
        Rtm::Semidirect { zeta: vec![rat(2, 1)], lattice: lat(rat(1, 1), &[2]) },
        Rtm::Semidirect { zeta: vec![rat(3, 2)], lattice: lat(rat(1, 1), &[2, 3]) },
    ];
    for m in &structured {
        let v = check_cocycles(m, 3).map_err(|e| e.to_string())?;
        ensure(v.passed(), || format!("{m:?}: {v:?}"))?;
    }
    let sampled = Sampled::from_view(&Rtm::FreeMonoid(2).cone().unwrap(), 2).map_err(|e| e.to_string())?;
    ensure(rtm::check_view(&sampled, 0).passed(), || "unmutated sample fails".into())?;
    for i in 0..20 {
        let m = sampled.mutate(i * 7 + 3, i);
        ensure(m != sampled && !rtm::check_view(&m, 0).passed(), || format!("mutation {i} passes"))?;
    }
    // based iff discretely graded iff E = eta Z and zeta = 1
    let combos = [
        (rat(1, 1), vec![], vec![rat(1, 1)], true),
        (rat(1, 2), vec![], vec![rat(1, 1), rat(1, 1)], true),
        (rat(1, 1), vec![2], vec![rat(1, 1)], false),
        (rat(1, 1), vec![2], vec![rat(2, 1)], false),
        (rat(1, 1), vec![2, 3], vec![rat(3, 2)], false),
        (rat(3, 1), vec![2], vec![rat(2, 1), rat(1, 1)], false),
    ];
    for (eta, primes, zeta, based) in combos {
        let k = zeta.len();
        let c = classify(&Rtm::Semidirect { zeta: zeta.clone(), lattice: lat(eta, &primes) }).map_err(|e| e.to_string())?;
        ensure(c.based == based && c.discretely_graded == based, || format!("classify {zeta:?} {primes:?}: {c:?}"))?;
        ensure(c.simple_roots.map(|s| s.len()) == based.then_some(k + 1), || "simple roots".into())?;
    }

    let semis = [
        Rtm::Semidirect { zeta: vec![rat(2, 1)], lattice: lat(rat(1, 1), &[2]) },
        Rtm::Semidirect { zeta: vec![rat(3, 2), rat(2, 1)], lattice: lat(rat(1, 1), &[2, 3]) },
    ];
    for m in &semis {
        let k = m.cone().unwrap().k;
        let a = AZeta::new(m, vec![Scalar::zero(); k]).map_err(|e| e.to_string())?;
        for g0 in [GroupEl { e: rat(1, 4), n: vec![2; k] }, GroupEl { e: rat(-3, 2), n: vec![-1; k] }] {
            let rep = rtm::maximal_vector_check(&a, &g0, 4).map_err(|e| e.to_string())?;
            ensure(rep.non_maximal.is_empty() && rep.dim_simple_is_one, || format!("weight {g0}: {:?}", rep.non_maximal))?;
        }
    }
    let m = &semis[1];
    for c in [vec![Scalar::zero(), Scalar::zero()], vec![Scalar::zero(), Scalar::int(3)], vec![q(), Scalar::ratio(1, 2)]] {
        let a = AZeta::new(m, c.clone()).map_err(|e| e.to_string())?;
        for w in rtm::center_witness(&a, 2).map_err(|e| e.to_string())? {
            ensure(w.passes && w.expected_central == c[w.j - 1].is_zero(), || format!("c = {c:?}, j = {}", w.j))?;
            // [x_j^- x_j^+, x_j^+] = -c_j x_j^+
            let xp = a.x_plus(w.j).unwrap();
            let z = a.multiply(&a.x_minus(w.j).unwrap(), &xp).unwrap();
            let comm = a.commutator(&z, &xp).unwrap();
            ensure(comm == xp.scale(&-&c[w.j - 1]), || format!("c = {c:?}: [x-x+, x+] = {comm}"))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 11-12. Classical limit and cross-oracle

fn classical_limit_check() -> Check {
    for x in [rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1)] {
        let rep = classical_limit(2, 0, 0, &Scalar::one(), &Scalar::int(-1), &BaseElement::h(), &x, 6).map_err(|e| e.to_string())?;
        let xs = Scalar::from(x.clone());
        // 1 - x l (q - 1)/gamma with l = 2, gamma = -1
        let lk = &Scalar::one() + &(&(&Scalar::int(2) * &xs) * &(&q() - &Scalar::one()));
        ensure(rep.quantum_weight == lk, || format!("x = {x}: lambda(K) = {}", rep.quantum_weight))?;
        for row in &rep.rows {
            let k = row.k as i64;
            let oracle = &(&Scalar::int(k) * &(&(&Scalar::int(2) * &xs) - &Scalar::int(k - 1))) / &Scalar::int(2);
            ensure(row.classical == oracle && row.at_q_one == oracle, || format!("x = {x}, k = {k}: {row:?}"))?;
        }
        ensure(rep.limit_maximal_degrees == rep.classical_maximal_degrees && rep.all_equal, || format!("x = {x}: {rep:?}"))?;
        let expected: Vec<u64> = (1..=6).filter(|&k| Scalar::from(x.clone()) * Scalar::int(2) + Scalar::one() == Scalar::int(k as i64)).collect();
        ensure(rep.classical_maximal_degrees == expected, || format!("x = {x}: {:?}", rep.classical_maximal_degrees))?;
    }
    Ok(())
}

fn cross_oracle() -> Check {
    let mut r = rng(12);
    let cases: [(&[u64], &[i64]); 5] = [(&[2], &[-1]), (&[3], &[1]), (&[2, 2], &[-1, 1]), (&[4], &[-1]), (&[2, 3], &[-1, 1])];
    for (orders, chi) in cases {
        let shape = GroupShape::new(0, orders.to_vec()).unwrap();
        let fam = BaseFamily::Group(shape.clone());
        let theta = Endo::CharTwist(chi.iter().map(|&c| Scalar::int(c)).collect());
        let elems: Vec<Vec<i64>> = {
            let mut all = vec![vec![]];
            for &o in orders {
                all = all.into_iter().flat_map(|p: Vec<i64>| (0..o as i64).map(move |e| [p.clone(), vec![e]].concat())).collect();
            }
            all
        };
        let random_h = |r: &mut ChaCha8Rng| {
            elems.iter().fold(BaseElement::zero(&fam), |acc, g| &acc + &BaseElement::monomial(&shape, g.clone(), Scalar::int(r.gen_range(-2..=2))))
        };
        let z0 = random_h(&mut r);
        let z1 = if r.gen_bool(0.5) { BaseElement::constant(&fam, Scalar::int(r.gen_range(1..=3))) } else { random_h(&mut r) };
        let a = TriangularGwa::with_finite_order(fam.clone(), theta, z0, z1).map_err(|e| e.to_string())?;
        let model = a.finite_model().ok_or("no finite model")?;
        let p = model.presentation().map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let factors: Vec<GwaElement> = (0..r.gen_range(1..=4))
                .map(|_| match r.gen_range(0..3) {
                    0 => a.d(),
                    1 => a.u(),
                    _ => GwaElement::from_h(random_h(&mut r)),
                })
                .collect();
            let closed = model.to_free(&p, &a.product(&factors).map_err(|e| e.to_string())?);
            let word = factors.iter().fold(FreePoly::word(vec![]), |acc, f| acc.mul(&model.to_free(&p, f)));
            let nf = p.normal_form(&word, 100_000).map_err(|e| e.to_string())?;
            ensure(nf == closed, || {
                format!("F[{orders:?}]: rewrite {} vs closed form {}", nf.render(p.generators()), closed.render(p.generators()))
            })?;
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [(&str, u64, fn() -> Check); 12] = [
        ("1 PBW and confluence", 5, pbw_confluence),
        ("2 Gram diagonal", 10, gram_diagonal),
        ("3 u^m d^n coefficients", 10, u_m_d_n),
        ("4 Verma structure", 10, verma_structure),
        ("5 blocks and BGG reciprocity", 10, blocks),
        ("6 Casimir", 10, casimir),
        ("7 free weights", 10, free_weights),
        ("8 finiteness certificates", 30, finiteness),
        ("9 quantum closed form", 10, quantum_closed_forms),
        ("10 triangular monoids", 30, rtm_suite),
        ("11 classical limit", 10, classical_limit_check),
        ("12 rewrite vs closed form", 10, cross_oracle),
    ];
    let mut failures = Vec::new();
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let outcome = match (&result, took <= Duration::from_secs(limit)) {
            (Ok(()), true) => "PASS".to_string(),
            (Ok(()), false) => format!("FAIL (over the {limit} s limit)"),
            (Err(e), _) => format!("FAIL: {e}"),
        };
        println!("criterion {name:<32} {:>8.2} s  {outcome}", took.as_secs_f64());
        if outcome != "PASS" {
            failures.push(name);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
