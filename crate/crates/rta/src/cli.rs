//! Spec files, presets, subcommand dispatch and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cartan::{dual_act, BaseElement, BaseFamily, CartanError, Endo, GroupShape, Weight};
use crate::cat_o::{self, CatOError, Certification, ExpPoly, PolyExpProblem};
use crate::expr::{self, Domain, ExprError, UniDomain};
use crate::gwa::{CasimirOutcome, GwaElement, GwaError, TriangularGwa};
use crate::rewrite::{gwa_presentation, FiniteAlgebra, Presentation, RewriteError};
use crate::rtm::{self, AZeta, GroupEl, Lattice, Rtm, RtmError, Sampled};
use crate::scalar::{Scalar, ScalarError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stable error codes; every code but `Uncertified` exits with status 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ErrorCode {
    Parse,
    Validation,
    NotFree,
    Rewrite,
    Pole,
    Io,
    Uncertified,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Parse => "E_PARSE",
            ErrorCode::Validation => "E_VALIDATION",
            ErrorCode::NotFree => "E_NOT_FREE",
            ErrorCode::Rewrite => "E_REWRITE",
            ErrorCode::Pole => "E_POLE",
            ErrorCode::Io => "E_IO",
            ErrorCode::Uncertified => "E_UNCERTIFIED",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            ErrorCode::Uncertified => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("error[{}]: {message}", code.as_str())]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
}

impl CliError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    fn parse(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Parse, message)
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Validation, message)
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        Self::parse(e.to_string())
    }
}

impl From<CartanError> for CliError {
    fn from(e: CartanError) -> Self {
        Self::invalid(e.to_string())
    }
}

impl From<GwaError> for CliError {
    fn from(e: GwaError) -> Self {
        Self::invalid(e.to_string())
    }
}

impl From<CatOError> for CliError {
    fn from(e: CatOError) -> Self {
        let code = if matches!(e, CatOError::NotFree(_)) { ErrorCode::NotFree } else { ErrorCode::Validation };
        Self::new(code, e.to_string())
    }
}

impl From<RewriteError> for CliError {
    fn from(e: RewriteError) -> Self {
        let code = if matches!(e, RewriteError::Parse { .. }) { ErrorCode::Parse } else { ErrorCode::Rewrite };
        Self::new(code, e.to_string())
    }
}

impl From<RtmError> for CliError {
    fn from(e: RtmError) -> Self {
        let code = if matches!(e, RtmError::Parse(_)) { ErrorCode::Parse } else { ErrorCode::Validation };
        Self::new(code, e.to_string())
    }
}

impl From<ScalarError> for CliError {
    fn from(e: ScalarError) -> Self {
        let code = if matches!(e, ScalarError::PoleAtPoint { .. }) { ErrorCode::Pole } else { ErrorCode::Validation };
        Self::new(code, e.to_string())
    }
}

// ---------------------------------------------------------------------------
// spec files

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FieldChoice {
    Rationals,
    RationalFunctions,
}

impl FieldChoice {
    fn allows_q(self) -> bool {
        self == FieldChoice::RationalFunctions
    }

    fn name(self) -> &'static str {
        match self {
            FieldChoice::Rationals => "Q",
            FieldChoice::RationalFunctions => "Q(q)",
        }
    }
}

/// Finite-dimensional Cartan data for `check-pbw`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PresentationSpec {
    Rules(String),
    FiniteGwa { h: String, torsion: Vec<u64>, theta: BTreeMap<String, String>, z0: String, z1: String },
}

#[derive(Clone, Debug)]
pub enum AlgebraKind {
    Gwa(TriangularGwa),
    Rtm { monoid: Rtm, c: Vec<Scalar> },
    Presentation(PresentationSpec),
    Tensor(Vec<AlgebraSpec>),
}

#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    pub field: FieldChoice,
    pub preset: Option<String>,
    pub kind: AlgebraKind,
}

fn value_str(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        _ => None,
    }
}

fn get_str(t: &toml::Table, section: &str, key: &str) -> Result<Option<String>, CliError> {
    match t.get(key) {
        None => Ok(None),
        Some(v) => value_str(v).map(Some).ok_or_else(|| CliError::parse(format!("[{section}] {key} must be a string"))),
    }
}

fn need_str(t: &toml::Table, section: &str, key: &str) -> Result<String, CliError> {
    get_str(t, section, key)?.ok_or_else(|| CliError::invalid(format!("[{section}] needs `{key}`")))
}

fn get_list(t: &toml::Table, section: &str, key: &str) -> Result<Option<Vec<String>>, CliError> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| value_str(v).ok_or_else(|| CliError::parse(format!("[{section}] {key} entries must be strings"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(_) => Err(CliError::parse(format!("[{section}] {key} must be a list"))),
    }
}

fn get_ints(t: &toml::Table, section: &str, key: &str) -> Result<Vec<i64>, CliError> {
    match t.get(key) {
        None => Ok(vec![]),
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| v.as_integer().ok_or_else(|| CliError::parse(format!("[{section}] {key} entries must be integers"))))
            .collect(),
        Some(v) => v.as_integer().map(|i| vec![i]).ok_or_else(|| CliError::parse(format!("[{section}] {key} must be integers"))),
    }
}

fn section<'a>(doc: &'a toml::Table, name: &str) -> Result<Option<&'a toml::Table>, CliError> {
    match doc.get(name) {
        None => Ok(None),
        Some(toml::Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(CliError::parse(format!("`{name}` must be a section"))),
    }
}

fn scalar_in(field: FieldChoice, src: &str) -> Result<Scalar, CliError> {
    let c = expr::parse_scalar(src)?;
    if !field.allows_q() && !c.is_rational() {
        return Err(CliError::invalid(format!("`{src}` uses q but the field is Q")));
    }
    Ok(c)
}

fn base_in(family: &BaseFamily, field: FieldChoice, src: &str) -> Result<BaseElement, CliError> {
    Ok(expr::parse_base(family, field.allows_q(), src)?.pruned())
}

/// Parses a spec file.
pub fn parse_spec(text: &str) -> Result<AlgebraSpec, CliError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::parse(e.to_string()))?;
    for key in doc.keys() {
        if !["field", "cartan", "gwa", "rtm", "presentation", "tensor"].contains(&key.as_str()) {
            return Err(CliError::parse(format!("unknown section [{key}]")));
        }
    }
    let field = match section(&doc, "field")?.map(|f| get_str(f, "field", "kind")).transpose()?.flatten() {
        None => FieldChoice::RationalFunctions,
        Some(k) => match k.as_str() {
            "Q" | "rational" => FieldChoice::Rationals,
            "Q(q)" | "rational-functions" => FieldChoice::RationalFunctions,
            _ => return Err(CliError::invalid(format!("unknown field `{k}`"))),
        },
    };
    if let Some(g) = section(&doc, "gwa")? {
        if let Some(p) = get_str(g, "gwa", "preset")? {
            let mut spec = parse_preset(&p)?;
            if field == FieldChoice::Rationals && spec.field != field {
                return Err(CliError::invalid(format!("preset `{p}` needs the field Q(q)")));
            }
            spec.field = field;
            return Ok(spec);
        }
        return Ok(AlgebraSpec { field, preset: None, kind: AlgebraKind::Gwa(parse_gwa_section(&doc, g, field)?) });
    }
    if let Some(r) = section(&doc, "rtm")? {
        return parse_rtm_section(r, field);
    }
    if let Some(p) = section(&doc, "presentation")? {
        let spec = parse_presentation_section(p)?;
        build_presentation(&spec)?;
        return Ok(AlgebraSpec { field, preset: None, kind: AlgebraKind::Presentation(spec) });
    }
    if let Some(t) = section(&doc, "tensor")? {
        let factors = get_list(t, "tensor", "factors")?.ok_or_else(|| CliError::invalid("[tensor] needs `factors`"))?;
        let specs = factors.iter().map(|f| parse_preset(f)).collect::<Result<Vec<_>, _>>()?;
        return Ok(AlgebraSpec { field, preset: None, kind: AlgebraKind::Tensor(specs) });
    }
    Err(CliError::invalid("a spec needs one of [gwa], [rtm], [presentation] or [tensor]"))
}

fn parse_gwa_section(doc: &toml::Table, g: &toml::Table, field: FieldChoice) -> Result<TriangularGwa, CliError> {
    if let Some(f) = get_str(g, "gwa", "f")? {
        let s = |k: &str, d: &str| -> Result<Scalar, CliError> {
            scalar_in(field, &get_str(g, "gwa", k)?.unwrap_or_else(|| d.to_string()))
        };
        let f = base_in(&BaseFamily::Poly, field, &f)?;
        return Ok(TriangularGwa::down_up(s("r", "1")?, s("gamma", "-1")?, s("s", "1")?, f)?);
    }
    let c = section(doc, "cartan")?.ok_or_else(|| CliError::invalid("[gwa] with z0/z1 needs a [cartan] section"))?;
    let family = match need_str(c, "cartan", "family")?.as_str() {
        "poly" => BaseFamily::Poly,
        "funz" => BaseFamily::FunZ,
        "group" => {
            let rank = get_ints(c, "cartan", "rank")?.first().copied().unwrap_or(1);
            let torsion = get_ints(c, "cartan", "torsion")?.into_iter().map(|n| n as u64).collect();
            BaseFamily::Group(GroupShape::new(rank as usize, torsion)?)
        }
        other => return Err(CliError::invalid(format!("unknown Cartan family `{other}`"))),
    };
    let theta = match &family {
        BaseFamily::Poly => {
            let t = base_in(&family, field, &need_str(c, "cartan", "theta")?)?;
            let m = t.poly_terms();
            if m.keys().any(|&e| e > 1) {
                return Err(CliError::invalid("theta must be affine: a*h + b"));
            }
            Endo::PolyAffine {
                a: m.get(&1).cloned().unwrap_or_default(),
                b: m.get(&0).cloned().unwrap_or_default(),
            }
        }
        BaseFamily::Group(_) => {
            let chi = get_list(c, "cartan", "chi")?.ok_or_else(|| CliError::invalid("[cartan] needs `chi`"))?;
            Endo::CharTwist(chi.iter().map(|x| scalar_in(field, x)).collect::<Result<_, _>>()?)
        }
        BaseFamily::FunZ => Endo::ZShift(
            get_ints(c, "cartan", "shift")?.first().copied().ok_or_else(|| CliError::invalid("[cartan] needs `shift`"))?,
        ),
    };
    let z0 = base_in(&family, field, &need_str(g, "gwa", "z0")?)?;
    let z1 = base_in(&family, field, &get_str(g, "gwa", "z1")?.unwrap_or_else(|| "1".into()))?;
    match TriangularGwa::new(family.clone(), theta.clone(), z0.clone(), z1.clone()) {
        Err(GwaError::FiniteOrder(_)) if matches!(&family, BaseFamily::Group(s) if s.rank == 0) => {
            Ok(TriangularGwa::with_finite_order(family, theta, z0, z1)?)
        }
        r => Ok(r?),
    }
}

fn rat_in(src: &str) -> Result<BigRational, CliError> {
    expr::parse_scalar(src)?
        .as_rational()
        .cloned()
        .ok_or_else(|| CliError::invalid(format!("`{src}` must be rational")))
}

fn parse_rtm_section(r: &toml::Table, field: FieldChoice) -> Result<AlgebraSpec, CliError> {
    let kind = need_str(r, "rtm", "kind")?;
    let monoid = rtm_from_parts(
        &kind,
        get_str(r, "rtm", "eta")?.as_deref(),
        &get_ints(r, "rtm", "primes")?,
        get_list(r, "rtm", "zeta")?.unwrap_or_default(),
        get_ints(r, "rtm", "k")?.first().copied(),
        Some(r),
    )?;
    let c = get_list(r, "rtm", "c")?.unwrap_or_default().iter().map(|x| scalar_in(field, x)).collect::<Result<_, _>>()?;
    Ok(AlgebraSpec { field, preset: None, kind: AlgebraKind::Rtm { monoid, c } })
}

fn rtm_from_parts(
    kind: &str,
    eta: Option<&str>,
    primes: &[i64],
    zeta: Vec<String>,
    k: Option<i64>,
    tables: Option<&toml::Table>,
) -> Result<Rtm, CliError> {
    let lattice = || -> Result<Lattice, CliError> {
        Ok(Lattice::new(rat_in(eta.unwrap_or("1"))?, primes.iter().map(|&p| p as u64))?)
    };
    let m = match kind {
        "cone" => Rtm::AbelianCone(lattice()?),
        "free" => Rtm::FreeMonoid(k.unwrap_or(1).max(0) as usize),
        "semidirect" => Rtm::Semidirect { zeta: zeta.iter().map(|z| rat_in(z)).collect::<Result<_, _>>()?, lattice: lattice()? },
        "sampled" => Rtm::Sampled(parse_sampled(tables.ok_or_else(|| CliError::invalid("sampled monoids need tables"))?)?),
        other => return Err(CliError::invalid(format!("unknown rtm kind `{other}`"))),
    };
    m.validate()?;
    Ok(m)
}

fn parse_sampled(r: &toml::Table) -> Result<Sampled, CliError> {
    if let Some(base) = get_str(r, "rtm", "base")? {
        let ball = get_ints(r, "rtm", "ball")?.first().copied().unwrap_or(1) as u32;
        let inner = rtm_from_parts(
            &base,
            get_str(r, "rtm", "eta")?.as_deref(),
            &get_ints(r, "rtm", "primes")?,
            get_list(r, "rtm", "zeta")?.unwrap_or_default(),
            get_ints(r, "rtm", "k")?.first().copied(),
            None,
        )?;
        let cone = inner.cone().ok_or_else(|| CliError::invalid("a sampled base must be structured"))?;
        return Ok(Sampled::from_view(&cone, ball)?);
    }
    let labels = get_list(r, "rtm", "labels")?.ok_or_else(|| CliError::invalid("[rtm] sampled needs `labels`"))?;
    let positive = match r.get("positive") {
        Some(toml::Value::Array(a)) => a.iter().map(|v| v.as_bool().ok_or_else(|| CliError::parse("positive entries are booleans"))).collect::<Result<_, _>>()?,
        _ => return Err(CliError::invalid("[rtm] sampled needs `positive`")),
    };
    let opt = |i: i64| (i >= 0).then_some(i as usize);
    let mul = match r.get("mul") {
        Some(toml::Value::Array(rows)) => rows
            .iter()
            .map(|row| match row {
                toml::Value::Array(a) => a.iter().map(|v| v.as_integer().map(opt).ok_or_else(|| CliError::parse("mul entries are integers"))).collect(),
                _ => Err(CliError::parse("mul rows are lists")),
            })
            .collect::<Result<_, _>>()?,
        _ => return Err(CliError::invalid("[rtm] sampled needs `mul`")),
    };
    let inv = get_ints(r, "rtm", "inv")?.into_iter().map(opt).collect();
    let mut act = BTreeMap::new();
    if let Some(toml::Value::Array(rows)) = r.get("act") {
        for row in rows {
            let v: Vec<i64> = row.as_array().map(|a| a.iter().filter_map(|x| x.as_integer()).collect()).unwrap_or_default();
            if v.len() != 3 || v.iter().any(|x| *x < 0) {
                return Err(CliError::parse("act entries are [p, x, p |> x]"));
            }
            act.insert((v[0] as usize, v[1] as usize), v[2] as usize);
        }
    }
    let s = Sampled { labels, positive, mul, inv, act };
    s.validate()?;
    Ok(s)
}

fn parse_presentation_section(p: &toml::Table) -> Result<PresentationSpec, CliError> {
    if let Some(rules) = get_str(p, "presentation", "rules")? {
        return Ok(PresentationSpec::Rules(rules));
    }
    let h = need_str(p, "presentation", "h")?;
    let torsion = get_ints(p, "presentation", "torsion")?.into_iter().map(|n| n as u64).collect();
    let mut theta = BTreeMap::new();
    if let Some(t) = p.get("theta") {
        let t = t.as_table().ok_or_else(|| CliError::parse("[presentation] theta maps basis names to images"))?;
        for (k, v) in t {
            theta.insert(k.clone(), value_str(v).ok_or_else(|| CliError::parse("theta images are strings"))?);
        }
    }
    Ok(PresentationSpec::FiniteGwa {
        h,
        torsion,
        theta,
        z0: need_str(p, "presentation", "z0")?,
        z1: get_str(p, "presentation", "z1")?.unwrap_or_else(|| "1".into()),
    })
}

pub fn build_presentation(spec: &PresentationSpec) -> Result<Presentation, CliError> {
    match spec {
        PresentationSpec::Rules(text) => Ok(Presentation::parse(text)?),
        PresentationSpec::FiniteGwa { h, torsion, theta, z0, z1 } => {
            let alg = match h.as_str() {
                "matrix-units" => FiniteAlgebra::matrix_units(),
                "group" => FiniteAlgebra::group_algebra(torsion),
                other => return Err(CliError::invalid(format!("unknown finite algebra `{other}`"))),
            };
            let elem = |s: &str| alg.parse_element(s).ok_or_else(|| CliError::parse(format!("cannot read `{s}` in H")));
            for k in theta.keys() {
                if !alg.names.contains(k) {
                    return Err(CliError::invalid(format!("`{k}` is not a basis element of H")));
                }
            }
            let images = alg
                .names
                .iter()
                .map(|n| elem(theta.get(n).map_or(n.as_str(), String::as_str)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(gwa_presentation(&alg, &images, &elem(z0)?, &elem(z1)?)?)
        }
    }
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

impl AlgebraSpec {
    /// Canonical spec text; parsing it gives back the same canonical text.
    pub fn to_text(&self) -> String {
        let mut s = format!("[field]\nkind = {}\n\n", quote(self.field.name()));
        match (&self.preset, &self.kind) {
            (Some(p), _) => {
                let _ = writeln!(s, "[gwa]\npreset = {}", quote(p));
            }
            (None, AlgebraKind::Gwa(a)) => {
                s.push_str("[cartan]\n");
                match (a.family(), a.theta()) {
                    (BaseFamily::Poly, Endo::PolyAffine { a: x, b }) => {
                        let t = BaseElement::Poly(BTreeMap::from([(1, x.clone()), (0, b.clone())])).pruned();
                        let _ = writeln!(s, "family = \"poly\"\ntheta = {}", quote(&t.to_string()));
                    }
                    (BaseFamily::Group(g), Endo::CharTwist(chi)) => {
                        let chi: Vec<String> = chi.iter().map(|c| quote(&c.to_string())).collect();
                        let tor: Vec<String> = g.torsion.iter().map(u64::to_string).collect();
                        let _ = writeln!(
                            s,
                            "family = \"group\"\nrank = {}\ntorsion = [{}]\nchi = [{}]",
                            g.rank,
                            tor.join(", "),
                            chi.join(", ")
                        );
                    }
                    (BaseFamily::FunZ, Endo::ZShift(k)) => {
                        let _ = writeln!(s, "family = \"funz\"\nshift = {k}");
                    }
                    _ => unreachable!("validated at construction"),
                }
                let _ = writeln!(s, "\n[gwa]\nz0 = {}\nz1 = {}", quote(&a.z0().to_string()), quote(&a.z1().to_string()));
            }
            (None, AlgebraKind::Rtm { monoid, c }) => {
                s.push_str("[rtm]\n");
                let rats = |v: &[BigRational]| -> String {
                    v.iter().map(|r| quote(&Scalar::from(r.clone()).to_string())).collect::<Vec<_>>().join(", ")
                };
                let lat = |l: &Lattice| {
                    let ps: Vec<String> = l.primes.iter().map(u64::to_string).collect();
                    format!("eta = {}\nprimes = [{}]\n", quote(&Scalar::from(l.eta.clone()).to_string()), ps.join(", "))
                };
                match monoid {
                    Rtm::AbelianCone(l) => s.push_str(&format!("kind = \"cone\"\n{}", lat(l))),
                    Rtm::FreeMonoid(k) => s.push_str(&format!("kind = \"free\"\nk = {k}\n")),
                    Rtm::Semidirect { zeta, lattice } => {
                        s.push_str(&format!("kind = \"semidirect\"\n{}zeta = [{}]\n", lat(lattice), rats(zeta)))
                    }
                    Rtm::Sampled(t) => {
                        let labels: Vec<String> = t.labels.iter().map(|l| quote(l)).collect();
                        let pos: Vec<String> = t.positive.iter().map(bool::to_string).collect();
                        let idx = |o: &Option<usize>| o.map_or("-1".to_string(), |i| i.to_string());
                        let mul: Vec<String> =
                            t.mul.iter().map(|r| format!("[{}]", r.iter().map(idx).collect::<Vec<_>>().join(", "))).collect();
                        let inv: Vec<String> = t.inv.iter().map(idx).collect();
                        let act: Vec<String> = t.act.iter().map(|((p, x), y)| format!("[{p}, {x}, {y}]")).collect();
                        let _ = writeln!(
                            s,
                            "kind = \"sampled\"\nlabels = [{}]\npositive = [{}]\nmul = [{}]\ninv = [{}]\nact = [{}]",
                            labels.join(", "),
                            pos.join(", "),
                            mul.join(", "),
                            inv.join(", "),
                            act.join(", ")
                        );
                    }
                }
                let cs: Vec<String> = c.iter().map(|x| quote(&x.to_string())).collect();
                let _ = writeln!(s, "c = [{}]", cs.join(", "));
            }
            (None, AlgebraKind::Presentation(p)) => {
                s.push_str("[presentation]\n");
                match p {
                    PresentationSpec::Rules(r) => {
                        let text = Presentation::parse(r).map(|p| p.to_text()).unwrap_or_else(|_| r.clone());
                        let _ = writeln!(s, "rules = {}", quote(&text));
                    }
                    PresentationSpec::FiniteGwa { h, torsion, theta, z0, z1 } => {
                        let tor: Vec<String> = torsion.iter().map(u64::to_string).collect();
                        let th: Vec<String> = theta.iter().map(|(k, v)| format!("{} = {}", quote(k), quote(v))).collect();
                        let _ = writeln!(
                            s,
                            "h = {}\ntorsion = [{}]\ntheta = {{ {} }}\nz0 = {}\nz1 = {}",
                            quote(h),
                            tor.join(", "),
                            th.join(", "),
                            quote(z0),
                            quote(z1)
                        );
                    }
                }
            }
            (None, AlgebraKind::Tensor(fs)) => {
                let names: Vec<String> = fs.iter().map(|f| quote(f.preset.as_deref().unwrap_or("?"))).collect();
                let _ = writeln!(s, "[tensor]\nfactors = [{}]", names.join(", "));
            }
        }
        s
    }

    pub fn gwa(&self) -> Result<&TriangularGwa, CliError> {
        match &self.kind {
            AlgebraKind::Gwa(a) => Ok(a),
            _ => Err(CliError::invalid("this subcommand needs a GWA spec")),
        }
    }
}

/// Splits on commas outside brackets.
pub fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

pub const PRESETS: &[&str] = &[
    "weyl",
    "dispin",
    "smith(f)",
    "woronowicz(nu)",
    "jing-zhang(q)",
    "uq-sl2",
    "down-up(r,gamma,s,f)",
    "quantum-gwa(rank,[torsion],[alpha],z0,z1)",
    "continuous-hecke-gl1(kappa)",
    "wq(l,m,n,s,gamma,f)",
];

/// Resolves a preset name such as `smith(h^2)` or `down-up(1,1,2,h)`.
pub fn parse_preset(src: &str) -> Result<AlgebraSpec, CliError> {
    let src = src.trim();
    let (name, args) = match src.split_once('(') {
        Some((n, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| CliError::parse(format!("unbalanced parentheses in `{src}`")))?;
            (n.trim(), split_top(inner))
        }
        None => (src, vec![]),
    };
    let q = FieldChoice::RationalFunctions;
    let argc = |n: usize| -> Result<(), CliError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(CliError::invalid(format!("preset `{name}` takes {n} arguments, got {}", args.len())))
        }
    };
    let poly = |s: &str| base_in(&BaseFamily::Poly, q, s);
    let sc = |s: &str| scalar_in(q, s);
    let int = |s: &str| s.trim().parse::<i64>().map_err(|_| CliError::parse(format!("`{s}` must be an integer")));
    let algebra = match name {
        "weyl" => {
            argc(0)?;
            TriangularGwa::weyl()
        }
        "dispin" => {
            argc(0)?;
            TriangularGwa::dispin()
        }
        "uq-sl2" => {
            argc(0)?;
            TriangularGwa::uq_sl2()
        }
        "smith" => {
            argc(1)?;
            TriangularGwa::smith(poly(&args[0])?)?
        }
        "woronowicz" | "jing-zhang" => {
            let p = match args.len() {
                0 => Scalar::q(),
                1 => sc(&args[0])?,
                n => return Err(CliError::invalid(format!("preset `{name}` takes at most 1 argument, got {n}"))),
            };
            if name == "woronowicz" {
                TriangularGwa::woronowicz(p)?
            } else {
                TriangularGwa::jing_zhang(p)?
            }
        }
        "down-up" => {
            argc(4)?;
            TriangularGwa::down_up(sc(&args[0])?, sc(&args[1])?, sc(&args[2])?, poly(&args[3])?)?
        }
        "quantum-gwa" => {
            argc(5)?;
            let list = |s: &str| -> Result<Vec<String>, CliError> {
                let inner = s.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']'));
                Ok(split_top(inner.ok_or_else(|| CliError::parse(format!("`{s}` must be a [list]")))?)
                    .into_iter()
                    .filter(|x| !x.is_empty())
                    .collect())
            };
            let torsion = list(&args[1])?.iter().map(|t| int(t).map(|n| n as u64)).collect::<Result<_, _>>()?;
            let shape = GroupShape::new(int(&args[0])? as usize, torsion)?;
            let alpha = list(&args[2])?.iter().map(|a| sc(a)).collect::<Result<_, _>>()?;
            let fam = BaseFamily::Group(shape.clone());
            TriangularGwa::quantum_gwa(shape, alpha, base_in(&fam, q, &args[3])?, base_in(&fam, q, &args[4])?)?
        }
        "continuous-hecke-gl1" => {
            argc(1)?;
            TriangularGwa::continuous_hecke_gl1(base_in(&BaseFamily::FunZ, q, &args[0])?)?
        }
        "wq" => {
            argc(6)?;
            TriangularGwa::wq(int(&args[0])?, int(&args[1])?, int(&args[2])?, sc(&args[3])?, sc(&args[4])?, poly(&args[5])?)?
        }
        _ => return Err(CliError::invalid(format!("unknown preset `{name}`; known: {}", PRESETS.join(", ")))),
    };
    let uses_q = [algebra.z0().to_string(), algebra.z1().to_string(), algebra.theta().to_string()].iter().any(|s| s.contains('q'));
    let field = if uses_q { FieldChoice::RationalFunctions } else { FieldChoice::Rationals };
    Ok(AlgebraSpec { field, preset: Some(src.to_string()), kind: AlgebraKind::Gwa(algebra) })
}

/// A path to a spec file, or a preset name.
pub fn load_spec(arg: &str) -> Result<(String, AlgebraSpec), CliError> {
    let p = Path::new(arg);
    if p.is_file() {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::new(ErrorCode::Io, format!("{arg}: {e}")))?;
        let spec = parse_spec(&text).map_err(|e| CliError::new(e.code, format!("{arg}: {}", e.message)))?;
        Ok((text, spec))
    } else if arg.ends_with(".toml") || arg.contains('/') {
        Err(CliError::new(ErrorCode::Io, format!("{arg}: no such spec file")))
    } else {
        Ok((arg.to_string(), parse_preset(arg)?))
    }
}

/// `name=value` pairs against the Cartan generators.
pub fn parse_weight(family: &BaseFamily, src: &str) -> Result<Weight, CliError> {
    let mut vals: BTreeMap<String, Scalar> = BTreeMap::new();
    for part in split_top(src) {
        let (k, v) = part.split_once('=').ok_or_else(|| CliError::parse(format!("weights are `name=value`, got `{part}`")))?;
        vals.insert(k.trim().to_string(), expr::parse_scalar(v.trim())?);
    }
    let mut take = |k: &str| vals.remove(k).ok_or_else(|| CliError::invalid(format!("weight needs a value for `{k}`")));
    let w = match family {
        BaseFamily::Poly => Weight::Poly(take("h")?),
        BaseFamily::FunZ => {
            let v = take("m").or_else(|_| take("t"))?;
            let m = v.as_integer().ok_or_else(|| CliError::invalid("a point of Z must be an integer"))?;
            Weight::ZPoint(i64::try_from(m).map_err(|_| CliError::invalid("point out of range"))?)
        }
        BaseFamily::Group(s) => Weight::Group(s.generator_names().iter().map(|n| take(n)).collect::<Result<_, _>>()?),
    };
    if let Some(k) = vals.keys().next() {
        return Err(CliError::invalid(format!("`{k}` is not a Cartan generator")));
    }
    w.validate(family)?;
    Ok(w)
}

/// Expressions in `u`, `d` and the Cartan generators.
struct GwaDomain<'a> {
    a: &'a TriangularGwa,
    allow_q: bool,
}

impl Domain for GwaDomain<'_> {
    type V = GwaElement;
    fn scalar(&self, c: Scalar) -> GwaElement {
        self.a.scalar(c)
    }
    fn var(&self, name: &str, index: Option<i64>) -> Option<GwaElement> {
        match (name, index) {
            ("u", None) => Some(self.a.u()),
            ("d", None) => Some(self.a.d()),
            _ => expr::BaseDomain { family: self.a.family(), allow_q: self.allow_q }.var(name, index).map(GwaElement::from_h),
        }
    }
    fn add(&self, x: &GwaElement, y: &GwaElement) -> GwaElement {
        x.add(y)
    }
    fn mul(&self, x: &GwaElement, y: &GwaElement) -> GwaElement {
        self.a.multiply(x, y).expect("both factors live in the same algebra")
    }
    fn as_scalar(&self, v: &GwaElement) -> Option<Scalar> {
        if v.is_zero() {
            return Some(Scalar::zero());
        }
        (v.terms().len() == 1).then(|| v.coefficient(0, 0)?.as_constant()).flatten()
    }
    fn inverse(&self, v: &GwaElement) -> Option<GwaElement> {
        let h = (v.terms().len() == 1).then(|| v.coefficient(0, 0)).flatten()?;
        expr::BaseDomain { family: self.a.family(), allow_q: self.allow_q }.inverse(h).map(GwaElement::from_h)
    }
}

pub fn parse_gwa_element(a: &TriangularGwa, field: FieldChoice, src: &str) -> Result<GwaElement, CliError> {
    Ok(expr::parse_in(&GwaDomain { a, allow_q: field.allows_q() }, src)?)
}

// ---------------------------------------------------------------------------
// classical limit

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitRow {
    pub k: u64,
    pub quantum: Scalar,
    pub at_q_one: Scalar,
    pub classical: Scalar,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalLimitReport {
    pub x: Scalar,
    /// `lambda(K) = 1 - x l (q - 1) / gamma`.
    pub quantum_weight: Scalar,
    pub rows: Vec<LimitRow>,
    /// Zeros of `lambda_q(z~_k)` as functions of q.
    pub generic_maximal_degrees: Vec<u64>,
    /// Zeros after setting q = 1.
    pub limit_maximal_degrees: Vec<u64>,
    pub classical_maximal_degrees: Vec<u64>,
    pub all_equal: bool,
}

/// Compares `lambda_q(z~_k)` in `W_q(l, m, n)` at `q = 1` with
/// `lambda_x(z~_k)` in the down-up algebra `W(F[h], h + gamma, f/s, 1/s)`.
#[allow(clippy::too_many_arguments)]
pub fn classical_limit(
    l: i64,
    m: i64,
    n: i64,
    s: &Scalar,
    gamma: &Scalar,
    f: &BaseElement,
    x: &BigRational,
    n_max: u64,
) -> Result<ClassicalLimitReport, CliError> {
    if gamma.is_zero() {
        return Err(CliError::invalid("gamma must be nonzero"));
    }
    if !s.is_rational() || !gamma.is_rational() {
        return Err(CliError::invalid("s and gamma must be rational"));
    }
    let quantum = TriangularGwa::wq(l, m, n, s.clone(), gamma.clone(), f.clone())?;
    let classical = TriangularGwa::down_up(Scalar::one(), gamma.clone(), s.clone(), f.clone())?;
    let xs = Scalar::from(x.clone());
    let lk = Scalar::one() - &xs * Scalar::int(l) * (Scalar::q() - Scalar::one()) / gamma.clone();
    let qv = quantum.weighted_z_tilde(&Weight::Group(vec![lk.clone()]), n_max as usize)?;
    let cv = classical.weighted_z_tilde(&Weight::Poly(xs.clone()), n_max as usize)?;
    let mut rows = Vec::new();
    for k in 1..=n_max {
        let qk = qv.positive[k as usize].clone();
        let at_q_one = Scalar::from(qk.specialize(&BigRational::one())?);
        let ck = cv.positive[k as usize].clone();
        rows.push(LimitRow { k, equal: at_q_one == ck, quantum: qk, at_q_one, classical: ck });
    }
    let degrees = |f: &dyn Fn(&LimitRow) -> &Scalar| rows.iter().filter(|r| f(r).is_zero()).map(|r| r.k).collect::<Vec<_>>();
    let generic_maximal_degrees = degrees(&|r| &r.quantum);
    let limit_maximal_degrees = degrees(&|r| &r.at_q_one);
    let classical_maximal_degrees = degrees(&|r| &r.classical);
    let all_equal = rows.iter().all(|r| r.equal) && limit_maximal_degrees == classical_maximal_degrees;
    Ok(ClassicalLimitReport {
        x: xs,
        quantum_weight: lk,
        rows,
        generic_maximal_degrees,
        limit_maximal_degrees,
        classical_maximal_degrees,
        all_equal,
    })
}

// ---------------------------------------------------------------------------
// command line

#[derive(Parser, Debug)]
#[command(name = "rta", version, about = "Exact computations for triangular GWAs, category O and triangular monoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit the JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Exit with status 3 when a result is only window-certified.
    #[arg(long, global = true)]
    pub require_certified: bool,
    /// Worker threads for weight lists.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct Bounds {
    /// Degree bound for module computations.
    #[arg(long, default_value_t = 50)]
    pub bound: u64,
    /// Scan window for the polynomial-exponential solver.
    #[arg(long, default_value_t = cat_o::DEFAULT_WINDOW)]
    pub window: u64,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RtmFlags {
    /// cone, free, semidirect or sampled (sampled needs a spec file).
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub primes: Vec<i64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub zeta: Vec<String>,
    #[arg(long)]
    pub k: Option<i64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Confluence of a finite presentation or a GWA over a finite group.
    CheckPbw {
        spec: String,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
    /// Normal form of an expression in u, d and the Cartan generators.
    Nf {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// z'_n and z~_n for |n| <= N, optionally evaluated at a weight.
    Zelems {
        spec: String,
        #[arg(long, default_value_t = 4)]
        n: i64,
        #[arg(long)]
        weight: Option<String>,
    },
    /// Gram diagonal xi(i(d^n) d^n) against the product of z~_j.
    Shapovalov {
        spec: String,
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long)]
        weight: Option<String>,
    },
    /// Maximal degrees, Gram values and finiteness of Verma modules
    Verma {
        spec: String,
        #[arg(long, required = true)]
        weight: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Linkage class, decomposition and Cartan matrices at each weight
    Block {
        spec: String,
        #[arg(long, required = true)]
        weight: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Quadratic Casimir of a GWA, or Omega(Q) and center witnesses of an
    /// RTM algebra.
    Casimir {
        spec: String,
        #[arg(long)]
        weight: Vec<String>,
        #[arg(long, default_value_t = 10)]
        n: i64,
        /// Finite subset of E >= 0 for RTM algebras.
        #[arg(long, value_delimiter = ',')]
        qminus: Vec<String>,
    },
    /// Integer zeros of sum p_j(n) a_j^n, each term given as `p(n)@a`.
    Polyexp {
        #[arg(long = "term", required = true, allow_hyphen_values = true)]
        terms: Vec<String>,
        #[arg(long, default_value_t = cat_o::DEFAULT_WINDOW)]
        window: u64,
    },
    /// Cocycle conditions of a triangular monoid on a ball
    RtmCheck {
        spec: Option<String>,
        #[command(flatten)]
        flags: RtmFlags,
        #[arg(long, default_value_t = 3)]
        ball: u32,
    },
    /// Whether a triangular monoid is based and discretely graded, with simple roots
    RtmClassify {
        spec: Option<String>,
        #[command(flatten)]
        flags: RtmFlags,
    },
    /// Normal form of an expression in the algebra of a triangular monoid
    RtmNf {
        spec: Option<String>,
        #[command(flatten)]
        flags: RtmFlags,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Maximal vectors of the Verma module at a point `e;n1,..,nk`.
    RtmVerma {
        spec: Option<String>,
        #[command(flatten)]
        flags: RtmFlags,
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Block of a tensor product: one --weight per factor.
    TensorBlock {
        #[arg(required = true, num_args = 1..)]
        specs: Vec<String>,
        #[arg(long, required = true)]
        weight: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Compare the quantization W_q(l,m,n) at q = 1 with its classical down-up algebra
    ClassicalLimit {
        #[arg(long, allow_hyphen_values = true)]
        l: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        s: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long)]
        f: String,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,
        #[arg(long, default_value_t = 6)]
        n_max: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub input_digest: String,
    pub version: String,
    pub certification: Vec<String>,
    pub result: Value,
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn cert_name(c: &Certification) -> String {
    match c {
        Certification::Certified => "Certified".into(),
        Certification::WindowOnly(w) => format!("WindowOnly({w})"),
    }
}

struct Outcome {
    inputs: Vec<String>,
    certification: Vec<String>,
    result: Value,
}

fn par_map<T: Send, R: Send>(jobs: usize, items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    if jobs <= 1 {
        return items.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    pool.install(|| items.into_par_iter().map(f).collect())
}

fn rtm_spec(spec: &Option<String>, flags: &RtmFlags) -> Result<(String, Rtm, Vec<Scalar>), CliError> {
    if let Some(s) = spec {
        let (text, parsed) = load_spec(s)?;
        return match parsed.kind {
            AlgebraKind::Rtm { monoid, c } => Ok((text, monoid, c)),
            _ => Err(CliError::invalid("this subcommand needs an [rtm] spec")),
        };
    }
    let kind = flags.kind.clone().unwrap_or_else(|| if flags.zeta.is_empty() { "cone".into() } else { "semidirect".into() });
    let m = rtm_from_parts(&kind, flags.eta.as_deref(), &flags.primes, flags.zeta.clone(), flags.k, None)?;
    let c = flags.c.iter().map(|x| scalar_in(FieldChoice::RationalFunctions, x)).collect::<Result<_, _>>()?;
    Ok((format!("{flags:?}"), m, c))
}

fn azeta(m: &Rtm, c: Vec<Scalar>) -> Result<AZeta, CliError> {
    let k = m.cone().map_or(0, |x| x.k);
    let c = if c.is_empty() { vec![Scalar::zero(); k] } else { c };
    Ok(AZeta::new(m, c)?)
}

fn parse_group_el(src: &str) -> Result<GroupEl, CliError> {
    let (e, n) = src.split_once(';').unwrap_or((src, ""));
    let n = n
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<i64>().map_err(|_| CliError::parse(format!("`{s}` must be an integer"))))
        .collect::<Result<_, _>>()?;
    Ok(GroupEl { e: rat_in(e)?, n })
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let jobs = cli.jobs.max(1);
    let out = |inputs: Vec<String>, certification: Vec<String>, result: Value| Outcome { inputs, certification, result };
    match &cli.command {
        Command::CheckPbw { spec, steps } => {
            let (text, s) = load_spec(spec)?;
            let p = match &s.kind {
                AlgebraKind::Presentation(p) => build_presentation(p)?,
                AlgebraKind::Gwa(a) => a
                    .finite_model()
                    .ok_or_else(|| CliError::invalid("check-pbw needs a finite-dimensional Cartan"))?
                    .presentation()?,
                _ => return Err(CliError::invalid("check-pbw needs a presentation or a GWA over a finite group")),
            };
            let verdict = p.check_confluence(*steps, *steps)?;
            Ok(out(vec![text], vec![], json!({ "presentation": p.to_text(), "verdict": to_json(&verdict) })))
        }
        Command::Nf { spec, expr } => {
            let (text, s) = load_spec(spec)?;
            let nf = match &s.kind {
                AlgebraKind::Gwa(a) => parse_gwa_element(a, s.field, expr)?.to_string(),
                AlgebraKind::Presentation(p) => {
                    let p = build_presentation(p)?;
                    let x = p.parse_poly(expr).ok_or_else(|| CliError::parse(format!("cannot read `{expr}`")))?;
                    p.normal_form(&x, 100_000)?.render(p.generators())
                }
                _ => return Err(CliError::invalid("nf needs a GWA or a presentation")),
            };
            Ok(out(vec![text, expr.clone()], vec![], json!({ "input": expr, "normal_form": nf })))
        }
        Command::Zelems { spec, n, weight } => {
            let (text, s) = load_spec(spec)?;
            let a = s.gwa()?;
            let n = n.abs();
            let elems: Vec<Value> = (-n..=n).map(|k| to_json(&a.z_elements(k))).collect();
            let mut result = json!({ "algebra": a.to_string(), "elements": elems });
            if let Some(w) = weight {
                let w = parse_weight(a.family(), w)?;
                let v = a.weighted_z_tilde(&w, n as usize)?;
                let vals: BTreeMap<String, Scalar> = (-n..=n).map(|k| (k.to_string(), v.at(k).clone())).collect();
                result["weight"] = to_json(&w);
                result["values"] = to_json(&vals);
            }
            Ok(out(vec![text, weight.clone().unwrap_or_default()], vec![], result))
        }
        Command::Shapovalov { spec, n, weight } => {
            let (text, s) = load_spec(spec)?;
            let a = s.gwa()?;
            let w = weight.as_deref().map(|w| parse_weight(a.family(), w)).transpose()?;
            let mut rows = Vec::new();
            let mut off_diagonal_zero = true;
            let mut prod = BaseElement::one(a.family());
            for k in 0..=*n {
                if k > 0 {
                    prod = &prod * &a.z_tilde(k as i64);
                }
                let dk = a.pow(&a.d(), k)?;
                let gram = a.shapovalov(&dk, &dk)?;
                for j in 0..k {
                    if !a.shapovalov(&a.pow(&a.d(), j)?, &dk)?.is_zero() {
                        off_diagonal_zero = false;
                    }
                }
                let mut row = json!({ "n": k, "gram": to_json(&gram), "product": to_json(&prod), "equal": gram == prod });
                if let Some(w) = &w {
                    row["value"] = to_json(&gram.evaluate(w)?);
                }
                rows.push(row);
            }
            Ok(out(vec![text, weight.clone().unwrap_or_default()], vec![], json!({ "diagonal": rows, "off_diagonal_zero": off_diagonal_zero })))
        }
        Command::Verma { spec, weight, bounds } | Command::Block { spec, weight, bounds } => {
            let (text, s) = load_spec(spec)?;
            let a = s.gwa()?;
            let ws = weight.iter().map(|w| parse_weight(a.family(), w)).collect::<Result<Vec<_>, _>>()?;
            let block = matches!(cli.command, Command::Block { .. });
            let results: Vec<Result<(Value, String), CliError>> = par_map(jobs, ws, |w| {
                if block {
                    let r = cat_o::block_report(a, &w, bounds.bound, bounds.window)?;
                    Ok((to_json(&r), cert_name(&r.certification)))
                } else {
                    let r = cat_o::verma_report(a, &w, bounds.bound, bounds.window)?;
                    let fin = cat_o::finiteness_certificate(a, &w, bounds.window)?;
                    let c = if r.series_certified { "Certified".to_string() } else { format!("WindowOnly({})", r.bound) };
                    Ok((json!({ "verma": to_json(&r), "finiteness": to_json(&fin) }), c))
                }
            });
            let mut reports = Vec::new();
            let mut certs = Vec::new();
            for r in results {
                let (v, c) = r?;
                reports.push(v);
                certs.push(c);
            }
            let mut inputs = vec![text];
            inputs.extend(weight.iter().cloned());
            Ok(out(inputs, certs, json!({ "reports": reports })))
        }
        Command::Casimir { spec, weight, n, qminus } => {
            let (text, s) = load_spec(spec)?;
            if let AlgebraKind::Rtm { monoid, c } = &s.kind {
                let a = azeta(monoid, c.clone())?;
                let q = qminus.iter().map(|x| rat_in(x)).collect::<Result<Vec<_>, _>>()?;
                let q = if q.is_empty() { vec![BigRational::zero()] } else { q };
                let report = rtm::casimir_commute(&a, &q, 2)?;
                let center = rtm::center_witness(&a, 2)?;
                return Ok(out(vec![text], vec![], json!({ "casimir": to_json(&report), "center": to_json(&center) })));
            }
            let a = s.gwa()?;
            let outcome = a.casimir()?;
            let mut result = json!({ "outcome": to_json(&outcome) });
            if let CasimirOutcome::Found { zeta, omega } = &outcome {
                let mut gens = vec![("u".to_string(), a.u()), ("d".to_string(), a.d())];
                match a.family() {
                    BaseFamily::Poly => gens.push(("h".into(), GwaElement::from_h(BaseElement::h()))),
                    BaseFamily::FunZ => gens.push(("t[0]".into(), GwaElement::from_h(BaseElement::point(0)))),
                    BaseFamily::Group(sh) => {
                        for (i, name) in sh.generator_names().into_iter().enumerate() {
                            let mut g = sh.identity();
                            g[i] = 1;
                            gens.push((name, GwaElement::from_h(BaseElement::monomial(sh, g, Scalar::one()))));
                        }
                    }
                }
                let mut comm = BTreeMap::new();
                for (name, g) in gens {
                    comm.insert(name, a.commutator(omega, &g)?.to_string());
                }
                result["commutators"] = to_json(&comm);
                let mut checks = Vec::new();
                for w in weight {
                    let w = parse_weight(a.family(), w)?;
                    let v = a.weighted_z_tilde(&w, n.unsigned_abs() as usize)?;
                    let at = zeta.evaluate(&w)?;
                    for k in 1..=n.abs() {
                        let shifted = dual_act(a.theta(), -k, &w)?;
                        let diff = &at - &zeta.evaluate(&shifted)?;
                        checks.push(json!({ "weight": to_json(&w), "n": k, "difference": to_json(&diff), "z_tilde": to_json(v.at(k)), "equal": &diff == v.at(k) }));
                    }
                }
                result["central_character"] = Value::Array(checks);
            }
            let mut inputs = vec![text];
            inputs.extend(weight.iter().cloned());
            Ok(out(inputs, vec![], result))
        }
        Command::Polyexp { terms, window } => {
            let mut parsed = Vec::new();
            for t in terms {
                let (p, base) = t.rsplit_once('@').ok_or_else(|| CliError::parse(format!("terms are `p(n)@base`, got `{t}`")))?;
                let m = expr::parse_in(&UniDomain { var: "n" }, p)?;
                let top = m.keys().next_back().copied().unwrap_or(0);
                let coeffs = (0..=top).map(|e| m.get(&e).cloned().unwrap_or_default()).collect();
                parsed.push((coeffs, expr::parse_scalar(base)?));
            }
            let problem = PolyExpProblem { terms: parsed.clone(), window: *window };
            let sol = cat_o::polyexp_solve(&problem)?;
            let shown = ExpPoly::new(parsed).to_string();
            Ok(out(terms.clone(), vec![cert_name(&sol.status)], json!({ "equation": shown, "solution": to_json(&sol) })))
        }
        Command::RtmCheck { spec, flags, ball } => {
            let (text, m, _) = rtm_spec(spec, flags)?;
            let v = rtm::check_cocycles(&m, *ball)?;
            Ok(out(vec![text, ball.to_string()], vec![], json!({ "ball": ball, "verdict": to_json(&v) })))
        }
        Command::RtmClassify { spec, flags } => {
            let (text, m, _) = rtm_spec(spec, flags)?;
            Ok(out(vec![text], vec![], to_json(&rtm::classify(&m)?)))
        }
        Command::RtmNf { spec, flags, expr } => {
            let (text, m, c) = rtm_spec(spec, flags)?;
            let a = azeta(&m, c)?;
            let x = a.parse(expr)?;
            Ok(out(vec![text, expr.clone()], vec![], json!({ "input": expr, "normal_form": x.to_string() })))
        }
        Command::RtmVerma { spec, flags, weight, depth } => {
            let (text, m, c) = rtm_spec(spec, flags)?;
            let a = azeta(&m, c)?;
            let g0 = parse_group_el(weight)?;
            let r = rtm::maximal_vector_check(&a, &g0, *depth)?;
            Ok(out(vec![text, weight.clone()], vec![], to_json(&r)))
        }
        Command::TensorBlock { specs, weight, bounds } => {
            let mut factors = Vec::new();
            for sp in specs {
                let (text, s) = load_spec(sp)?;
                match s.kind {
                    AlgebraKind::Tensor(members) => factors.extend(members.into_iter().map(|m| (m.to_text(), m))),
                    _ => factors.push((text, s)),
                }
            }
            if factors.len() != weight.len() {
                return Err(CliError::invalid(format!("{} factors but {} weights", factors.len(), weight.len())));
            }
            let mut inputs = Vec::new();
            let mut reports = Vec::new();
            for ((text, s), w) in factors.iter().zip(weight) {
                let a = s.gwa()?;
                reports.push(cat_o::block_report(a, &parse_weight(a.family(), w)?, bounds.bound, bounds.window)?);
                inputs.push(text.clone());
                inputs.push(w.clone());
            }
            let t = cat_o::tensor_block(&reports);
            Ok(out(inputs, vec![cert_name(&t.certification)], to_json(&t)))
        }
        Command::ClassicalLimit { l, m, n, s, gamma, f, x, n_max } => {
            let sv = scalar_in(FieldChoice::Rationals, s)?;
            let gv = scalar_in(FieldChoice::Rationals, gamma)?;
            let fv = base_in(&BaseFamily::Poly, FieldChoice::Rationals, f)?;
            let reports = x
                .iter()
                .map(|xi| classical_limit(*l, *m, *n, &sv, &gv, &fv, &rat_in(xi)?, *n_max))
                .collect::<Result<Vec<_>, _>>()?;
            let inputs = vec![format!("wq({l},{m},{n},{s},{gamma},{f})"), x.join(",")];
            Ok(out(inputs, vec![], json!({ "reports": to_json(&reports) })))
        }
    }
}

fn digest(parts: &[String]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs a parsed command line; `args` is echoed in the report.
pub fn run(cli: &Cli, args: &[String]) -> Result<Report, CliError> {
    let o = execute(cli)?;
    Ok(Report {
        command: args.to_vec(),
        input_digest: digest(&o.inputs),
        version: VERSION.to_string(),
        certification: o.certification,
        result: o.result,
    })
}

fn render_value(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_value(&p, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                render_value(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Array(a) => {
            let items: Vec<String> = a.iter().map(plain).collect();
            let _ = writeln!(out, "{prefix:<40} [{}]", items.join(", "));
        }
        x => {
            let _ = writeln!(out, "{prefix:<40} {}", plain(x));
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        x => x.to_string(),
    }
}

/// Human-readable rendering of a report.
pub fn render_table(r: &Report) -> String {
    let mut s = format!("rta {}  {}\n", r.version, r.command.join(" "));
    let _ = writeln!(s, "{:<40} {}", "input_digest", r.input_digest);
    if !r.certification.is_empty() {
        let _ = writeln!(s, "{:<40} {}", "certification", r.certification.join(", "));
    }
    render_value("", &r.result, &mut s);
    s
}

/// Entry point of the binary: returns the exit status and the text for
/// stdout and stderr.
pub fn main_with(args: Vec<String>) -> (i32, String, String) {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 { (0, e.to_string(), String::new()) } else { (2, String::new(), format!("error[E_PARSE]: {e}")) };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).cloned().collect();
    match run(&cli, &echo) {
        Ok(r) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&r).expect("reports serialize") + "\n"
            } else {
                render_table(&r)
            };
            if cli.require_certified && r.certification.iter().any(|c| c != "Certified") {
                let e = CliError::new(ErrorCode::Uncertified, format!("uncertified result: {}", r.certification.join(", ")));
                return (e.code.exit_code(), text, format!("{e}\n"));
            }
            (0, text, String::new())
        }
        Err(e) => (e.code.exit_code(), String::new(), format!("{e}\n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn run_args(a: &[&str]) -> (i32, String, String) {
        main_with(std::iter::once("rta").chain(a.iter().copied()).map(String::from).collect())
    }

    #[test]
    fn presets_resolve() {
        for p in ["weyl", "dispin", "uq-sl2", "smith(h^2)", "woronowicz", "jing-zhang(q)", "down-up(1,1,2,h)", "continuous-hecke-gl1(t[0]-t[2])", "wq(2,0,0,1,-1,h)", "quantum-gwa(1,[2],[3,-1],K+g,1/3)"] {
            parse_preset(p).unwrap_or_else(|e| panic!("{p}: {e}"));
        }
        assert!(parse_preset("smith(h,h)").is_err());
        assert_eq!(parse_preset("nope").unwrap_err().code, ErrorCode::Validation);
        let uq = parse_preset("uq-sl2").unwrap();
        assert_eq!(uq.field, FieldChoice::RationalFunctions);
        assert_eq!(parse_preset("dispin").unwrap().field, FieldChoice::Rationals);
    }

    #[test]
    fn down_up_fields_give_dispin() {
        let s = parse_spec("[gwa]\nf = \"h\"\nr = \"1\"\ngamma = \"-1\"\ns = \"1\"\n").unwrap();
        let d = TriangularGwa::dispin();
        let a = s.gwa().unwrap();
        assert_eq!((a.theta(), a.z0(), a.z1()), (d.theta(), d.z0(), d.z1()));
    }

    #[test]
    fn negative_exponent_in_poly_family() {
        let e = parse_spec("[cartan]\nfamily = \"poly\"\ntheta = \"h - 1\"\n[gwa]\nz0 = \"h^-2\"\n").unwrap_err();
        assert_eq!(e.code, ErrorCode::Parse);
        assert!(e.message.contains("column 3"), "{}", e.message);
        assert!(parse_spec("[field]\nkind = \"Q\"\n[cartan]\nfamily = \"poly\"\ntheta = \"q*h\"\n[gwa]\nz0 = \"h\"\n").is_err());
        assert_eq!(parse_spec("[gwa\n").unwrap_err().code, ErrorCode::Parse);
    }

    #[test]
    fn canonical_text_round_trips() {
        let texts = [
            "[cartan]\nfamily = \"group\"\nrank = 1\nchi = [\"q^-2\"]\n[gwa]\nz0 = \"(K - K^-1)/(q - q^-1)\"\n".to_string(),
            "[cartan]\nfamily = \"poly\"\ntheta = \"2*h + 1\"\n[gwa]\nz0 = \"h^2 - 1/3\"\nz1 = \"1/2\"\n".into(),
            "[cartan]\nfamily = \"funz\"\nshift = 1\n[gwa]\nz0 = \"t[0] - t[2]\"\n".into(),
            "[rtm]\nkind = \"semidirect\"\neta = \"1/2\"\nprimes = [2, 3]\nzeta = [\"3/2\"]\nc = [\"1\"]\n".into(),
            "[rtm]\nkind = \"sampled\"\nbase = \"free\"\nk = 1\nball = 2\n".into(),
            "[presentation]\nh = \"matrix-units\"\nz0 = \"e11\"\n".into(),
            "[tensor]\nfactors = [\"dispin\", \"uq-sl2\"]\n".into(),
            "[gwa]\npreset = \"smith(h^2)\"\n".into(),
        ];
        for t in texts {
            let once = parse_spec(&t).unwrap_or_else(|e| panic!("{t}: {e}")).to_text();
            let twice = parse_spec(&once).unwrap_or_else(|e| panic!("{once}: {e}")).to_text();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn weights() {
        let g = BaseFamily::Group(GroupShape::new(1, vec![2]).unwrap());
        assert_eq!(parse_weight(&g, "K=q^3, g=-1").unwrap(), Weight::Group(vec![Scalar::q().pow(3), Scalar::int(-1)]));
        assert!(parse_weight(&g, "K=2").is_err());
        assert!(parse_weight(&g, "K=2,g=3").is_err());
        assert!(parse_weight(&BaseFamily::Poly, "h=1,K=2").is_err());
        assert_eq!(parse_weight(&BaseFamily::FunZ, "m=-3").unwrap(), Weight::ZPoint(-3));
    }

    #[test]
    fn block_command() {
        let (code, out, err) = run_args(&["block", "uq-sl2", "--weight", "K=q^3", "--bound", "20", "--json"]);
        assert_eq!(code, 0, "{err}");
        let v: Value = serde_json::from_str(&out).unwrap();
        let rep = &v["result"]["reports"][0];
        assert_eq!(rep["members"].as_array().unwrap().len(), 2);
        assert_eq!(rep["certification"], json!("Certified"));
        assert_eq!(v["certification"], json!(["Certified"]));
        let again = run_args(&["block", "uq-sl2", "--weight", "K=q^3", "--bound", "20", "--json", "--jobs", "3"]).1;
        assert_eq!(serde_json::from_str::<Value>(&again).unwrap()["result"], v["result"]);
    }

    #[test]
    fn nf_and_polyexp() {
        let (code, out, _) = run_args(&["nf", "dispin", "--expr", "u*d", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["normal_form"], json!("h + d*u"));
        let (code, out, _) = run_args(&["polyexp", "--term", "1@2", "--term", "-n^2@1", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["solution"]["solutions"], json!([2, 4]));
        let (code, _, err) = run_args(&["polyexp", "--term", "1@2", "--term", "1@-2"]);
        assert_eq!((code, err.starts_with("error[E_VALIDATION]")), (2, true));
    }

    #[test]
    fn rtm_commands() {
        let (code, out, _) = run_args(&["rtm-classify", "--zeta", "2", "--primes", "2", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["based"], json!(false));
        let (code, out, _) = run_args(&["rtm-nf", "--zeta", "2", "--primes", "2", "--c", "1", "--expr", "x1+*x1-", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["normal_form"], json!("1 + x1-*x1+"));
        let (code, _, _) = run_args(&["rtm-check", "--kind", "free", "--k", "2", "--ball", "2"]);
        assert_eq!(code, 0);
    }

    #[test]
    fn classical_limit_smith() {
        let rep = classical_limit(2, 0, 0, &Scalar::one(), &Scalar::int(-1), &BaseElement::h(), &r(1), 6).unwrap();
        assert!(rep.all_equal, "{rep:?}");
        assert_eq!(rep.classical_maximal_degrees, vec![3]);
        // k - k(k-1)/2 at x = 1
        for row in &rep.rows {
            let k = row.k as i64;
            assert_eq!(row.classical, Scalar::int(k - k * (k - 1) / 2));
        }
        let zero = classical_limit(2, 0, 0, &Scalar::one(), &Scalar::int(-1), &BaseElement::zero(&BaseFamily::Poly), &r(1), 4).unwrap();
        assert!(zero.rows.iter().all(|r| r.quantum.is_zero() && r.classical.is_zero()));
    }

    #[test]
    fn pole_maps_to_its_own_code() {
        let e: CliError = ScalarError::PoleAtPoint { value: "1/(q - 1)".into(), point: "1".into() }.into();
        assert_eq!(e.code.as_str(), "E_POLE");
        assert_eq!(e.code.exit_code(), 2);
    }

    #[test]
    fn require_certified_exit() {
        let (code, _, _) = run_args(&["verma", "dispin", "--weight", "h=1", "--require-certified"]);
        assert_eq!(code, 0);
        let (code, _, _) = run_args(&["verma", "dispin", "--weight", "h=1/2,K=1"]);
        assert_eq!(code, 2);
    }
}
