use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::boolfn::{junta_support, BoolFn};
use crate::caps::{self, SizeCaps};
use crate::csp::{self, Instance};
use crate::error::{Error, Result};
use crate::poly::{self, Mask, MultilinearPoly};
use crate::rational::{self, Rational};
use crate::sa::{pe_apply, sa_value};
use crate::slack::{self, farkas_decompose, slack_functions, FarkasResult, PolyhedralRelaxation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelEntry {
    /// Signs of `x_J`, first coordinate of `J` first.
    pub assignment: String,
    /// `Σ_i x_i`.
    pub level: i64,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

/// `f(x) = g(x_J, Σ_i x_i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetricStructure {
    pub found: bool,
    #[serde(rename = "J", with = "poly::one_based")]
    pub j: Vec<usize>,
    pub table: Vec<LevelEntry>,
}

impl SymmetricStructure {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("structure serializes")
    }
}

fn level(n: usize, idx: u64) -> i64 {
    n as i64 - 2 * idx.count_ones() as i64
}

fn local_index(idx: u64, coords: &[usize]) -> u64 {
    coords.iter().enumerate().fold(0, |acc, (k, &v)| acc | ((idx >> v) & 1) << k)
}

fn level_table(f: &BoolFn, coords: &[usize]) -> Option<BTreeMap<(u64, i64), Rational>> {
    let mut seen: HashMap<(u64, i64), &Rational> = HashMap::new();
    for idx in 0..1u64 << f.n() {
        let key = (local_index(idx, coords), level(f.n(), idx));
        let v = f.value(idx);
        match seen.get(&key) {
            Some(prev) if *prev != v => return None,
            Some(_) => {}
            None => {
                seen.insert(key, v);
            }
        }
    }
    Some(seen.into_iter().map(|(k, v)| (k, v.clone())).collect())
}

/// Smallest `J` (then lexicographically first) with `f` a function of
/// `x_J` and the level.
pub fn detect_symmetric_structure(f: &BoolFn, d_max: usize) -> Result<SymmetricStructure> {
    caps::check("symmetric detector variables", f.n(), SizeCaps::global().symmetric_n)?;
    if 4 * d_max >= f.n() {
        return Err(Error::Parameter(format!("dMax = {d_max} must satisfy 4·dMax < n = {}", f.n())));
    }
    for mask in poly::subsets_up_to(f.n(), d_max) {
        let coords = poly::vars_of(mask);
        if let Some(table) = level_table(f, &coords) {
            let table = table
                .into_iter()
                .map(|((a, l), value)| LevelEntry { assignment: csp::format_assignment(coords.len(), a), level: l, value })
                .collect();
            return Ok(SymmetricStructure { found: true, j: coords, table });
        }
    }
    Ok(SymmetricStructure { found: false, j: Vec::new(), table: Vec::new() })
}

fn antidiagonal_index(m: usize, idx: u64) -> u64 {
    let low = (1u64 << m) - 1;
    idx | ((!idx & low) << m)
}

/// `h(x) = q(x, −x)`.
pub fn antidiagonal_restriction(q: &BoolFn) -> Result<BoolFn> {
    if q.n() % 2 != 0 {
        return Err(Error::Parameter(format!("antidiagonal restriction needs an even variable count, got {}", q.n())));
    }
    let m = q.n() / 2;
    BoolFn::from_fn(m, |x| q.value(antidiagonal_index(m, x)).clone())
}

/// Same map on the character basis: `χ_α(x,−x) = (−1)^{|α_R|} χ_{α_L ⊕ α_R}(x)`.
pub fn antidiagonal_poly(p: &MultilinearPoly) -> Result<MultilinearPoly> {
    if p.n() % 2 != 0 {
        return Err(Error::Parameter(format!("antidiagonal restriction needs an even variable count, got {}", p.n())));
    }
    let m = p.n() / 2;
    let low: Mask = (1u64 << m) - 1;
    let mut h = MultilinearPoly::zero(m);
    for (a, c) in p.terms() {
        let right = a >> m;
        let c = if poly::popcount(right) % 2 == 1 { -c.clone() } else { c.clone() };
        h.add_term((a & low) ^ right, c);
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosureCheck {
    pub full_group: bool,
    pub permutations_checked: usize,
    pub closed: bool,
    pub first_failure: Option<String>,
}

fn key(p: &MultilinearPoly) -> Vec<(Mask, Rational)> {
    p.terms().map(|(m, c)| (m, c.clone())).collect()
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    heap(n, &mut current, &mut out);
    out
}

/// Whether every permutation maps each polynomial into the family. Uses the
/// n-cycle and the transposition `(1 2)`, or all of `Sym(n)` when `full`.
pub fn check_closure(family: &[MultilinearPoly], n: usize, full: bool) -> ClosureCheck {
    let set: BTreeSet<Vec<(Mask, Rational)>> = family.iter().map(key).collect();
    let perms = if full {
        all_permutations(n)
    } else {
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let mut swap: Vec<usize> = (0..n).collect();
        if n >= 2 {
            swap.swap(0, 1);
        }
        vec![cycle, swap]
    };
    for sigma in &perms {
        for (i, p) in family.iter().enumerate() {
            if !set.contains(&key(&p.relabel(sigma, n))) {
                return ClosureCheck {
                    full_group: full,
                    permutations_checked: perms.len(),
                    closed: false,
                    first_failure: Some(format!(
                        "slack {} leaves the family under {:?}",
                        i + 1,
                        sigma.iter().map(|v| v + 1).collect::<Vec<_>>()
                    )),
                };
            }
        }
    }
    ClosureCheck { full_group: full, permutations_checked: perms.len(), closed: true, first_failure: None }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RestrictedSlack {
    pub slack: usize,
    #[serde(with = "poly::one_based")]
    pub support: Vec<usize>,
    pub is_junta: bool,
    pub nonnegative: bool,
    #[serde(with = "rational::serde_str")]
    pub pe_value: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SymmetricCheckReport {
    pub relaxation: String,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
    #[serde(with = "rational::serde_str")]
    pub sa_value: Rational,
    /// `p̃E(c − ℑ) = c − SA_d(ℑ₀)`.
    #[serde(with = "rational::serde_str")]
    pub gap: Rational,
    pub slack_count: usize,
    pub closure: ClosureCheck,
    pub decomposition_feasible: bool,
    #[serde(with = "rational::serde_opt")]
    pub lambda0: Option<Rational>,
    pub lambda: Option<Vec<String>>,
    /// Infeasibility certificate, keyed by decimal mask.
    pub certificate: Option<BTreeMap<String, String>>,
    pub certificate_verified: Option<bool>,
    pub restricted: Vec<RestrictedSlack>,
    pub all_juntas: bool,
    pub all_pe_nonnegative: bool,
    /// `c < SA_d(ℑ₀)` with every `h_i` a `d`-junta.
    pub contradiction_expected: bool,
    pub consistent: bool,
}

impl SymmetricCheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Decompose `c − ℑ′` over a permutation-closed relaxation on `2m`
/// variables and push the result through the antidiagonal.
pub fn symmetric_contradiction_check(
    inst0: &Instance,
    rel: Option<&PolyhedralRelaxation>,
    c: &Rational,
    d: usize,
) -> Result<SymmetricCheckReport> {
    let m = inst0.n();
    let n = 2 * m;
    let owned;
    let rel = match rel {
        Some(r) => r,
        None => {
            owned = slack::universal(n, d)?;
            &owned
        }
    };
    if rel.n() != n {
        return Err(Error::MalformedInput(format!("relaxation on {} variables, expected 2m = {n}", rel.n())));
    }
    let slacks = slack_functions(rel)?;
    let closure = check_closure(&slacks.polys, n, n <= 6);
    if !closure.closed {
        return Err(Error::Hypothesis(format!(
            "slack family is not closed under coordinate permutations: {}",
            closure.first_failure.clone().unwrap_or_default()
        )));
    }
    let sa = sa_value(inst0, d)?;
    let gap = c - &sa.value;

    let mut restricted = Vec::with_capacity(slacks.len());
    let mut hs = Vec::with_capacity(slacks.len());
    for (i, q) in slacks.polys.iter().enumerate() {
        let h = antidiagonal_poly(q)?;
        let table = BoolFn::new(m, h.to_table())?;
        let support = junta_support(&table);
        let nonnegative = table.values().iter().all(|v| !v.is_negative());
        let is_junta = support.len() <= d;
        let pe_value = pe_apply(&sa.pe, &h);
        if is_junta && nonnegative && pe_value.is_negative() {
            return Err(Error::Internal(format!("negative functional value on the nonnegative junta from slack {}", i + 1)));
        }
        restricted.push(RestrictedSlack { slack: i + 1, support, is_junta, nonnegative, pe_value });
        hs.push(h);
    }
    let all_juntas = restricted.iter().all(|r| r.is_junta);
    let all_pe_nonnegative = restricted.iter().all(|r| !r.pe_value.is_negative());
    let contradiction_expected = gap.is_negative() && all_juntas;

    let extended = csp::dummy_extend(inst0);
    let mut report = SymmetricCheckReport {
        relaxation: rel.name().to_string(),
        m,
        n,
        d,
        c: c.clone(),
        sa_value: sa.value.clone(),
        gap: gap.clone(),
        slack_count: slacks.len(),
        closure,
        decomposition_feasible: false,
        lambda0: None,
        lambda: None,
        certificate: None,
        certificate_verified: None,
        restricted,
        all_juntas,
        all_pe_nonnegative,
        contradiction_expected,
        consistent: true,
    };
    match farkas_decompose(c, &extended, rel)? {
        FarkasResult::Decomposition { lambda0, lambda } => {
            // p̃E applied to c − ℑ(x) = λ₀ + Σ λ_i h_i(x)
            let mut applied = lambda0.clone();
            for (l, h) in lambda.iter().zip(&hs) {
                if !l.is_zero() {
                    applied += l * pe_apply(&sa.pe, h);
                }
            }
            report.consistent = applied == gap && !contradiction_expected;
            report.decomposition_feasible = true;
            report.lambda = Some(lambda.iter().map(rational::format).collect());
            report.lambda0 = Some(lambda0);
        }
        FarkasResult::Infeasible { certificate } => {
            report.certificate_verified = Some(slack::verify_certificate(c, &extended, &certificate, &slacks));
            report.certificate =
                Some(certificate.terms().map(|(k, v)| (k.to_string(), rational::format(v))).collect());
        }
    }
    if !report.consistent {
        return Err(Error::Internal("decomposition contradicts the functional's sign".into()));
    }
    Ok(report)
}
