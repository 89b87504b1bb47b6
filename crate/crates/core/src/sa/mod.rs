//! Sherali–Adams relaxations as local expectation functionals, and the
//! edge-variable formulation over the metric polytope.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::csp::{self, Instance};
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, Relation, Sense, Status};
use crate::poly::{self, Mask, MultilinearPoly};
use crate::rational::{self, Rational};

mod edge;

pub use edge::{
    build_edge_sa_lp, edge_feasibility, edge_index, edge_pairs, edge_sa_value, edge_to_vertex, vertex_to_edge,
    EdgeCheck, EdgeFunctional, EdgeSaLp, TranslationReport,
};

/// Moments `X_α = p̃E χ_α` for `|α| ≤ d`. Absent entries are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoExpectation {
    n: usize,
    d: usize,
    moments: BTreeMap<Mask, Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPe {
    n: usize,
    d: usize,
    moments: BTreeMap<String, String>,
}

impl Serialize for PseudoExpectation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawPe {
            n: self.n,
            d: self.d,
            moments: self.moments.iter().map(|(m, c)| (m.to_string(), rational::format(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PseudoExpectation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPe::deserialize(d)?;
        let mut moments = BTreeMap::new();
        for (k, v) in &raw.moments {
            let m: Mask = k.parse().map_err(|_| serde::de::Error::custom(format!("moment key {k:?} is not a bitmask")))?;
            let c = rational::parse(v).map_err(serde::de::Error::custom)?;
            moments.insert(m, c);
        }
        PseudoExpectation::new(raw.n, raw.d, moments).map_err(serde::de::Error::custom)
    }
}

impl PseudoExpectation {
    pub fn new(n: usize, d: usize, moments: BTreeMap<Mask, Rational>) -> Result<Self> {
        if n > 64 {
            return Err(Error::MalformedInput(format!("{n} variables exceed the 64-bit mask width")));
        }
        match moments.get(&0) {
            Some(c) if c.is_one() => {}
            _ => return Err(Error::MalformedInput("moment of the empty set must be 1".into())),
        }
        for m in moments.keys() {
            if (n < 64 && m >> n != 0) || poly::popcount(*m) > d {
                return Err(Error::MalformedInput(format!(
                    "moment {:?} outside degree {d} on {n} variables",
                    poly::vars_of(*m).iter().map(|v| v + 1).collect::<Vec<_>>()
                )));
            }
        }
        let moments = moments.into_iter().filter(|(m, c)| *m == 0 || !c.is_zero()).collect();
        Ok(PseudoExpectation { n, d, moments })
    }

    /// Expectation under the uniform distribution.
    pub fn uniform(n: usize, d: usize) -> Self {
        PseudoExpectation { n, d, moments: BTreeMap::from([(0, Rational::one())]) }
    }

    /// Expectation under the point distribution at an assignment index.
    pub fn point(n: usize, d: usize, x: u64) -> Self {
        let moments = poly::subsets_up_to(n, d).into_iter().map(|m| (m, rational::int(poly::character(m, x)))).collect();
        PseudoExpectation { n, d, moments }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn moment(&self, alpha: Mask) -> Rational {
        if poly::popcount(alpha) > self.d {
            return Rational::zero();
        }
        self.moments.get(&alpha).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn moments(&self) -> &BTreeMap<Mask, Rational> {
        &self.moments
    }

    /// `Σ_α X_α χ_α`: `p̃E f = E[f · P]`.
    pub fn as_poly(&self) -> MultilinearPoly {
        MultilinearPoly::from_terms(self.n, self.moments.iter().map(|(m, c)| (*m, c.clone())))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }
}

/// `p̃E f`, extending by zero above degree `d`.
pub fn pe_apply(pe: &PseudoExpectation, f: &MultilinearPoly) -> Rational {
    f.terms().filter(|(m, _)| poly::popcount(*m) <= pe.d).map(|(m, c)| c * pe.moment(m)).sum()
}

/// The LP together with the subset behind each variable.
#[derive(Clone, Debug)]
pub struct SaLp {
    pub lp: LinearProgram,
    pub vars: Vec<Mask>,
    pub n: usize,
    pub d: usize,
    /// Constant term of the objective, not part of the LP.
    pub offset: Rational,
}

impl SaLp {
    pub fn functional(&self, point: &[Rational]) -> PseudoExpectation {
        let mut moments = BTreeMap::from([(0, Rational::one())]);
        for (m, v) in self.vars.iter().zip(point) {
            if !v.is_zero() {
                moments.insert(*m, v.clone());
            }
        }
        PseudoExpectation { n: self.n, d: self.d, moments }
    }
}

/// Free moments `X_α`, `1 ≤ |α| ≤ d`, with
/// `Σ_{∅≠α⊆S} χ_α(a) X_α ≥ -1` for all `0 < |S| ≤ d`, `a ∈ {±1}^S`.
pub fn build_sa_lp(n: usize, d: usize, objective: &MultilinearPoly) -> Result<SaLp> {
    if d > n {
        return Err(Error::Parameter(format!("degree {d} exceeds the {n} variables")));
    }
    if objective.degree() > d {
        return Err(Error::Parameter(format!("objective has degree {} above {d}", objective.degree())));
    }
    if objective.n() > n && objective.support_vars() >> n != 0 {
        return Err(Error::Parameter("objective uses variables outside the range".into()));
    }
    let vars: Vec<Mask> = poly::subsets_up_to(n, d).into_iter().skip(1).collect();
    let index: BTreeMap<Mask, usize> = vars.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut program = LinearProgram::new(vars.len(), Sense::Maximize);
    program.set_all_free();
    program.set_objective_sparse(
        objective.terms().filter(|(m, _)| *m != 0).map(|(m, c)| (index[&m], c.clone())).collect(),
    )?;
    let minus_one = rational::int(-1);
    for s in &vars {
        for a in poly::submasks(*s) {
            // a ⊆ S marks the coordinates set to -1
            let coeffs = poly::submasks(*s)
                .filter(|m| *m != 0)
                .map(|m| (index[&m], rational::int(poly::character(m, a))))
                .collect();
            program.add_sparse_constraint(coeffs, Relation::Ge, minus_one.clone())?;
        }
    }
    Ok(SaLp { lp: program, vars, n, d, offset: objective.coeff(0) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaSolution {
    pub value: Rational,
    pub pe: PseudoExpectation,
}

/// `SA_d(ℑ)`; levels above `n` are capped at `n`.
pub fn sa_value(inst: &Instance, d: usize) -> Result<SaSolution> {
    if inst.max_arity() > d {
        return Err(Error::Hypothesis(format!(
            "predicate arity {} exceeds the number of rounds {d}",
            inst.max_arity()
        )));
    }
    sa_maximize(inst.n(), d.min(inst.n()), &csp::instance_polynomial(inst))
}

pub fn sa_maximize(n: usize, d: usize, objective: &MultilinearPoly) -> Result<SaSolution> {
    let sa = build_sa_lp(n, d, objective)?;
    let sol = lp::solve_lp(&sa.lp)?;
    match sol.status {
        Status::Optimal => {
            let point = sol.point.expect("optimal point");
            let value = sol.value.expect("optimal value") + &sa.offset;
            Ok(SaSolution { value, pe: sa.functional(&point) })
        }
        // the uniform functional is always feasible and moments are bounded
        other => Err(Error::Internal(format!("Sherali-Adams program reported {other:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LefReport {
    pub passed: bool,
    /// Every width-`≤ d` indicator has nonnegative value.
    pub indicators_ok: bool,
    /// `|X_α| ≤ 1`.
    pub moments_bounded: bool,
    /// `‖P‖_∞ ≤ Σ_{j ≤ d} C(n, j)` for `P = Σ X_α χ_α`.
    pub sup_norm_ok: bool,
    #[serde(with = "rational::serde_str")]
    pub min_indicator_value: Rational,
    #[serde(with = "rational::serde_str")]
    pub sup_norm: Rational,
    #[serde(with = "rational::serde_str")]
    pub sup_norm_bound: Rational,
    pub first_violation: Option<String>,
}

fn describe(mask: Mask) -> String {
    let v: Vec<String> = poly::vars_of(mask).iter().map(|v| (v + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

/// `p̃E` of the indicator that the coordinates in `s` take the values with
/// `-1` on `a ⊆ s`, times `2^{|s|}`.
fn scaled_indicator(pe: &PseudoExpectation, s: Mask, a: Mask) -> Rational {
    poly::submasks(s).map(|m| rational::int(poly::character(m, a)) * pe.moment(m)).sum()
}

pub fn check_lef(pe: &PseudoExpectation) -> LefReport {
    let mut first: Option<String> = None;

    let mut moments_bounded = true;
    for (m, c) in &pe.moments {
        if c.abs() > Rational::one() {
            moments_bounded = false;
            first.get_or_insert_with(|| format!("moment {} = {} exceeds 1 in absolute value", describe(*m), rational::format(c)));
            break;
        }
    }

    let mut indicators_ok = true;
    let mut min_value: Option<Rational> = None;
    let d = pe.d.min(pe.n);
    // indicators of full width d imply the narrower ones
    let widths: Vec<Mask> = poly::subsets_up_to(pe.n, d).into_iter().filter(|m| poly::popcount(*m) == d).collect();
    for s in widths {
        for a in poly::submasks(s) {
            let v = scaled_indicator(pe, s, a) * rational::pow2(-(d as i64));
            if v.is_negative() && indicators_ok {
                indicators_ok = false;
                first.get_or_insert_with(|| {
                    format!(
                        "indicator of {} at {} has value {}",
                        describe(s),
                        csp::format_assignment(pe.n, a).chars().enumerate().filter(|(i, _)| s >> i & 1 == 1).map(|(_, c)| c).collect::<String>(),
                        rational::format(&v)
                    )
                });
            }
            if min_value.as_ref().map_or(true, |m| v < *m) {
                min_value = Some(v);
            }
        }
    }

    let (_, table) = pe.as_poly().support_table();
    let sup = table.iter().map(|v| v.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a });
    let bound: Rational =
        (0..=pe.d.min(pe.n)).map(|j| Rational::from_integer(rational::binomial(pe.n as u64, j as u64))).sum();
    let sup_norm_ok = sup <= bound;
    if !sup_norm_ok {
        first.get_or_insert_with(|| format!("sup norm {} exceeds {}", rational::format(&sup), rational::format(&bound)));
    }

    LefReport {
        passed: moments_bounded && indicators_ok && sup_norm_ok,
        indicators_ok,
        moments_bounded,
        sup_norm_ok,
        min_indicator_value: min_value.unwrap_or_else(Rational::one),
        sup_norm: sup,
        sup_norm_bound: bound,
        first_violation: first,
    }
}

/// Move a functional on `m` variables to the coordinates `s` of `n`.
pub fn pe_plant(pe: &PseudoExpectation, s: &[usize], n: usize) -> Result<PseudoExpectation> {
    if s.len() != pe.n {
        return Err(Error::MalformedInput(format!(
            "planting set has {} coordinates for a functional on {}",
            s.len(),
            pe.n
        )));
    }
    if s.iter().any(|&v| v >= n) || poly::popcount(poly::mask_of(s)) != s.len() {
        return Err(Error::MalformedInput("planting coordinates must be distinct and below n".into()));
    }
    let moments = pe.moments.iter().map(|(m, c)| (poly::relabel_mask(*m, s), c.clone())).collect();
    Ok(PseudoExpectation { n, d: pe.d, moments })
}

#[cfg(test)]
mod tests;
