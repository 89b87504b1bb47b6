//! LP relaxations as polyhedra over a linearization, their slack
//! functions and Farkas decompositions, and the slack/protocol matrices of
//! the communication view.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::boolfn::BoolFn;
use crate::caps::{self, SizeCaps};
use crate::csp::{self, Instance};
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, Relation, Sense, Status};
use crate::poly::{self, Mask, MultilinearPoly};
use crate::rational::{self, Rational};
use crate::sa::edge_pairs;

mod protocol;

pub use protocol::{
    build_slack_matrix, low_value_graphs, protocol_factorization, protocol_matrix, ProtocolFactorization,
    ProtocolMatrix, SlackMatrix,
};

/// `⟨A_i, y⟩ ≤ b_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Embedding {
    Metric,
    Universal { d: usize },
    Custom,
}

/// A polyhedron `P ⊆ Q^D` with the assignment embedding `x ↦ x̃` given by
/// one multilinear polynomial per coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedralRelaxation {
    name: String,
    n: usize,
    coords: Vec<MultilinearPoly>,
    rows: Vec<Inequality>,
    embedding: Embedding,
}

/// Box rows `-y_e ≤ 0` and `y_e ≤ 1`, then per triple `i<j<k` the three
/// triangle rows and `y_ij + y_ik + y_jk ≤ 2`; `y_ij = (1 − x_i x_j)/2`.
pub fn metric_maxcut(n: usize) -> Result<PolyhedralRelaxation> {
    if n < 3 {
        return Err(Error::Parameter(format!("metric relaxation needs n ≥ 3, got {n}")));
    }
    let pairs = edge_pairs(n);
    let half = rational::rat(1, 2);
    let coords = pairs
        .iter()
        .map(|&(i, j)| MultilinearPoly::from_terms(n, [(0, half.clone()), (1 << i | 1 << j, -half.clone())]))
        .collect();
    let one = Rational::one;
    let mut rows = Vec::new();
    for e in 0..pairs.len() {
        rows.push(Inequality { coeffs: vec![(e, -one())], rhs: Rational::zero() });
    }
    for e in 0..pairs.len() {
        rows.push(Inequality { coeffs: vec![(e, one())], rhs: one() });
    }
    let idx = |i, j| crate::sa::edge_index(n, i, j);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (idx(i, j), idx(i, k), idx(j, k));
                for (long, s1, s2) in [(a, b, c), (b, a, c), (c, a, b)] {
                    rows.push(Inequality { coeffs: sorted(vec![(long, one()), (s1, -one()), (s2, -one())]), rhs: Rational::zero() });
                }
                rows.push(Inequality { coeffs: vec![(a, one()), (b, one()), (c, one())], rhs: rational::int(2) });
            }
        }
    }
    Ok(PolyhedralRelaxation { name: format!("metric:{n}"), n, coords, rows, embedding: Embedding::Metric })
}

fn sorted(mut v: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    v.sort_by_key(|(j, _)| *j);
    v
}

/// Coordinates `y_α = χ_α` for `|α| ≤ d` (including `∅`), rows
/// `y_∅ ≤ 1`, `−y_∅ ≤ −1` and `−Σ_{α⊆S} χ_α(a) y_α ≤ 0` for every
/// `|S| ≤ d`, `a ∈ {±1}^S`.
pub fn universal(n: usize, d: usize) -> Result<PolyhedralRelaxation> {
    if d > n {
        return Err(Error::Parameter(format!("degree {d} exceeds the {n} variables")));
    }
    if n > 63 {
        return Err(Error::Parameter(format!("{n} variables exceed the mask width")));
    }
    let subsets = poly::subsets_up_to(n, d);
    let index: BTreeMap<Mask, usize> = subsets.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let coords = subsets.iter().map(|&m| MultilinearPoly::character(n, m)).collect();
    let mut rows = vec![
        Inequality { coeffs: vec![(0, Rational::one())], rhs: Rational::one() },
        Inequality { coeffs: vec![(0, -Rational::one())], rhs: -Rational::one() },
    ];
    for &s in &subsets {
        for a in poly::submasks(s) {
            let coeffs = sorted(poly::submasks(s).map(|m| (index[&m], rational::int(-poly::character(m, a)))).collect());
            rows.push(Inequality { coeffs, rhs: Rational::zero() });
        }
    }
    Ok(PolyhedralRelaxation { name: format!("universal:{n}:{d}"), n, coords, rows, embedding: Embedding::Universal { d } })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInequality {
    coeffs: BTreeMap<String, String>,
    rhs: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelaxation {
    n: usize,
    coordinates: Vec<BTreeMap<String, String>>,
    inequalities: Vec<RawInequality>,
}

fn parse_key(k: &str, what: &str) -> Result<u64> {
    k.parse().map_err(|_| Error::MalformedInput(format!("{what} key {k:?} is not a nonnegative integer")))
}

impl PolyhedralRelaxation {
    /// Read a relaxation from JSON: coordinates as polynomials keyed by
    /// decimal bitmask, inequality coefficients keyed by 0-based coordinate.
    /// The embedding is checked exhaustively for `n ≤ 12`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawRelaxation = serde_json::from_str(text)?;
        if raw.n == 0 || raw.n > 63 {
            return Err(Error::MalformedInput(format!("variable count {} outside [1, 63]", raw.n)));
        }
        let mut coords = Vec::new();
        for c in &raw.coordinates {
            let mut p = MultilinearPoly::zero(raw.n);
            for (k, v) in c {
                let m = parse_key(k, "monomial")?;
                if m >> raw.n != 0 {
                    return Err(Error::MalformedInput(format!("monomial {m} uses variables beyond n = {}", raw.n)));
                }
                p.add_term(m, rational::parse(v)?);
            }
            coords.push(p);
        }
        let mut rows = Vec::new();
        for ineq in &raw.inequalities {
            let mut coeffs = Vec::new();
            for (k, v) in &ineq.coeffs {
                let j = parse_key(k, "coordinate")? as usize;
                if j >= coords.len() {
                    return Err(Error::MalformedInput(format!("coordinate {j} outside the {} coordinates", coords.len())));
                }
                let a = rational::parse(v)?;
                if !a.is_zero() {
                    coeffs.push((j, a));
                }
            }
            rows.push(Inequality { coeffs: sorted(coeffs), rhs: rational::parse(&ineq.rhs)? });
        }
        let rel = PolyhedralRelaxation { name: "file".into(), n: raw.n, coords, rows, embedding: Embedding::Custom };
        if rel.n <= 12 {
            rel.check_embedding()?;
        }
        Ok(rel)
    }

    pub fn to_json(&self) -> String {
        let raw = RawRelaxation {
            n: self.n,
            coordinates: self
                .coords
                .iter()
                .map(|p| p.terms().map(|(m, c)| (m.to_string(), rational::format(c))).collect())
                .collect(),
            inequalities: self
                .rows
                .iter()
                .map(|r| RawInequality {
                    coeffs: r.coeffs.iter().map(|(j, a)| (j.to_string(), rational::format(a))).collect(),
                    rhs: rational::format(&r.rhs),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("serialisable")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `D`
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `R`
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Inequality] {
        &self.rows
    }

    pub fn coordinates(&self) -> &[MultilinearPoly] {
        &self.coords
    }

    pub fn embed_assignment(&self, x: u64) -> Vec<Rational> {
        self.coords.iter().map(|p| p.evaluate(x)).collect()
    }

    /// Every `x̃` lies in `P`.
    pub fn check_embedding(&self) -> Result<()> {
        caps::check("relaxation check variables", self.n, SizeCaps::global().slack_n)?;
        let slacks = slack_polys(self);
        for (i, q) in slacks.iter().enumerate() {
            let (vars, table) = q.support_table();
            if let Some(pos) = table.iter().position(|v| v.is_negative()) {
                let x = vars.iter().enumerate().fold(0u64, |a, (k, v)| a | ((pos as u64 >> k) & 1) << v);
                return Err(Error::MalformedInput(format!(
                    "embedded assignment {} violates inequality {}",
                    csp::format_assignment(self.n, x),
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// `ℑ̃` with `⟨ℑ̃, x̃⟩ = ℑ(x)`.
    pub fn embed_instance(&self, inst: &Instance) -> Result<Vec<Rational>> {
        if inst.n() != self.n {
            return Err(Error::MalformedInput(format!(
                "instance on {} variables for a relaxation on {}",
                inst.n(),
                self.n
            )));
        }
        match &self.embedding {
            Embedding::Metric => {
                let edges = inst
                    .cut_edges()
                    .ok_or_else(|| Error::MalformedInput("metric relaxation needs a Max Cut instance".into()))?;
                let mut v = vec![Rational::zero(); self.dim()];
                let w = rational::rat(1, edges.len() as i64);
                for (i, j) in edges {
                    v[crate::sa::edge_index(self.n, i, j)] += &w;
                }
                Ok(v)
            }
            Embedding::Universal { d } => {
                if inst.max_arity() > *d {
                    return Err(Error::Hypothesis(format!(
                        "predicate arity {} exceeds the degree {d}",
                        inst.max_arity()
                    )));
                }
                let p = csp::instance_polynomial(inst);
                Ok(poly::subsets_up_to(self.n, *d).into_iter().map(|m| p.coeff(m)).collect())
            }
            Embedding::Custom => self.solve_embedding(&csp::instance_polynomial(inst)),
        }
    }

    fn solve_embedding(&self, target: &MultilinearPoly) -> Result<Vec<Rational>> {
        let mut monomials: BTreeSet<Mask> = target.terms().map(|(m, _)| m).collect();
        for c in &self.coords {
            monomials.extend(c.terms().map(|(m, _)| m));
        }
        let mut program = LinearProgram::new(self.dim(), Sense::Maximize);
        program.set_all_free();
        for m in monomials {
            let coeffs = self.coords.iter().enumerate().map(|(j, c)| (j, c.coeff(m))).filter(|(_, a)| !a.is_zero()).collect();
            program.add_sparse_constraint(coeffs, Relation::Eq, target.coeff(m))?;
        }
        let sol = lp::solve_lp(&program)?;
        match sol.status {
            Status::Optimal => Ok(sol.point.expect("point")),
            _ => Err(Error::MalformedInput("instance is not in the span of the relaxation's coordinates".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpValue {
    pub value: Rational,
    pub point: Vec<Rational>,
}

/// `ℒ(ℑ) = max_{y ∈ P} ⟨ℑ̃, y⟩`.
pub fn lp_value(rel: &PolyhedralRelaxation, inst: &Instance) -> Result<LpValue> {
    let objective = rel.embed_instance(inst)?;
    let mut program = LinearProgram::new(rel.dim(), Sense::Maximize);
    program.set_all_free();
    program.set_objective(objective)?;
    for r in &rel.rows {
        program.add_sparse_constraint(r.coeffs.clone(), Relation::Le, r.rhs.clone())?;
    }
    let sol = lp::solve_lp(&program)?;
    match sol.status {
        Status::Optimal => Ok(LpValue { value: sol.value.expect("value"), point: sol.point.expect("point") }),
        Status::Unbounded => Err(Error::Unbounded(format!("{} does not bound the objective", rel.name))),
        Status::Infeasible => Err(Error::MalformedInput(format!("{} has an empty polyhedron", rel.name))),
    }
}

fn slack_polys(rel: &PolyhedralRelaxation) -> Vec<MultilinearPoly> {
    rel.rows
        .iter()
        .map(|r| {
            let mut q = MultilinearPoly::constant(rel.n, r.rhs.clone());
            for (j, a) in &r.coeffs {
                q.add_scaled(&rel.coords[*j], &-a.clone());
            }
            q
        })
        .collect()
}

/// `q_i(x) = b_i − ⟨A_i, x̃⟩`, one per inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackFunctions {
    pub n: usize,
    pub polys: Vec<MultilinearPoly>,
}

impl SlackFunctions {
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn table(&self, i: usize) -> Result<BoolFn> {
        BoolFn::new(self.n, self.polys[i].to_table())
    }

    /// Index of the first slack negative somewhere, if any.
    pub fn first_negative(&self) -> Option<usize> {
        self.polys.iter().position(|q| q.support_table().1.iter().any(|v| v.is_negative()))
    }
}

pub fn slack_functions(rel: &PolyhedralRelaxation) -> Result<SlackFunctions> {
    caps::check("slack table variables", rel.n, SizeCaps::global().slack_n)?;
    Ok(SlackFunctions { n: rel.n, polys: slack_polys(rel) })
}

#[derive(Clone, Debug, PartialEq)]
pub enum FarkasResult {
    /// `c − ℑ = λ₀ + Σ λ_i q_i` with all `λ ≥ 0`.
    Decomposition { lambda0: Rational, lambda: Vec<Rational> },
    /// `H` with `⟨H, 1⟩ ≥ 0`, `⟨H, q_i⟩ ≥ 0` and `⟨H, c − ℑ⟩ = −1`.
    Infeasible { certificate: MultilinearPoly },
}

impl FarkasResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FarkasResult::Decomposition { .. })
    }
}

fn target(c: &Rational, inst: &Instance) -> MultilinearPoly {
    MultilinearPoly::constant(inst.n(), c.clone()).minus(&csp::instance_polynomial(inst))
}

/// Write `c − ℑ` as a nonnegative combination of `1` and the slacks. The
/// equality is imposed coefficientwise in the character basis, which is
/// the same as imposing it at all `2^n` points.
pub fn farkas_decompose(c: &Rational, inst: &Instance, rel: &PolyhedralRelaxation) -> Result<FarkasResult> {
    caps::check("Farkas decomposition variables", inst.n(), SizeCaps::global().farkas_n)?;
    if inst.n() != rel.n {
        return Err(Error::MalformedInput(format!(
            "instance on {} variables for a relaxation on {}",
            inst.n(),
            rel.n
        )));
    }
    let slacks = slack_polys(rel);
    let goal = target(c, inst);
    let mut monomials: BTreeSet<Mask> = goal.terms().map(|(m, _)| m).collect();
    monomials.insert(0);
    for q in &slacks {
        monomials.extend(q.terms().map(|(m, _)| m));
    }
    let monomials: Vec<Mask> = monomials.into_iter().collect();
    let row_of: BTreeMap<Mask, usize> = monomials.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut program = LinearProgram::new(slacks.len() + 1, Sense::Maximize);
    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); monomials.len()];
    rows[row_of[&0]].push((0, Rational::one()));
    for (i, q) in slacks.iter().enumerate() {
        for (m, a) in q.terms() {
            rows[row_of[&m]].push((i + 1, a.clone()));
        }
    }
    for (r, m) in rows.into_iter().zip(&monomials) {
        program.add_sparse_constraint(r, Relation::Eq, goal.coeff(*m))?;
    }
    let sol = lp::solve_lp(&program)?;
    match sol.status {
        Status::Optimal => {
            let mut point = sol.point.expect("point");
            let lambda = point.split_off(1);
            Ok(FarkasResult::Decomposition { lambda0: point.pop().expect("lambda0"), lambda })
        }
        Status::Infeasible => {
            let y = sol.dual_certificate.expect("certificate");
            let certificate = MultilinearPoly::from_terms(inst.n(), monomials.iter().zip(y).map(|(m, v)| (*m, v)));
            Ok(FarkasResult::Infeasible { certificate })
        }
        Status::Unbounded => Err(Error::Internal("feasibility program reported unbounded".into())),
    }
}

/// Exact pointwise check over all `2^n` assignments.
pub fn verify_decomposition(
    c: &Rational,
    inst: &Instance,
    lambda0: &Rational,
    lambda: &[Rational],
    slacks: &SlackFunctions,
) -> bool {
    if lambda.len() != slacks.len() || lambda0.is_negative() || lambda.iter().any(Signed::is_negative) {
        return false;
    }
    if inst.n() != slacks.n || slacks.n > SizeCaps::global().slack_n {
        return false;
    }
    let mut combo = MultilinearPoly::constant(slacks.n, lambda0.clone());
    for (l, q) in lambda.iter().zip(&slacks.polys) {
        if !l.is_zero() {
            combo.add_scaled(q, l);
        }
    }
    let lhs = combo.to_table();
    (0..1u64 << inst.n()).all(|x| c - inst.value_at(x) == lhs[x as usize])
}

/// Check an infeasibility certificate `H` against the slacks.
pub fn verify_certificate(c: &Rational, inst: &Instance, h: &MultilinearPoly, slacks: &SlackFunctions) -> bool {
    let inner = |f: &MultilinearPoly| -> Rational { f.terms().map(|(m, a)| a * h.coeff(m)).sum() };
    !h.coeff(0).is_negative()
        && slacks.polys.iter().all(|q| !inner(q).is_negative())
        && inner(&target(c, inst)).is_negative()
}


#[cfg(test)]
mod tests;
