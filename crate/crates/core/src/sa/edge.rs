use std::collections::{BTreeMap, HashSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{check_lef, pe_apply, LefReport, PseudoExpectation};
use crate::caps::{self, SizeCaps};
use crate::csp::Instance;
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, Relation, Sense, Status};
use crate::poly::{self, Mask, MultilinearPoly};
use crate::rational::{self, Rational};

/// Pairs `i < j` in lexicographic order; the position is the edge index.
pub fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    // pairs before row i, then offset within the row
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Linear form `c + Σ l_e y_e` with small integer coefficients.
#[derive(Clone, Debug)]
struct Facet {
    constant: i64,
    terms: Vec<(usize, i64)>,
}

fn metric_facets(n: usize) -> Vec<Facet> {
    let mut out = Vec::new();
    for e in 0..n * (n - 1) / 2 {
        out.push(Facet { constant: 0, terms: vec![(e, 1)] });
        out.push(Facet { constant: 1, terms: vec![(e, -1)] });
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (edge_index(n, i, j), edge_index(n, i, k), edge_index(n, j, k));
                for (long, s1, s2) in [(a, b, c), (b, a, c), (c, a, b)] {
                    out.push(Facet { constant: 0, terms: vec![(s1, 1), (s2, 1), (long, -1)] });
                }
                out.push(Facet { constant: 2, terms: vec![(a, -1), (b, -1), (c, -1)] });
            }
        }
    }
    out
}

type EdgePoly = BTreeMap<Mask, i64>;

fn add_to(p: &mut EdgePoly, m: Mask, c: i64) {
    if c == 0 {
        return;
    }
    let slot = p.entry(m).or_insert(0);
    *slot += c;
    if *slot == 0 {
        p.remove(&m);
    }
}

/// Indicator that the edges in `u` take value 1 exactly on `ones ⊆ u`,
/// expanded in monomials.
fn indicator(u: Mask, ones: Mask) -> EdgePoly {
    let free = u & !ones;
    let mut p = EdgePoly::new();
    for w in poly::submasks(free) {
        add_to(&mut p, ones | w, if poly::popcount(w) % 2 == 0 { 1 } else { -1 });
    }
    p
}

fn times_facet(f: &EdgePoly, l: &Facet) -> EdgePoly {
    let mut p = EdgePoly::new();
    for (m, c) in f {
        add_to(&mut p, *m, c * l.constant);
        for (e, le) in &l.terms {
            add_to(&mut p, m | 1 << e, c * le);
        }
    }
    p
}

/// Every `f·ℓ` for indicators `f` on at most `r` edges and metric facets
/// `ℓ`, deduplicated, with zero products dropped. Each row also carries a
/// description.
fn product_rows(n: usize, r: usize) -> Vec<(EdgePoly, String)> {
    let pairs = edge_pairs(n);
    let facets = metric_facets(n);
    let name = |m: Mask| -> String {
        poly::vars_of(m).iter().map(|e| format!("{}-{}", pairs[*e].0 + 1, pairs[*e].1 + 1)).collect::<Vec<_>>().join(",")
    };
    let mut seen: HashSet<Vec<(Mask, i64)>> = HashSet::new();
    let mut rows = Vec::new();
    for u in poly::subsets_up_to(pairs.len(), r) {
        for ones in poly::submasks(u) {
            let f = indicator(u, ones);
            for (fi, l) in facets.iter().enumerate() {
                let p = times_facet(&f, l);
                if p.is_empty() {
                    continue;
                }
                let key: Vec<(Mask, i64)> = p.iter().map(|(m, c)| (*m, *c)).collect();
                if seen.insert(key) {
                    rows.push((p, format!("indicator [{}] ones [{}] times facet {}", name(u), name(ones), fi + 1)));
                }
            }
        }
    }
    rows
}

/// Moments `p̃E y^T` of squarefree edge monomials with `|T| ≤ r + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeFunctional {
    n: usize,
    r: usize,
    moments: BTreeMap<Mask, Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    n: usize,
    r: usize,
    moments: BTreeMap<String, String>,
}

impl Serialize for EdgeFunctional {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs = edge_pairs(self.n);
        let key = |m: Mask| {
            poly::vars_of(m).iter().map(|e| format!("{}-{}", pairs[*e].0 + 1, pairs[*e].1 + 1)).collect::<Vec<_>>().join(",")
        };
        RawEdge {
            n: self.n,
            r: self.r,
            moments: self.moments.iter().map(|(m, c)| (key(*m), rational::format(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EdgeFunctional {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawEdge::deserialize(d)?;
        let mut moments = BTreeMap::new();
        for (k, v) in &raw.moments {
            let mut m: Mask = 0;
            for part in k.split(',').filter(|p| !p.is_empty()) {
                let (a, b) = part.split_once('-').ok_or_else(|| D::Error::custom(format!("edge key {part:?} is not i-j")))?;
                let a: usize = a.trim().parse().map_err(|_| D::Error::custom(format!("bad vertex in {part:?}")))?;
                let b: usize = b.trim().parse().map_err(|_| D::Error::custom(format!("bad vertex in {part:?}")))?;
                if a == 0 || b == 0 || a == b || a > raw.n || b > raw.n {
                    return Err(D::Error::custom(format!("edge {part:?} invalid for n = {}", raw.n)));
                }
                m |= 1 << edge_index(raw.n, a - 1, b - 1);
            }
            moments.insert(m, rational::parse(v).map_err(D::Error::custom)?);
        }
        EdgeFunctional::new(raw.n, raw.r, moments).map_err(D::Error::custom)
    }
}

impl EdgeFunctional {
    pub fn new(n: usize, r: usize, moments: BTreeMap<Mask, Rational>) -> Result<Self> {
        if !(2..=11).contains(&n) {
            return Err(Error::MalformedInput(format!("edge functional on {n} vertices is outside [2, 11]")));
        }
        if moments.get(&0).map_or(true, |c| !c.is_one()) {
            return Err(Error::MalformedInput("moment of the constant monomial must be 1".into()));
        }
        let num_edges = n * (n - 1) / 2;
        if moments.keys().any(|m| m >> num_edges != 0 || poly::popcount(*m) > r + 1) {
            return Err(Error::MalformedInput(format!("moment outside degree {} on {n} vertices", r + 1)));
        }
        let moments = moments.into_iter().filter(|(m, c)| *m == 0 || !c.is_zero()).collect();
        Ok(EdgeFunctional { n, r, moments })
    }

    /// Point distribution at the cut vector of `x`.
    pub fn cut_point(n: usize, r: usize, x: u64) -> Self {
        let pairs = edge_pairs(n);
        let cut: Mask = pairs
            .iter()
            .enumerate()
            .filter(|(_, (i, j))| (x >> i ^ x >> j) & 1 == 1)
            .fold(0, |a, (e, _)| a | 1 << e);
        let moments = poly::subsets_up_to(pairs.len(), r + 1)
            .into_iter()
            .filter(|t| t & !cut == 0)
            .map(|t| (t, Rational::one()))
            .collect();
        EdgeFunctional { n, r, moments }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn moment(&self, t: Mask) -> Rational {
        self.moments.get(&t).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn moments(&self) -> &BTreeMap<Mask, Rational> {
        &self.moments
    }

    fn apply_int(&self, p: &EdgePoly) -> Rational {
        p.iter().map(|(m, c)| self.moment(*m) * rational::int(*c)).sum()
    }

    /// `p̃E Σ_{ij ∈ E} y_ij / |E|`.
    pub fn cut_objective(&self, edges: &[(usize, usize)]) -> Rational {
        let total: Rational = edges.iter().map(|&(i, j)| self.moment(1 << edge_index(self.n, i, j))).sum();
        total / rational::int(edges.len() as i64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug)]
pub struct EdgeSaLp {
    pub lp: LinearProgram,
    pub vars: Vec<Mask>,
    pub n: usize,
    pub r: usize,
}

impl EdgeSaLp {
    pub fn functional(&self, point: &[Rational]) -> EdgeFunctional {
        let mut moments = BTreeMap::from([(0, Rational::one())]);
        for (m, v) in self.vars.iter().zip(point) {
            if !v.is_zero() {
                moments.insert(*m, v.clone());
            }
        }
        EdgeFunctional { n: self.n, r: self.r, moments }
    }
}

fn check_edge_caps(n: usize, r: usize) -> Result<()> {
    let caps = SizeCaps::global();
    caps::check("edge relaxation vertices", n, caps.edge_n)?;
    caps::check("edge relaxation level", r, caps.edge_r)
}

/// Level-`r` program over the metric polytope for the cut objective of
/// `edges` (0-based, on `n` vertices).
pub fn build_edge_sa_lp(n: usize, r: usize, edges: &[(usize, usize)]) -> Result<EdgeSaLp> {
    if n < 3 {
        return Err(Error::Parameter(format!("edge relaxation needs n ≥ 3, got {n}")));
    }
    if edges.is_empty() {
        return Err(Error::MalformedInput("graph has no edges".into()));
    }
    if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= n || j >= n || i == j) {
        return Err(Error::MalformedInput(format!("edge {}-{} invalid for n = {n}", i + 1, j + 1)));
    }
    check_edge_caps(n, r)?;
    let num_edges = n * (n - 1) / 2;
    let vars: Vec<Mask> = poly::subsets_up_to(num_edges, r + 1).into_iter().skip(1).collect();
    let index: BTreeMap<Mask, usize> = vars.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut program = LinearProgram::new(vars.len(), Sense::Maximize);
    let weight = rational::rat(1, edges.len() as i64);
    let mut objective: BTreeMap<usize, Rational> = BTreeMap::new();
    for &(i, j) in edges {
        *objective.entry(index[&(1 << edge_index(n, i, j))]).or_insert_with(Rational::zero) += &weight;
    }
    program.set_objective_sparse(objective.into_iter().collect())?;
    for (row, _) in product_rows(n, r) {
        let rhs = -rational::int(row.get(&0).copied().unwrap_or(0));
        let coeffs = row.iter().filter(|(m, _)| **m != 0).map(|(m, c)| (index[m], rational::int(*c))).collect();
        program.add_sparse_constraint(coeffs, Relation::Ge, rhs)?;
    }
    Ok(EdgeSaLp { lp: program, vars, n, r })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSaSolution {
    pub value: Rational,
    pub functional: EdgeFunctional,
}

pub fn edge_sa_value(graph: &Instance, r: usize) -> Result<EdgeSaSolution> {
    let edges = graph
        .cut_edges()
        .ok_or_else(|| Error::MalformedInput("edge relaxation needs a Max Cut instance".into()))?;
    let sa = build_edge_sa_lp(graph.n(), r, &edges)?;
    let sol = lp::solve_lp(&sa.lp)?;
    match sol.status {
        Status::Optimal => {
            let point = sol.point.expect("optimal point");
            Ok(EdgeSaSolution { value: sol.value.expect("optimal value"), functional: sa.functional(&point) })
        }
        other => Err(Error::Internal(format!("edge relaxation reported {other:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeCheck {
    pub feasible: bool,
    #[serde(with = "rational::serde_str")]
    pub min_margin: Rational,
    pub rows_checked: usize,
    pub first_violation: Option<String>,
}

/// Evaluate every level-`r` product constraint.
pub fn edge_feasibility(ef: &EdgeFunctional) -> EdgeCheck {
    let mut min: Option<Rational> = None;
    let mut first = None;
    let rows = product_rows(ef.n, ef.r);
    for (row, name) in &rows {
        let v = ef.apply_int(row);
        if v.is_negative() && first.is_none() {
            first = Some(format!("{name} has value {}", rational::format(&v)));
        }
        if min.as_ref().map_or(true, |m| v < *m) {
            min = Some(v);
        }
    }
    EdgeCheck {
        feasible: first.is_none(),
        min_margin: min.unwrap_or_else(Rational::zero),
        rows_checked: rows.len(),
        first_violation: first,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TranslationReport {
    pub edge_check: EdgeCheck,
    pub vertex_check: LefReport,
    #[serde(with = "rational::serde_str")]
    pub vertex_objective: Rational,
    #[serde(with = "rational::serde_str")]
    pub edge_objective: Rational,
    pub objective_preserved: bool,
    /// `p̃E_y[(y_1i − y_1j)² − y_ij] = 0` for every pair avoiding vertex 1;
    /// only meaningful for the edge-to-vertex direction.
    pub anchor_identities: Option<bool>,
}

fn cut_poly(n: usize, edges: &[(usize, usize)]) -> MultilinearPoly {
    let mut p = MultilinearPoly::zero(n);
    let w = rational::rat(1, 2 * edges.len() as i64);
    for &(i, j) in edges {
        p.add_term(0, w.clone());
        p.add_term(1 << i | 1 << j, -w.clone());
    }
    p
}

fn report(pe: &PseudoExpectation, ef: &EdgeFunctional, edges: &[(usize, usize)], anchor: Option<bool>) -> TranslationReport {
    let vertex_objective = pe_apply(pe, &cut_poly(pe.n(), edges));
    let edge_objective = ef.cut_objective(edges);
    TranslationReport {
        edge_check: edge_feasibility(ef),
        vertex_check: check_lef(pe),
        objective_preserved: vertex_objective == edge_objective,
        vertex_objective,
        edge_objective,
        anchor_identities: anchor,
    }
}

/// `p̃E_y f = p̃E_x (f ∘ φ)` with `φ(x)_ij = (1 − x_i x_j)/2`, at level
/// `r = k/2 − 2`.
pub fn vertex_to_edge(
    pe: &PseudoExpectation,
    k: usize,
    edges: &[(usize, usize)],
) -> Result<(EdgeFunctional, TranslationReport)> {
    if k % 2 == 1 || k < 6 {
        return Err(Error::Parameter(format!("locality k = {k} must be even and at least 6")));
    }
    let n = pe.n();
    if pe.d() < k.min(n) {
        return Err(Error::Parameter(format!("functional has degree {} below the locality {}", pe.d(), k.min(n))));
    }
    let r = k / 2 - 2;
    check_edge_caps(n, r)?;
    let pairs = edge_pairs(n);
    let half = rational::rat(1, 2);
    let factors: Vec<MultilinearPoly> = pairs
        .iter()
        .map(|&(i, j)| MultilinearPoly::from_terms(n, [(0, half.clone()), (1 << i | 1 << j, -half.clone())]))
        .collect();
    let mut moments = BTreeMap::new();
    for t in poly::subsets_up_to(pairs.len(), r + 1) {
        let product = poly::vars_of(t)
            .iter()
            .fold(MultilinearPoly::constant(n, Rational::one()), |acc, e| acc.times(&factors[*e]));
        moments.insert(t, pe_apply(pe, &product));
    }
    let ef = EdgeFunctional::new(n, r, moments)?;
    let rep = report(pe, &ef, edges, None);
    Ok((ef, rep))
}

/// `p̃E_x f = p̃E_y (f ∘ ψ)` with `ψ(y)_i = 1 − 2 y_{1i}` (and `ψ(y)_1 = 1`),
/// at degree `r`.
pub fn edge_to_vertex(ef: &EdgeFunctional, edges: &[(usize, usize)]) -> Result<(PseudoExpectation, TranslationReport)> {
    let n = ef.n;
    let d = ef.r.min(n);
    let mut moments = BTreeMap::new();
    for alpha in poly::subsets_up_to(n, d) {
        let rest = alpha & !1;
        let mut p = EdgePoly::new();
        for w in poly::submasks(rest) {
            let t = poly::vars_of(w).iter().fold(0, |a, &i| a | 1 << edge_index(n, 0, i));
            add_to(&mut p, t, (-2i64).pow(poly::popcount(w) as u32));
        }
        moments.insert(alpha, ef.apply_int(&p));
    }
    let pe = PseudoExpectation::new(n, d, moments)?;

    let anchor = (ef.r >= 1).then(|| {
        edge_pairs(n).iter().filter(|(i, _)| *i != 0).all(|&(i, j)| {
            let (a, b, c) = (edge_index(n, 0, i), edge_index(n, 0, j), edge_index(n, i, j));
            let v = ef.moment(1 << a) + ef.moment(1 << b) - rational::int(2) * ef.moment(1 << a | 1 << b) - ef.moment(1 << c);
            v.is_zero()
        })
    });
    let rep = report(&pe, ef, edges, anchor);
    Ok((pe, rep))
}
