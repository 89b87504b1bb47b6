//! Exact linear programming.
//!
//! [`LinearProgram`] is a plain value: variables (nonnegative or free),
//! indexed constraints and an objective. [`solve_lp`] returns an
//! [`LPSolution`] whose point, value and certificates are exact. Constraint
//! indices are stable and the dual certificate is reported per constraint.
//!
//! Internally the problem is brought to standard form either directly or
//! through its dual, whichever has fewer rows; both are solved by the same
//! Bland-rule simplex.

mod simplex;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::caps::{self, SizeCaps};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use simplex::{Outcome, SparseColumn, StandardForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    /// Sparse coefficients, sorted by variable, no zeros.
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs_at(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs_at(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    var_kinds: Vec<VarKind>,
    constraints: Vec<Constraint>,
    objective: Vec<Rational>,
    sense: Sense,
}

fn normalize_sparse(num_vars: usize, mut coeffs: Vec<(usize, Rational)>) -> Result<Vec<(usize, Rational)>> {
    if let Some((j, _)) = coeffs.iter().find(|(j, _)| *j >= num_vars) {
        return Err(Error::MalformedInput(format!(
            "coefficient for variable {j} but the program has {num_vars} variables"
        )));
    }
    coeffs.sort_by_key(|(j, _)| *j);
    let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs {
        match merged.last_mut() {
            Some((last, acc)) if *last == j => *acc += a,
            _ => merged.push((j, a)),
        }
    }
    merged.retain(|(_, a)| !a.is_zero());
    Ok(merged)
}

impl LinearProgram {
    /// A program over `num_vars` nonnegative variables with zero objective.
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            var_kinds: vec![VarKind::NonNegative; num_vars],
            constraints: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
            sense,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn var_kinds(&self) -> &[VarKind] {
        &self.var_kinds
    }

    pub fn set_var_kind(&mut self, j: usize, kind: VarKind) -> Result<()> {
        let slot = self.var_kinds.get_mut(j).ok_or_else(|| {
            Error::MalformedInput(format!("variable {j} out of range"))
        })?;
        *slot = kind;
        Ok(())
    }

    pub fn set_all_free(&mut self) {
        self.var_kinds.fill(VarKind::Free);
    }

    pub fn set_objective(&mut self, coeffs: Vec<Rational>) -> Result<()> {
        if coeffs.len() != self.num_vars {
            return Err(Error::MalformedInput(format!(
                "objective has {} coefficients, expected {}",
                coeffs.len(),
                self.num_vars
            )));
        }
        self.objective = coeffs;
        Ok(())
    }

    pub fn set_objective_sparse(&mut self, coeffs: Vec<(usize, Rational)>) -> Result<()> {
        let sparse = normalize_sparse(self.num_vars, coeffs)?;
        self.objective = vec![Rational::zero(); self.num_vars];
        for (j, a) in sparse {
            self.objective[j] = a;
        }
        Ok(())
    }

    /// Add a constraint from a dense coefficient vector; returns its index.
    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Result<usize> {
        if coeffs.len() != self.num_vars {
            return Err(Error::MalformedInput(format!(
                "constraint has {} coefficients, expected {}",
                coeffs.len(),
                self.num_vars
            )));
        }
        let sparse = coeffs.into_iter().enumerate().filter(|(_, a)| !a.is_zero()).collect();
        self.constraints.push(Constraint { coeffs: sparse, relation, rhs });
        Ok(self.constraints.len() - 1)
    }

    pub fn add_sparse_constraint(
        &mut self,
        coeffs: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<usize> {
        let coeffs = normalize_sparse(self.num_vars, coeffs)?;
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(self.constraints.len() - 1)
    }

    pub fn nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum::<usize>()
            + self.objective.iter().filter(|a| !a.is_zero()).count()
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self
                .var_kinds
                .iter()
                .zip(x)
                .all(|(k, v)| *k == VarKind::Free || !v.is_negative())
            && self.constraints.iter().all(|c| c.satisfied_by(x))
    }

    /// Plain-text dump of the program, one constraint per line. The format
    /// is meant for debugging only.
    pub fn debug_dump(&self) -> String {
        let mut out = format!("{:?} {} vars\n", self.sense, self.num_vars);
        let term = |(j, a): &(usize, Rational)| format!("{}*x{}", rational::format(a), j);
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, a)| term(&(j, a.clone())))
            .collect();
        out.push_str(&format!("obj: {}\n", obj.join(" + ")));
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs: Vec<String> = c.coeffs.iter().map(term).collect();
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            out.push_str(&format!("c{i}: {} {rel} {}\n", lhs.join(" + "), rational::format(&c.rhs)));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve.
///
/// For `Optimal` the dual certificate `y` has one entry per constraint and
/// proves the value by weak duality; for `Infeasible` it is a Farkas
/// certificate normalised to `b·y = -1`. Sign conventions: for a maximisation
/// `y >= 0` on `<=` rows and `y <= 0` on `>=` rows (reversed for
/// minimisation), `y` is free on equality rows.
#[derive(Clone, Debug, PartialEq)]
pub struct LPSolution {
    pub status: Status,
    pub value: Option<Rational>,
    pub point: Option<Vec<Rational>>,
    pub dual_certificate: Option<Vec<Rational>>,
}

impl LPSolution {
    fn infeasible(certificate: Vec<Rational>) -> Self {
        LPSolution { status: Status::Infeasible, value: None, point: None, dual_certificate: Some(certificate) }
    }

    fn unbounded() -> Self {
        LPSolution { status: Status::Unbounded, value: None, point: None, dual_certificate: None }
    }

    /// Re-check every exactness claim against the program.
    pub fn verify(&self, lp: &LinearProgram) -> std::result::Result<(), String> {
        match self.status {
            Status::Optimal => {
                let x = self.point.as_ref().ok_or("optimal without point")?;
                let v = self.value.as_ref().ok_or("optimal without value")?;
                let y = self.dual_certificate.as_ref().ok_or("optimal without certificate")?;
                if !lp.is_feasible_point(x) {
                    return Err("point violates a constraint".into());
                }
                if lp.objective_at(x) != *v {
                    return Err("objective at point differs from value".into());
                }
                check_dual(lp, y, Some(v))
            }
            Status::Infeasible => {
                let y = self.dual_certificate.as_ref().ok_or("infeasible without certificate")?;
                check_farkas(lp, y)
            }
            Status::Unbounded => Ok(()),
        }
    }
}

fn column_sums(lp: &LinearProgram, y: &[Rational]) -> Vec<Rational> {
    let mut sums = vec![Rational::zero(); lp.num_vars];
    for (c, yi) in lp.constraints.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (j, a) in &c.coeffs {
            sums[*j] += a * yi;
        }
    }
    sums
}

fn sign_ok(relation: Relation, y: &Rational, maximize: bool) -> bool {
    match (relation, maximize) {
        (Relation::Eq, _) => true,
        (Relation::Le, true) | (Relation::Ge, false) => !y.is_negative(),
        (Relation::Ge, true) | (Relation::Le, false) => !y.is_positive(),
    }
}

fn check_dual(lp: &LinearProgram, y: &[Rational], value: Option<&Rational>) -> std::result::Result<(), String> {
    if y.len() != lp.constraints.len() {
        return Err("certificate length mismatch".into());
    }
    let maximize = lp.sense == Sense::Maximize;
    for (i, (c, yi)) in lp.constraints.iter().zip(y).enumerate() {
        if !sign_ok(c.relation, yi, maximize) {
            return Err(format!("dual sign wrong on constraint {i}"));
        }
    }
    let sums = column_sums(lp, y);
    for (j, (s, c)) in sums.iter().zip(&lp.objective).enumerate() {
        let ok = match (lp.var_kinds[j], maximize) {
            (VarKind::Free, _) => s == c,
            (VarKind::NonNegative, true) => s >= c,
            (VarKind::NonNegative, false) => s <= c,
        };
        if !ok {
            return Err(format!("dual constraint for variable {j} fails"));
        }
    }
    let bound: Rational = lp.constraints.iter().zip(y).map(|(c, yi)| &c.rhs * yi).sum();
    match value {
        Some(v) if bound != *v => Err(format!(
            "dual bound {} differs from value {}",
            rational::format(&bound),
            rational::format(v)
        )),
        _ => Ok(()),
    }
}

fn check_farkas(lp: &LinearProgram, y: &[Rational]) -> std::result::Result<(), String> {
    if y.len() != lp.constraints.len() {
        return Err("certificate length mismatch".into());
    }
    for (i, (c, yi)) in lp.constraints.iter().zip(y).enumerate() {
        if !sign_ok(c.relation, yi, true) {
            return Err(format!("farkas sign wrong on constraint {i}"));
        }
    }
    let sums = column_sums(lp, y);
    for (j, s) in sums.iter().enumerate() {
        let ok = match lp.var_kinds[j] {
            VarKind::Free => s.is_zero(),
            VarKind::NonNegative => !s.is_negative(),
        };
        if !ok {
            return Err(format!("farkas combination nonzero on variable {j}"));
        }
    }
    let rhs: Rational = lp.constraints.iter().zip(y).map(|(c, yi)| &c.rhs * yi).sum();
    if rhs.is_negative() {
        Ok(())
    } else {
        Err("farkas combination does not reach a contradiction".into())
    }
}

fn normalize_farkas(mut y: Vec<Rational>, lp: &LinearProgram) -> Vec<Rational> {
    let rhs: Rational = lp.constraints.iter().zip(&y).map(|(c, yi)| &c.rhs * yi).sum();
    if rhs.is_negative() {
        let scale = -rhs;
        for v in y.iter_mut() {
            *v /= &scale;
        }
    }
    y
}

/// Solve with the process-wide size caps.
pub fn solve_lp(lp: &LinearProgram) -> Result<LPSolution> {
    solve_lp_with_caps(lp, SizeCaps::global())
}

pub fn solve_lp_with_caps(lp: &LinearProgram, caps: &SizeCaps) -> Result<LPSolution> {
    if lp.objective.len() != lp.num_vars || lp.var_kinds.len() != lp.num_vars {
        return Err(Error::MalformedInput("objective or variable kinds length mismatch".into()));
    }
    caps::check("LP nonzeros", lp.nonzeros(), caps.lp_nonzeros)?;
    let solution = if lp.constraints.len() <= lp.num_vars {
        solve_primal(lp)
    } else {
        solve_via_dual(lp)
    };
    debug_assert!(solution.verify(lp).is_ok(), "{:?}", solution.verify(lp));
    Ok(solution)
}

fn solve_primal(lp: &LinearProgram) -> LPSolution {
    let rows = lp.constraints.len();
    let signs: Vec<bool> = lp.constraints.iter().map(|c| c.rhs.is_negative()).collect();
    let flip = |i: usize, a: &Rational| if signs[i] { -a.clone() } else { a.clone() };

    let mut var_cols: Vec<SparseColumn> = vec![Vec::new(); lp.num_vars];
    for (i, c) in lp.constraints.iter().enumerate() {
        for (j, a) in &c.coeffs {
            var_cols[*j].push((i, flip(i, a)));
        }
    }
    let maximize = lp.sense == Sense::Maximize;
    let mut cols = Vec::new();
    let mut cost = Vec::new();
    // (plus column, optional minus column) per original variable
    let mut layout = Vec::with_capacity(lp.num_vars);
    for j in 0..lp.num_vars {
        let c = if maximize { -lp.objective[j].clone() } else { lp.objective[j].clone() };
        let plus = cols.len();
        cols.push(var_cols[j].clone());
        cost.push(c.clone());
        let minus = if lp.var_kinds[j] == VarKind::Free {
            cols.push(var_cols[j].iter().map(|(r, a)| (*r, -a.clone())).collect());
            cost.push(-c);
            Some(plus + 1)
        } else {
            None
        };
        layout.push((plus, minus));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let unit = Rational::from_integer(1.into());
        let entry = match c.relation {
            Relation::Le => unit,
            Relation::Ge => -unit,
            Relation::Eq => continue,
        };
        cols.push(vec![(i, flip(i, &entry))]);
        cost.push(Rational::zero());
    }
    let rhs = lp.constraints.iter().enumerate().map(|(i, c)| flip(i, &c.rhs)).collect();
    let sf = StandardForm { rows, cols, cost, rhs };

    match simplex::solve(&sf) {
        Outcome::Optimal { x, pi } => {
            let point: Vec<Rational> = layout
                .iter()
                .map(|(p, m)| match m {
                    Some(m) => &x[*p] - &x[*m],
                    None => x[*p].clone(),
                })
                .collect();
            let y = pi
                .into_iter()
                .enumerate()
                .map(|(i, p)| {
                    let p = if maximize { -p } else { p };
                    if signs[i] { -p } else { p }
                })
                .collect();
            LPSolution {
                status: Status::Optimal,
                value: Some(lp.objective_at(&point)),
                point: Some(point),
                dual_certificate: Some(y),
            }
        }
        Outcome::Infeasible { farkas } => {
            let y = farkas
                .into_iter()
                .enumerate()
                .map(|(i, v)| if signs[i] { -v } else { v })
                .collect();
            LPSolution::infeasible(normalize_farkas(y, lp))
        }
        Outcome::Unbounded { .. } => LPSolution::unbounded(),
    }
}

/// Column layout of the dual standard form: for each original constraint
/// the column(s) carrying its multiplier.
struct DualLayout {
    /// (column, sign) pairs per constraint; equality rows get two.
    multiplier_cols: Vec<Vec<(usize, i8)>>,
}

fn build_dual(lp: &LinearProgram, objective: &[Rational]) -> (StandardForm, DualLayout, Vec<bool>) {
    let rows = lp.num_vars;
    let row_flip: Vec<bool> = objective.iter().map(|c| c.is_negative()).collect();
    let mut cols: Vec<SparseColumn> = Vec::new();
    let mut cost = Vec::new();
    let mut multiplier_cols = Vec::with_capacity(lp.constraints.len());
    for c in &lp.constraints {
        // `>=` rows are negated into `<=` form.
        let tau: i8 = if c.relation == Relation::Ge { -1 } else { 1 };
        let base: SparseColumn = c
            .coeffs
            .iter()
            .map(|(j, a)| {
                let mut v = if tau < 0 { -a.clone() } else { a.clone() };
                if row_flip[*j] {
                    v = -v;
                }
                (*j, v)
            })
            .collect();
        let b = if tau < 0 { -c.rhs.clone() } else { c.rhs.clone() };
        let mut mine = vec![(cols.len(), tau)];
        cols.push(base.clone());
        cost.push(b.clone());
        if c.relation == Relation::Eq {
            mine.push((cols.len(), -tau));
            cols.push(base.into_iter().map(|(j, v)| (j, -v)).collect());
            cost.push(-b);
        }
        multiplier_cols.push(mine);
    }
    for j in 0..lp.num_vars {
        if lp.var_kinds[j] == VarKind::NonNegative {
            let v = Rational::from_integer((-1).into());
            cols.push(vec![(j, if row_flip[j] { -v } else { v })]);
            cost.push(Rational::zero());
        }
    }
    let rhs = objective.iter().map(|c| c.abs()).collect();
    (StandardForm { rows, cols, cost, rhs }, DualLayout { multiplier_cols }, row_flip)
}

fn gather_multipliers(layout: &DualLayout, values: &[Rational]) -> Vec<Rational> {
    layout
        .multiplier_cols
        .iter()
        .map(|cols| {
            cols.iter().fold(Rational::zero(), |acc, (col, sign)| {
                if *sign < 0 {
                    acc - &values[*col]
                } else {
                    acc + &values[*col]
                }
            })
        })
        .collect()
}

fn solve_via_dual(lp: &LinearProgram) -> LPSolution {
    let maximize = lp.sense == Sense::Maximize;
    let objective: Vec<Rational> =
        lp.objective.iter().map(|c| if maximize { c.clone() } else { -c.clone() }).collect();
    let (sf, layout, row_flip) = build_dual(lp, &objective);
    match simplex::solve(&sf) {
        Outcome::Optimal { x, pi } => {
            let point: Vec<Rational> = pi
                .into_iter()
                .zip(&row_flip)
                .map(|(p, f)| if *f { -p } else { p })
                .collect();
            let mut y = gather_multipliers(&layout, &x);
            if !maximize {
                for v in y.iter_mut() {
                    *v = -v.clone();
                }
            }
            LPSolution {
                status: Status::Optimal,
                value: Some(lp.objective_at(&point)),
                point: Some(point),
                dual_certificate: Some(y),
            }
        }
        Outcome::Unbounded { ray } => {
            let y = gather_multipliers(&layout, &ray);
            LPSolution::infeasible(normalize_farkas(y, lp))
        }
        Outcome::Infeasible { .. } => {
            // The dual is infeasible: the primal is unbounded or infeasible.
            // Decide with the zero objective, whose dual is always feasible.
            let zeros = vec![Rational::zero(); lp.num_vars];
            let (sf0, layout0, _) = build_dual(lp, &zeros);
            match simplex::solve(&sf0) {
                Outcome::Unbounded { ray } => {
                    let y = gather_multipliers(&layout0, &ray);
                    LPSolution::infeasible(normalize_farkas(y, lp))
                }
                _ => LPSolution::unbounded(),
            }
        }
    }
}

/// Feasibility of `A·λ = b` with `λ_j >= 0` where `nonneg[j]` holds (free
/// otherwise). Optimal means a solution exists and `point` is one.
pub fn farkas_feasibility(equalities: &[(Vec<Rational>, Rational)], nonneg: &[bool]) -> Result<LPSolution> {
    let num_vars = nonneg.len();
    let mut lp = LinearProgram::new(num_vars, Sense::Maximize);
    for (j, &nn) in nonneg.iter().enumerate() {
        if !nn {
            lp.set_var_kind(j, VarKind::Free)?;
        }
    }
    for (coeffs, rhs) in equalities {
        lp.add_constraint(coeffs.clone(), Relation::Eq, rhs.clone())?;
    }
    solve_lp(&lp)
}
