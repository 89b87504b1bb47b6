//! Two-phase revised simplex over exact rationals on the standard form
//! `min c·x  s.t.  A x = b, x >= 0, b >= 0`.
//!
//! The basis inverse is kept explicitly and updated by elementary row
//! operations. Entering and leaving variables follow Bland's rule, so the
//! method terminates on degenerate problems. Artificial variables start
//! basic and are never allowed back in once they leave.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

pub(crate) type SparseColumn = Vec<(usize, Rational)>;

pub(crate) struct StandardForm {
    pub rows: usize,
    pub cols: Vec<SparseColumn>,
    pub cost: Vec<Rational>,
    pub rhs: Vec<Rational>,
}

#[derive(Debug)]
pub(crate) enum Outcome {
    /// Optimal primal values (one per column) and simplex multipliers
    /// (one per row) with `cost_j - pi·a_j >= 0` for every column.
    Optimal { x: Vec<Rational>, pi: Vec<Rational> },
    /// `y·a_j >= 0` for every column and `y·b < 0`.
    Infeasible { farkas: Vec<Rational> },
    /// Direction over columns with `A d = 0`, `d >= 0`, `c·d < 0`.
    Unbounded { ray: Vec<Rational> },
}

enum PhaseEnd {
    Optimal(Vec<Rational>),
    Unbounded { entering: usize, column: Vec<Rational> },
}

struct Revised<'a> {
    sf: &'a StandardForm,
    m: usize,
    n: usize,
    binv: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    xb: Vec<Rational>,
    is_basic: Vec<bool>,
    pivots: usize,
}

impl<'a> Revised<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let m = sf.rows;
        let n = sf.cols.len();
        let binv = (0..m)
            .map(|i| {
                let mut row = vec![Rational::zero(); m];
                row[i] = Rational::from_integer(1.into());
                row
            })
            .collect();
        Revised {
            sf,
            m,
            n,
            binv,
            basis: (0..m).map(|i| n + i).collect(),
            xb: sf.rhs.clone(),
            is_basic: vec![false; n],
            pivots: 0,
        }
    }

    fn is_artificial(&self, var: usize) -> bool {
        var >= self.n
    }

    fn multipliers(&self, cost: &dyn Fn(usize) -> Rational) -> Vec<Rational> {
        let mut pi = vec![Rational::zero(); self.m];
        for (i, &var) in self.basis.iter().enumerate() {
            let cb = cost(var);
            if cb.is_zero() {
                continue;
            }
            for (k, b) in self.binv[i].iter().enumerate() {
                if !b.is_zero() {
                    pi[k] += &cb * b;
                }
            }
        }
        pi
    }

    fn column_image(&self, j: usize) -> Vec<Rational> {
        let col = &self.sf.cols[j];
        self.binv
            .iter()
            .map(|row| {
                let mut acc = Rational::zero();
                for (r, a) in col {
                    let b = &row[*r];
                    if !b.is_zero() {
                        acc += b * a;
                    }
                }
                acc
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, q: usize, u: &[Rational]) {
        let pr = u[r].clone();
        for b in self.binv[r].iter_mut() {
            if !b.is_zero() {
                *b /= &pr;
            }
        }
        self.xb[r] /= &pr;
        let nz: Vec<usize> = (0..self.m).filter(|&k| !self.binv[r][k].is_zero()).collect();
        let pivot_row = self.binv[r].clone();
        let xr = self.xb[r].clone();
        for i in 0..self.m {
            if i == r || u[i].is_zero() {
                continue;
            }
            let f = &u[i];
            let row = &mut self.binv[i];
            for &k in &nz {
                row[k] -= f * &pivot_row[k];
            }
            self.xb[i] -= f * &xr;
        }
        let leaving = self.basis[r];
        if !self.is_artificial(leaving) {
            self.is_basic[leaving] = false;
        }
        self.basis[r] = q;
        self.is_basic[q] = true;
        self.pivots += 1;
    }

    fn run(&mut self, cost: &dyn Fn(usize) -> Rational) -> PhaseEnd {
        loop {
            let pi = self.multipliers(cost);
            let entering = (0..self.n).find(|&j| {
                if self.is_basic[j] {
                    return false;
                }
                let mut d = cost(j);
                for (r, a) in &self.sf.cols[j] {
                    if !pi[*r].is_zero() {
                        d -= &pi[*r] * a;
                    }
                }
                d.is_negative()
            });
            let Some(q) = entering else {
                return PhaseEnd::Optimal(pi);
            };
            let u = self.column_image(q);
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.m {
                if !u[i].is_positive() {
                    continue;
                }
                let ratio = &self.xb[i] / &u[i];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, q, &u),
                None => return PhaseEnd::Unbounded { entering: q, column: u },
            }
        }
    }

    /// Pivot zero-level artificials out of the basis where a structural
    /// column can replace them; rows where none can are redundant and keep
    /// their artificial at zero for good.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let replacement = (0..self.n).find(|&j| {
                if self.is_basic[j] {
                    return false;
                }
                let mut acc = Rational::zero();
                for (r, a) in &self.sf.cols[j] {
                    let b = &self.binv[i][*r];
                    if !b.is_zero() {
                        acc += b * a;
                    }
                }
                !acc.is_zero()
            });
            if let Some(j) = replacement {
                let u = self.column_image(j);
                self.pivot(i, j, &u);
            }
        }
    }
}

pub(crate) fn solve(sf: &StandardForm) -> Outcome {
    debug_assert!(sf.rhs.iter().all(|b| !b.is_negative()));
    let mut rs = Revised::new(sf);
    let n = rs.n;

    let phase1_cost = |var: usize| -> Rational {
        if var >= n {
            Rational::from_integer(1.into())
        } else {
            Rational::zero()
        }
    };
    let pi = match rs.run(&phase1_cost) {
        PhaseEnd::Optimal(pi) => pi,
        // The phase-one objective is bounded below by zero.
        PhaseEnd::Unbounded { .. } => unreachable!("phase one cannot be unbounded"),
    };
    let infeasibility: Rational = rs
        .basis
        .iter()
        .zip(&rs.xb)
        .filter(|(var, _)| **var >= n)
        .map(|(_, x)| x.clone())
        .sum();
    if infeasibility.is_positive() {
        let farkas = pi.into_iter().map(|p| -p).collect();
        log::debug!("simplex: infeasible after {} pivots", rs.pivots);
        return Outcome::Infeasible { farkas };
    }
    rs.drive_out_artificials();

    let cost = &sf.cost;
    let phase2_cost = |var: usize| -> Rational {
        if var >= n {
            Rational::zero()
        } else {
            cost[var].clone()
        }
    };
    let end = rs.run(&phase2_cost);
    log::debug!("simplex: {} pivots on {}x{}", rs.pivots, rs.m, rs.n);
    match end {
        PhaseEnd::Optimal(pi) => {
            let mut x = vec![Rational::zero(); n];
            for (i, &var) in rs.basis.iter().enumerate() {
                if var < n {
                    x[var] = rs.xb[i].clone();
                }
            }
            Outcome::Optimal { x, pi }
        }
        PhaseEnd::Unbounded { entering, column } => {
            let mut ray = vec![Rational::zero(); n];
            ray[entering] = Rational::from_integer(1.into());
            for (i, &var) in rs.basis.iter().enumerate() {
                if var < n {
                    ray[var] = -column[i].clone();
                }
            }
            Outcome::Unbounded { ray }
        }
    }
}
