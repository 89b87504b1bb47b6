//! Boolean Max-CSP instances: predicates, values, brute-force optimum,
//! generators, planting and the universal linearization.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::caps::{self, SizeCaps};
use crate::error::{Error, Result};
use crate::poly::{self, Mask, MultilinearPoly};
use crate::rational::{self, Rational};

mod generate;
mod parse;

pub use generate::{complete, cycle, random_3sat, random_graph, single_edge, triangle};
pub use parse::{parse_dimacs_cnf, parse_edge_list, parse_instance, write_dimacs_cnf, write_edge_list};

pub const MAX_ARITY: usize = 4;

/// A k-ary predicate. Entry `i` of the table is its value on the argument
/// tuple whose `b`-th entry is `-1` iff bit `b` of `i` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
    pub table: Vec<bool>,
}

impl Predicate {
    pub fn new(name: impl Into<String>, arity: usize, table: Vec<bool>) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::MalformedInput(format!("predicate arity {arity} outside [1, {MAX_ARITY}]")));
        }
        if table.len() != 1 << arity {
            return Err(Error::MalformedInput(format!(
                "predicate of arity {arity} needs {} table entries, got {}",
                1 << arity,
                table.len()
            )));
        }
        Ok(Predicate { name: name.into(), arity, table })
    }

    /// `x_1 ≠ x_2`
    pub fn cut() -> Self {
        Predicate { name: "cut".into(), arity: 2, table: vec![false, true, true, false] }
    }

    /// Disjunction of three literals where `-1` is true; bit `b` of `signs`
    /// negates literal `b`.
    pub fn or3(signs: u8) -> Self {
        let signs = (signs & 7) as usize;
        let table = (0..8).map(|i| i != signs).collect();
        Predicate { name: format!("or3-{signs}"), arity: 3, table }
    }

    pub fn constant_true(arity: usize) -> Self {
        Predicate { name: "true".into(), arity, table: vec![true; 1 << arity] }
    }

    pub fn holds(&self, local: usize) -> bool {
        self.table[local]
    }

    /// Fourier expansion on the predicate's own `arity` variables.
    pub fn polynomial(&self) -> MultilinearPoly {
        let size = 1usize << self.arity;
        let mut coeffs: Vec<Rational> =
            self.table.iter().map(|&b| if b { Rational::from_integer(1.into()) } else { Rational::zero() }).collect();
        poly::hadamard_in_place(&mut coeffs);
        let scale = rational::rat(1, size as i64);
        MultilinearPoly::from_terms(self.arity, coeffs.into_iter().enumerate().map(|(m, c)| (m as Mask, c * &scale)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub predicate: usize,
    /// Distinct 0-based variable indices, one per predicate argument.
    pub vars: Vec<usize>,
}

impl Constraint {
    fn local_index(&self, x: u64) -> usize {
        self.vars.iter().enumerate().fold(0, |acc, (b, &v)| acc | (((x >> v) & 1) as usize) << b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    n: usize,
    predicates: Vec<Predicate>,
    constraints: Vec<Constraint>,
}

impl Instance {
    pub fn new(n: usize, predicates: Vec<Predicate>, constraints: Vec<Constraint>) -> Result<Self> {
        if n > 64 {
            return Err(Error::MalformedInput(format!("{n} variables exceed the 64-variable assignment width")));
        }
        if constraints.is_empty() {
            return Err(Error::MalformedInput("instance has no constraints".into()));
        }
        for (i, c) in constraints.iter().enumerate() {
            let p = predicates.get(c.predicate).ok_or_else(|| {
                Error::MalformedInput(format!("constraint {} references unknown predicate {}", i + 1, c.predicate))
            })?;
            if c.vars.len() != p.arity {
                return Err(Error::MalformedInput(format!(
                    "constraint {} has {} variables for a predicate of arity {}",
                    i + 1,
                    c.vars.len(),
                    p.arity
                )));
            }
            if let Some(v) = c.vars.iter().find(|&&v| v >= n) {
                return Err(Error::MalformedInput(format!("constraint {} uses variable {} > n = {n}", i + 1, v + 1)));
            }
            let mask = poly::mask_of(&c.vars);
            if poly::popcount(mask) != c.vars.len() {
                return Err(Error::MalformedInput(format!("constraint {} repeats a variable", i + 1)));
            }
        }
        Ok(Instance { n, predicates, constraints })
    }

    /// Max Cut on a graph given by 0-based edges.
    pub fn max_cut(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let constraints = edges.iter().map(|&(u, v)| Constraint { predicate: 0, vars: vec![u, v] }).collect();
        Instance::new(n, vec![Predicate::cut()], constraints)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn max_arity(&self) -> usize {
        self.constraints.iter().map(|c| c.vars.len()).max().unwrap_or(0)
    }

    /// Edges when every constraint is a cut constraint.
    pub fn cut_edges(&self) -> Option<Vec<(usize, usize)>> {
        self.constraints
            .iter()
            .map(|c| (self.predicates[c.predicate] == Predicate::cut()).then(|| (c.vars[0], c.vars[1])))
            .collect()
    }

    pub fn is_max_cut(&self) -> bool {
        self.cut_edges().is_some()
    }

    pub fn satisfied(&self, x: u64) -> usize {
        self.constraints.iter().filter(|c| self.predicates[c.predicate].holds(c.local_index(x))).count()
    }

    /// `ℑ(x)` at an assignment index.
    pub fn value_at(&self, x: u64) -> Rational {
        rational::rat(self.satisfied(x) as i64, self.m() as i64)
    }

    /// `ℑ(x)` for `x ∈ {-1,1}^n`.
    pub fn evaluate(&self, x: &[i8]) -> Result<Rational> {
        Ok(self.value_at(assignment_index(self.n, x)?))
    }
}

pub fn evaluate(inst: &Instance, x: &[i8]) -> Result<Rational> {
    inst.evaluate(x)
}

pub fn assignment_index(n: usize, x: &[i8]) -> Result<u64> {
    if x.len() != n {
        return Err(Error::MalformedInput(format!("assignment has length {}, expected {n}", x.len())));
    }
    let mut idx = 0u64;
    for (b, &v) in x.iter().enumerate() {
        match v {
            1 => {}
            -1 => idx |= 1 << b,
            _ => return Err(Error::MalformedInput(format!("assignment entry {v} is not ±1"))),
        }
    }
    Ok(idx)
}

pub fn assignment_from_index(n: usize, idx: u64) -> Vec<i8> {
    (0..n).map(|b| if idx >> b & 1 == 1 { -1 } else { 1 }).collect()
}

/// `+`/`-` string, `x_1` first.
pub fn format_assignment(n: usize, idx: u64) -> String {
    (0..n).map(|b| if idx >> b & 1 == 1 { '-' } else { '+' }).collect()
}

pub fn parse_assignment(text: &str) -> Result<Vec<i8>> {
    text.trim()
        .chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            _ => Err(Error::MalformedInput(format!("assignment character {c:?} is not + or -"))),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    pub value: Rational,
    pub witness: u64,
}

impl Optimum {
    pub fn witness_vector(&self, n: usize) -> Vec<i8> {
        assignment_from_index(n, self.witness)
    }
}

/// Exact maximum over all assignments; the smallest maximising index wins.
pub fn brute_force_opt(inst: &Instance) -> Result<Optimum> {
    caps::check("brute-force variables", inst.n, SizeCaps::global().brute_force_n)?;
    let mut best = 0;
    let mut witness = 0;
    for x in 0..1u64 << inst.n {
        let s = inst.satisfied(x);
        if s > best {
            best = s;
            witness = x;
            if best == inst.m() {
                break;
            }
        }
    }
    Ok(Optimum { value: rational::rat(best as i64, inst.m() as i64), witness })
}

/// `ℑ̃` with `⟨ℑ̃, x̃⟩ = ℑ(x)`.
pub fn instance_polynomial(inst: &Instance) -> MultilinearPoly {
    let per_pred: Vec<MultilinearPoly> = inst.predicates.iter().map(Predicate::polynomial).collect();
    let weight = rational::rat(1, inst.m() as i64);
    let mut out = MultilinearPoly::zero(inst.n);
    for c in &inst.constraints {
        for (m, coeff) in per_pred[c.predicate].terms() {
            out.add_term(poly::relabel_mask(m, &c.vars), coeff * &weight);
        }
    }
    out
}

/// `x̃`: the characters `χ_α(x)` for every `|α| ≤ d`.
pub fn assignment_point(n: usize, x: u64, d: usize) -> BTreeMap<Mask, Rational> {
    poly::subsets_up_to(n, d).into_iter().map(|m| (m, rational::int(poly::character(m, x)))).collect()
}

/// `⟨p, y⟩` where `y` is indexed by subsets; missing entries count as 0.
pub fn pair(p: &MultilinearPoly, y: &BTreeMap<Mask, Rational>) -> Rational {
    p.terms().filter_map(|(m, c)| y.get(&m).map(|v| c * v)).sum()
}

/// Re-index an instance on `s.len()` variables through `s` (0-based) into
/// `n` variables.
pub fn plant(inst: &Instance, s: &[usize], n: usize) -> Result<Instance> {
    if s.len() != inst.n {
        return Err(Error::MalformedInput(format!(
            "planting set has {} coordinates for an instance on {}",
            s.len(),
            inst.n
        )));
    }
    if let Some(v) = s.iter().find(|&&v| v >= n) {
        return Err(Error::MalformedInput(format!("planting coordinate {} exceeds n = {n}", v + 1)));
    }
    if poly::popcount(poly::mask_of(s)) != s.len() {
        return Err(Error::MalformedInput("planting coordinates repeat".into()));
    }
    let constraints = inst
        .constraints
        .iter()
        .map(|c| Constraint { predicate: c.predicate, vars: c.vars.iter().map(|&v| s[v]).collect() })
        .collect();
    Instance::new(n, inst.predicates.clone(), constraints)
}

/// Same constraints on `2m` variables; the last `m` are unused.
pub fn dummy_extend(inst: &Instance) -> Instance {
    Instance { n: 2 * inst.n, predicates: inst.predicates.clone(), constraints: inst.constraints.clone() }
}

#[cfg(test)]
mod tests;
