use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Constraint, Instance, Predicate};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub fn single_edge() -> Instance {
    Instance::max_cut(2, &[(0, 1)]).expect("valid")
}

pub fn triangle() -> Instance {
    cycle(3).expect("valid")
}

pub fn cycle(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::Parameter(format!("cycle needs at least 3 vertices, got {n}")));
    }
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    edges.push((0, n - 1));
    Instance::max_cut(n, &edges)
}

pub fn complete(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Parameter(format!("complete graph needs at least 2 vertices, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Instance::max_cut(n, &edges)
}

/// `G(n, p)`: pairs `i < j` in lexicographic order, each kept iff a fresh
/// 64-bit draw `r` satisfies `r < p·2^64`. ChaCha8 seeded with
/// `seed_from_u64(seed)`.
pub fn random_graph(n: usize, p: &Rational, seed: u64) -> Result<Instance> {
    if p.is_negative() || *p > Rational::one() {
        return Err(Error::Parameter(format!("edge probability {} outside [0, 1]", rational::format(p))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = BigInt::one() << 64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let r = BigInt::from(rng.gen::<u64>());
            if r * p.denom() < p.numer() * &scale {
                edges.push((i, j));
            }
        }
    }
    if edges.is_empty() {
        return Err(Error::Parameter(format!("G({n}, {}) with seed {seed} has no edges", rational::format(p))));
    }
    Instance::max_cut(n, &edges)
}

/// `m` clauses on `n` variables. Each clause draws three distinct
/// variables with `gen_range(0..n)` (redrawing repeats), then a sign
/// pattern with `gen_range(0..8)`. Predicate `s` is the disjunction with
/// sign pattern `s`.
pub fn random_3sat(n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n < 3 {
        return Err(Error::Parameter(format!("3-SAT needs at least 3 variables, got {n}")));
    }
    if m == 0 {
        return Err(Error::Parameter("3-SAT needs at least one clause".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let mut vars = Vec::with_capacity(3);
        while vars.len() < 3 {
            let v = rng.gen_range(0..n);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let signs: usize = rng.gen_range(0..8);
        constraints.push(Constraint { predicate: signs, vars });
    }
    Instance::new(n, sat_predicates(), constraints)
}

pub(crate) fn sat_predicates() -> Vec<Predicate> {
    (0..8).map(Predicate::or3).collect()
}
