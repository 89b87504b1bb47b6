//! Multilinear polynomials on the cube {-1,1}^n in the character basis.
//!
//! A polynomial is a sparse map from subsets `α ⊆ [n]` (bitmasks, bit `b`
//! for variable `b`) to coefficients, i.e. its Fourier expansion
//! `Σ_α f̂(α) χ_α`. Assignment indices follow the crate-wide convention:
//! bit `b` of the index is set iff `x_{b+1} = -1`, so
//! `χ_α(x) = (-1)^{|α ∧ index|}`.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::rational::Rational;

pub type Mask = u64;

pub fn popcount(m: Mask) -> usize {
    m.count_ones() as usize
}

pub fn character(alpha: Mask, index: u64) -> i64 {
    if (alpha & index).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn mask_of(vars: &[usize]) -> Mask {
    vars.iter().fold(0, |m, &v| m | (1 << v))
}

pub fn vars_of(mask: Mask) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// All subsets of `[n]` with at most `d` elements, ordered by size and then
/// lexicographically by their sorted element lists.
pub fn subsets_up_to(n: usize, d: usize) -> Vec<Mask> {
    let mut out = Vec::new();
    for k in 0..=d.min(n) {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            out.push(mask_of(&combo));
            // next combination in lexicographic order
            let mut i = k;
            while i > 0 && combo[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..k {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

/// Iterate over all submasks of `mask`, including zero and `mask` itself.
pub fn submasks(mask: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// Lexicographic order on sorted element lists.
pub fn lex_cmp(a: Mask, b: Mask) -> std::cmp::Ordering {
    vars_of(a).cmp(&vars_of(b))
}

/// In-place Walsh–Hadamard butterfly: turns coefficients into values
/// (without scaling) and values into `2^n` times the coefficients.
pub(crate) fn hadamard_in_place(values: &mut [Rational]) {
    let len = values.len();
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for i in start..start + h {
                let a = values[i].clone();
                let b = std::mem::take(&mut values[i + h]);
                values[i + h] = &a - &b;
                values[i] = a + b;
            }
        }
        h *= 2;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultilinearPoly {
    n: usize,
    coeffs: BTreeMap<Mask, Rational>,
}

impl MultilinearPoly {
    pub fn zero(n: usize) -> Self {
        MultilinearPoly { n, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(0, c);
        p
    }

    pub fn character(n: usize, alpha: Mask) -> Self {
        let mut p = Self::zero(n);
        p.add_term(alpha, Rational::from_integer(1.into()));
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Mask, Rational)>) -> Self {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, alpha: Mask) -> Rational {
        self.coeffs.get(&alpha).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Rational)> + '_ {
        self.coeffs.iter().map(|(m, c)| (*m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|m| popcount(*m)).max().unwrap_or(0)
    }

    /// Union of the variables appearing in nonzero terms: the minimal set
    /// the function depends on.
    pub fn support_vars(&self) -> Mask {
        self.coeffs.keys().fold(0, |acc, m| acc | m)
    }

    pub fn add_term(&mut self, alpha: Mask, c: Rational) {
        debug_assert!(self.n >= 64 || alpha >> self.n == 0, "term outside the variable range");
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(alpha).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&alpha);
        }
    }

    pub fn add_scaled(&mut self, other: &MultilinearPoly, scale: &Rational) {
        for (m, c) in other.terms() {
            self.add_term(m, c * scale);
        }
    }

    pub fn scaled(&self, s: &Rational) -> MultilinearPoly {
        let mut p = Self::zero(self.n);
        p.add_scaled(self, s);
        p
    }

    pub fn plus(&self, other: &MultilinearPoly) -> MultilinearPoly {
        let mut p = self.clone();
        p.add_scaled(other, &Rational::from_integer(1.into()));
        p
    }

    pub fn minus(&self, other: &MultilinearPoly) -> MultilinearPoly {
        let mut p = self.clone();
        p.add_scaled(other, &Rational::from_integer((-1).into()));
        p
    }

    /// Product on the cube, where `χ_α χ_β = χ_{α ⊕ β}`.
    pub fn times(&self, other: &MultilinearPoly) -> MultilinearPoly {
        let mut p = Self::zero(self.n.max(other.n));
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                p.add_term(a ^ b, ca * cb);
            }
        }
        p
    }

    pub fn evaluate(&self, index: u64) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in self.terms() {
            if character(m, index) > 0 {
                acc += c;
            } else {
                acc -= c;
            }
        }
        acc
    }

    /// Keep only the terms `α ⊆ keep`.
    pub fn restrict_terms(&self, keep: Mask) -> MultilinearPoly {
        MultilinearPoly::from_terms(
            self.n,
            self.terms().filter(|(m, _)| m & !keep == 0).map(|(m, c)| (m, c.clone())),
        )
    }

    /// Rename variable `v` to `map[v]` in a space of `new_n` variables.
    pub fn relabel(&self, map: &[usize], new_n: usize) -> MultilinearPoly {
        MultilinearPoly::from_terms(
            new_n,
            self.terms().map(|(m, c)| (relabel_mask(m, map), c.clone())),
        )
    }

    /// Dense table of values (length `2^n`).
    pub fn to_table(&self) -> Vec<Rational> {
        let mut values = vec![Rational::zero(); 1usize << self.n];
        for (m, c) in self.terms() {
            values[m as usize] = c.clone();
        }
        hadamard_in_place(&mut values);
        values
    }

    /// Values over the assignments of the support variables only, together
    /// with those variables (sorted). Enough to decide sign and sup norm.
    pub fn support_table(&self) -> (Vec<usize>, Vec<Rational>) {
        let vars = vars_of(self.support_vars());
        let mut map = vec![usize::MAX; 64];
        for (k, v) in vars.iter().enumerate() {
            map[*v] = k;
        }
        let compressed = self.relabel(&map, vars.len());
        (vars, compressed.to_table())
    }
}

pub fn relabel_mask(m: Mask, map: &[usize]) -> Mask {
    let mut out = 0;
    let mut rest = m;
    while rest != 0 {
        let b = rest.trailing_zeros() as usize;
        out |= 1 << map[b];
        rest &= rest - 1;
    }
    out
}

/// Serde adapter writing 0-based coordinate lists as 1-based.
pub mod one_based {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|i| i + 1).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        raw.into_iter()
            .map(|i| i.checked_sub(1).ok_or_else(|| serde::de::Error::custom("coordinates are 1-based")))
            .collect()
    }
}
