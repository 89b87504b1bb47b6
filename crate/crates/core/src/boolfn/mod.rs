//! Boolean functions on {-1,1}^n: exact Fourier analysis, densities,
//! entropy and juntas.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::caps::{self, SizeCaps};
use crate::error::{Error, Result};
use crate::poly::{self, Mask, MultilinearPoly};
use crate::rational::{self, Rational};

mod junta;

pub use junta::{chang_junta, chang_junta_with, is_junta, junta_support, verify_junta, JuntaCertificate, Threshold};

/// Dense table of a function `{-1,1}^n → Q`, indexed by assignment
/// (bit `b` set iff `x_{b+1} = -1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBoolFn", into = "RawBoolFn")]
pub struct BoolFn {
    n: usize,
    values: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoolFn {
    n: usize,
    #[serde(with = "rational::serde_vec")]
    values: Vec<Rational>,
}

impl TryFrom<RawBoolFn> for BoolFn {
    type Error = Error;
    fn try_from(raw: RawBoolFn) -> Result<Self> {
        BoolFn::new(raw.n, raw.values)
    }
}

impl From<BoolFn> for RawBoolFn {
    fn from(f: BoolFn) -> Self {
        RawBoolFn { n: f.n, values: f.values }
    }
}

impl BoolFn {
    pub fn new(n: usize, values: Vec<Rational>) -> Result<Self> {
        caps::check("boolean function variables", n, SizeCaps::global().boolfn_n)?;
        if values.len() != 1usize << n {
            return Err(Error::MalformedInput(format!(
                "table for n = {n} must have {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(BoolFn { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(u64) -> Rational) -> Result<Self> {
        caps::check("boolean function variables", n, SizeCaps::global().boolfn_n)?;
        Ok(BoolFn { n, values: (0..1u64 << n).map(f).collect() })
    }

    pub fn constant(n: usize, c: Rational) -> Result<Self> {
        Self::from_fn(n, |_| c.clone())
    }

    pub fn character(n: usize, alpha: Mask) -> Result<Self> {
        Self::from_fn(n, |x| rational::int(poly::character(alpha, x)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, index: u64) -> &Rational {
        &self.values[index as usize]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }

    pub fn mean(&self) -> Rational {
        let sum: Rational = self.values.iter().sum();
        sum / rational::pow2(self.n as i64)
    }

    /// `⟨f, g⟩ = E[f g]`.
    pub fn inner(&self, other: &BoolFn) -> Result<Rational> {
        if self.n != other.n {
            return Err(Error::MalformedInput("inner product of functions on different cubes".into()));
        }
        let sum: Rational = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(sum / rational::pow2(self.n as i64))
    }

    pub fn to_poly(&self) -> MultilinearPoly {
        fourier_transform_unchecked(self).to_poly()
    }
}

/// Fourier coefficients `f̂(α)` for every `α ⊆ [n]`, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierCoeffs {
    n: usize,
    coeffs: Vec<Rational>,
}

impl FourierCoeffs {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, alpha: Mask) -> &Rational {
        &self.coeffs[alpha as usize]
    }

    pub fn nonzero(&self) -> BTreeMap<Mask, Rational> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m as Mask, c.clone()))
            .collect()
    }

    pub fn sum_of_squares(&self) -> Rational {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn to_poly(&self) -> MultilinearPoly {
        MultilinearPoly::from_terms(self.n, self.nonzero())
    }

    pub fn from_poly(p: &MultilinearPoly) -> Result<Self> {
        caps::check("boolean function variables", p.n(), SizeCaps::global().boolfn_n)?;
        let mut coeffs = vec![Rational::zero(); 1usize << p.n()];
        for (m, c) in p.terms() {
            coeffs[m as usize] = c.clone();
        }
        Ok(FourierCoeffs { n: p.n(), coeffs })
    }
}

pub fn fourier_transform(f: &BoolFn) -> Result<FourierCoeffs> {
    caps::check("boolean function variables", f.n, SizeCaps::global().boolfn_n)?;
    Ok(fourier_transform_unchecked(f))
}

fn fourier_transform_unchecked(f: &BoolFn) -> FourierCoeffs {
    let mut coeffs = f.values.clone();
    poly::hadamard_in_place(&mut coeffs);
    let scale = rational::pow2(-(f.n as i64));
    for c in coeffs.iter_mut() {
        *c *= &scale;
    }
    FourierCoeffs { n: f.n, coeffs }
}

pub fn inverse_transform(c: &FourierCoeffs) -> BoolFn {
    let mut values = c.coeffs.clone();
    poly::hadamard_in_place(&mut values);
    BoolFn { n: c.n, values }
}

/// A probability density relative to the uniform measure: `q ≥ 0`,
/// `E q = 1`. Held as a sparse Fourier polynomial so only the coordinates
/// it depends on are ever tabulated.
#[derive(Clone, Debug)]
pub struct Density {
    q: MultilinearPoly,
    deficit: OnceLock<f64>,
}

impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

impl Density {
    pub fn from_poly(q: MultilinearPoly) -> Result<Self> {
        if q.coeff(0) != Rational::one() {
            return Err(Error::MalformedInput(format!(
                "density must have mean 1, got {}",
                rational::format(&q.coeff(0))
            )));
        }
        caps::check("density support", poly::popcount(q.support_vars()), SizeCaps::global().boolfn_n)?;
        let (vars, table) = q.support_table();
        if let Some(idx) = table.iter().position(|v| v.is_negative()) {
            return Err(Error::MalformedInput(format!(
                "density is negative ({}) at an assignment of coordinates {:?}",
                rational::format(&table[idx]),
                vars.iter().map(|v| v + 1).collect::<Vec<_>>()
            )));
        }
        Ok(Density { q, deficit: OnceLock::new() })
    }

    pub fn from_boolfn(f: &BoolFn) -> Result<Self> {
        Self::from_poly(fourier_transform(f)?.to_poly())
    }

    pub fn uniform(n: usize) -> Self {
        Density { q: MultilinearPoly::constant(n, Rational::one()), deficit: OnceLock::new() }
    }

    /// `q = 2^n` on one assignment and 0 elsewhere.
    pub fn point_mass(n: usize, index: u64) -> Self {
        let terms = (0..1u64 << n).map(|alpha| (alpha, rational::int(poly::character(alpha, index))));
        Density { q: MultilinearPoly::from_terms(n, terms), deficit: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn poly(&self) -> &MultilinearPoly {
        &self.q
    }

    pub fn coeff(&self, alpha: Mask) -> Rational {
        self.q.coeff(alpha)
    }

    pub fn to_boolfn(&self) -> Result<BoolFn> {
        caps::check("boolean function variables", self.n(), SizeCaps::global().boolfn_n)?;
        Ok(BoolFn { n: self.n(), values: self.q.to_table() })
    }

    pub fn sup_norm(&self) -> Rational {
        let (_, table) = self.q.support_table();
        table.into_iter().fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }

    /// `n − H(μ_q)` in bits. Tolerance 1e-12 absolute.
    pub fn entropy_deficit(&self) -> f64 {
        *self.deficit.get_or_init(|| {
            // only the support coordinates contribute: t = E_y[q log2 q]
            let (vars, table) = self.q.support_table();
            let total: f64 = table
                .iter()
                .map(|v| rational::to_f64(v))
                .filter(|v| *v > 0.0)
                .map(|v| v * v.log2())
                .sum();
            total / (1u64 << vars.len()) as f64
        })
    }

    /// Density of the marginal of `μ_q` on `coords` (0-based, any order;
    /// the result's variable `k` is the `k`-th smallest listed coordinate).
    pub fn conditional(&self, coords: &[usize]) -> Result<Density> {
        let mut s: Vec<usize> = coords.to_vec();
        s.sort_unstable();
        s.dedup();
        if let Some(bad) = s.iter().find(|&&v| v >= self.n()) {
            return Err(Error::MalformedInput(format!("coordinate {} outside [1, {}]", bad + 1, self.n())));
        }
        let keep = poly::mask_of(&s);
        let mut map = vec![usize::MAX; 64];
        for (k, v) in s.iter().enumerate() {
            map[*v] = k;
        }
        let q = self.q.restrict_terms(keep).relabel(&map, s.len());
        Ok(Density { q, deficit: OnceLock::new() })
    }
}

pub fn entropy_deficit(q: &Density) -> f64 {
    q.entropy_deficit()
}

pub fn conditional_density(q: &Density, coords: &[usize]) -> Result<Density> {
    q.conditional(coords)
}

#[cfg(test)]
mod tests;
