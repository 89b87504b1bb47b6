use std::cmp::Ordering;

use num_traits::Signed;
use serde::Serialize;

use super::{BoolFn, Density};
use crate::error::{Error, Result};
use crate::poly::{self, Mask};
use crate::rational::{self, Rational};

/// The threshold `γ`, kept as `γ⁴` so irrational thresholds such as
/// `(16mtd)^{1/2} n^{-1/4}` are compared exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Threshold {
    #[serde(with = "rational::serde_str")]
    pub gamma_pow4: Rational,
    /// `γ` itself when rational.
    #[serde(with = "rational::serde_opt")]
    pub gamma: Option<Rational>,
}

impl Threshold {
    pub fn exact(gamma: Rational) -> Self {
        let sq = &gamma * &gamma;
        Threshold { gamma_pow4: &sq * &sq, gamma: Some(gamma) }
    }

    pub fn from_pow4(gamma_pow4: Rational) -> Self {
        Threshold { gamma_pow4, gamma: None }
    }

    /// `|c| > γ`
    pub fn exceeded_by(&self, c: &Rational) -> bool {
        let sq = c * c;
        &sq * &sq > self.gamma_pow4
    }

    pub fn approx(&self) -> f64 {
        match &self.gamma {
            Some(g) => rational::to_f64(g),
            None => rational::to_f64(&self.gamma_pow4).powf(0.25),
        }
    }

    /// `count ≤ k·t/γ²`, i.e. `count²γ⁴ ≤ k²t²`, for `t ≥ 0`.
    fn count_within(&self, count: usize, k: usize, t: &Rational) -> bool {
        let c = Rational::from_integer(count.into());
        let k = Rational::from_integer(k.into());
        &c * &c * &self.gamma_pow4 <= &k * &k * t * t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct JuntaCertificate {
    /// Junta coordinates, 0-based and sorted.
    #[serde(with = "poly::one_based")]
    pub junta: Vec<usize>,
    pub degree: usize,
    pub gamma: Threshold,
    #[serde(with = "rational::serde_str")]
    pub t: Rational,
    /// Heavy coefficients `|q̂(α)| > γ`, `|α| ≤ d`, in scan order.
    #[serde(skip)]
    pub heavy: Vec<(Mask, Rational)>,
    /// The independent subset, in scan order.
    #[serde(skip)]
    pub independent: Vec<Mask>,
    #[serde(skip)]
    pub violations: Vec<(Mask, Rational)>,
    pub success: bool,
}

impl JuntaCertificate {
    pub fn junta_mask(&self) -> Mask {
        poly::mask_of(&self.junta)
    }
}

pub fn chang_junta(q: &Density, t: &Rational, d: usize, gamma: &Rational) -> Result<JuntaCertificate> {
    if !gamma.is_positive() {
        return Err(Error::Parameter(format!("gamma must be positive, got {}", rational::format(gamma))));
    }
    chang_junta_with(q, t, d, Threshold::exact(gamma.clone()))
}

pub fn chang_junta_with(q: &Density, t: &Rational, d: usize, gamma: Threshold) -> Result<JuntaCertificate> {
    if !gamma.gamma_pow4.is_positive() {
        return Err(Error::Parameter("gamma must be positive".into()));
    }
    if d == 0 || d > q.n() {
        return Err(Error::Parameter(format!("degree {d} outside [1, {}]", q.n())));
    }
    if t.is_negative() {
        return Err(Error::Parameter(format!("entropy deficit {} is negative", rational::format(t))));
    }

    let mut heavy: Vec<(Mask, Rational)> = q
        .poly()
        .terms()
        .filter(|(m, c)| *m != 0 && poly::popcount(*m) <= d && gamma.exceeded_by(c))
        .map(|(m, c)| (m, c.clone()))
        .collect();
    heavy.sort_by(|(ma, ca), (mb, cb)| match cb.abs().cmp(&ca.abs()) {
        Ordering::Equal => poly::lex_cmp(*ma, *mb),
        o => o,
    });

    // xor basis with distinct leading bits
    let mut basis: Vec<Mask> = Vec::new();
    let mut independent = Vec::new();
    for (m, _) in &heavy {
        let mut r = *m;
        for b in &basis {
            r = r.min(r ^ b);
        }
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
            independent.push(*m);
        }
    }

    let junta_mask = independent.iter().fold(0, |a, m| a | m);
    let junta = poly::vars_of(junta_mask);
    let success = gamma.count_within(independent.len(), 2, t) && gamma.count_within(junta.len(), 2 * d, t);
    let violations = if success {
        Vec::new()
    } else {
        heavy.iter().filter(|(m, _)| independent.contains(m)).cloned().collect()
    };
    Ok(JuntaCertificate { junta, degree: d, gamma, t: t.clone(), heavy, independent, violations, success })
}

/// Scan every coefficient of degree at most `d` outside the junta and
/// return those above the threshold.
pub fn verify_junta(q: &Density, cert: &JuntaCertificate) -> Vec<(Mask, Rational)> {
    let j = cert.junta_mask();
    q.poly()
        .terms()
        .filter(|(m, c)| poly::popcount(*m) <= cert.degree && m & !j != 0 && cert.gamma.exceeded_by(c))
        .map(|(m, c)| (m, c.clone()))
        .collect()
}

pub fn is_junta(f: &BoolFn, coords: &[usize]) -> bool {
    let keep = poly::mask_of(coords);
    (0..f.n()).filter(|i| keep >> i & 1 == 0).all(|i| depends_not(f, i))
}

/// Minimal coordinate set the function depends on (0-based, sorted).
pub fn junta_support(f: &BoolFn) -> Vec<usize> {
    (0..f.n()).filter(|&i| !depends_not(f, i)).collect()
}

fn depends_not(f: &BoolFn, i: usize) -> bool {
    let bit = 1u64 << i;
    (0..1u64 << f.n()).filter(|x| x & bit == 0).all(|x| f.value(x) == f.value(x | bit))
}
