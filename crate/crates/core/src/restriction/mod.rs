//! Random restrictions of density families, the planted main inequality and
//! the symmetric-relaxation pipeline.
//!
//! Sampling uses ChaCha8 seeded with `seed_from_u64(seed)` and stream
//! `trial`; coordinate `i` is kept iff `r·n < 2m·2^64` for the next `u64`
//! draw `r`, rounds repeat until at least `m` coordinates are kept, and the
//! largest-index extras are then dropped.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolfn::{chang_junta_with, Density, Threshold};
use crate::error::{Error, Result};
use crate::poly::{self, MultilinearPoly};
use crate::rational::{self, Rational};

mod main_ineq;
mod symmetric;

pub use main_ineq::{epsilon_n, main_inequality_experiment, ChainTerms, MainInequalityReport, SlackTerm};
pub use symmetric::{
    antidiagonal_poly, antidiagonal_restriction, check_closure, detect_symmetric_structure,
    symmetric_contradiction_check, ClosureCheck, LevelEntry, RestrictedSlack, SymmetricCheckReport,
    SymmetricStructure,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityRecord {
    pub density_id: usize,
    /// `J(q) = J′(q) ∩ S`.
    #[serde(with = "poly::one_based")]
    pub junta: Vec<usize>,
    /// `J′(q)` before intersecting with `S`.
    #[serde(with = "poly::one_based")]
    pub junta_full: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub max_bad_coeff: Rational,
    pub passed_junta_bound: bool,
    pub passed_coeff_bound: bool,
    pub chang_success: bool,
    #[serde(with = "rational::serde_str")]
    pub sup_norm: Rational,
    pub hypothesis: Option<String>,
}

impl DensityRecord {
    pub fn passed(&self) -> bool {
        self.passed_junta_bound && self.passed_coeff_bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RestrictionParameters {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub t: u32,
    /// `γ⁴ = (16mtd)²/n`, exact.
    #[serde(with = "rational::serde_str")]
    pub gamma_pow4: Rational,
    /// `γ² = 16mtd/√n`, rounded up.
    #[serde(with = "rational::serde_str")]
    pub gamma_sq_upper: Rational,
    pub gamma: String,
}

impl RestrictionParameters {
    pub fn new(n: usize, m: usize, d: usize, t: u32) -> Self {
        let base = Rational::from_integer(BigInt::from(16 * m * d) * BigInt::from(t));
        let gamma_pow4 = &base * &base / Rational::from_integer(n.into());
        let gamma_sq_upper = rational::root_upper_bound(&gamma_pow4, 2, 1_000_000);
        let gamma = rational::decimal12(rational::to_f64(&gamma_pow4).powf(0.25));
        RestrictionParameters { n, m, d, t, gamma_pow4, gamma_sq_upper, gamma }
    }

    pub fn threshold(&self) -> Threshold {
        Threshold::from_pow4(self.gamma_pow4.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RestrictionReport {
    #[serde(rename = "S", with = "poly::one_based")]
    pub s: Vec<usize>,
    pub densities: Vec<DensityRecord>,
    pub parameters: RestrictionParameters,
    pub trials_used: usize,
    pub seed: Option<u64>,
    /// `|Q| ≤ n^{d/2}`.
    pub family_size_ok: bool,
    pub passed: bool,
}

impl RestrictionReport {
    pub fn passing_count(&self) -> usize {
        self.densities.iter().filter(|r| r.passed()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Smallest integer `t` with `2^t ≥ n^d`, i.e. `⌈d log₂ n⌉`.
pub fn ceil_log_t(n: usize, d: usize) -> u32 {
    let target = num_traits::pow(BigInt::from(n), d);
    let mut t = 0u32;
    while BigInt::one() << t < target {
        t += 1;
    }
    t
}

fn check_params(n: usize, m: usize) -> Result<()> {
    if m < 3 || 4 * m > n {
        return Err(Error::Parameter(format!("restriction needs 3 <= m <= n/4, got m = {m}, n = {n}")));
    }
    if n > 63 {
        return Err(Error::Parameter(format!("n = {n} exceeds the 63-coordinate mask width")));
    }
    Ok(())
}

pub fn sample_restriction(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    sample_restriction_trial(n, m, seed, 0)
}

/// Sample for one trial; independent trials use independent streams.
pub fn sample_restriction_trial(n: usize, m: usize, seed: u64, trial: u64) -> Result<Vec<usize>> {
    check_params(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let bound = (2 * m as u128) << 64;
    loop {
        let s: Vec<usize> = (0..n).filter(|_| (rng.next_u64() as u128) * (n as u128) < bound).collect();
        if s.len() >= m {
            return Ok(s[..m].to_vec());
        }
    }
}

fn family_size_ok(count: usize, n: usize, d: usize) -> bool {
    // |Q| ≤ n^{d/2}  <=>  |Q|² ≤ n^d
    BigInt::from(count) * BigInt::from(count) <= num_traits::pow(BigInt::from(n), d)
}

pub fn check_restriction(q: &[Density], s: &[usize], d: usize, t: u32, m: usize, n: usize) -> Result<RestrictionReport> {
    check_params(n, m)?;
    if s.len() != m || s.iter().any(|&i| i >= n) || poly::popcount(poly::mask_of(s)) != m {
        return Err(Error::MalformedInput(format!("restriction set must hold {m} distinct coordinates below {n}")));
    }
    if d == 0 || d > n {
        return Err(Error::Parameter(format!("degree {d} outside [1, {n}]")));
    }
    if let Some(bad) = q.iter().position(|x| x.n() != n) {
        return Err(Error::MalformedInput(format!("density {} lives on {} variables, expected {n}", bad + 1, q[bad].n())));
    }
    let params = RestrictionParameters::new(n, m, d, t);
    let cap = rational::pow2(t as i64);
    let smask = poly::mask_of(s);
    let t_rat = Rational::from_integer(t.into());
    let mut densities = Vec::with_capacity(q.len());
    for (id, density) in q.iter().enumerate() {
        let sup = density.sup_norm();
        let hypothesis = (sup > cap).then(|| {
            format!("sup norm {} exceeds 2^t = {}", rational::format(&sup), rational::format(&cap))
        });
        let cert = chang_junta_with(density, &t_rat, d, params.threshold())?;
        let jmask = cert.junta_mask() & smask;
        let max_bad = density
            .poly()
            .terms()
            .filter(|(a, _)| a & !smask == 0 && a & !jmask != 0 && poly::popcount(*a) <= d)
            .map(|(_, c)| c.abs())
            .fold(Rational::zero(), |a, b| if b > a { b } else { a });
        let sq = &max_bad * &max_bad;
        densities.push(DensityRecord {
            density_id: id,
            junta: poly::vars_of(jmask),
            junta_full: cert.junta.clone(),
            passed_junta_bound: poly::popcount(jmask) <= d,
            passed_coeff_bound: &sq * &sq <= params.gamma_pow4,
            max_bad_coeff: max_bad,
            chang_success: cert.success,
            sup_norm: sup,
            hypothesis,
        });
    }
    let passed = densities.iter().all(DensityRecord::passed);
    Ok(RestrictionReport {
        s: s.to_vec(),
        densities,
        parameters: params,
        trials_used: 1,
        seed: None,
        family_size_ok: family_size_ok(q.len(), n, d),
        passed,
    })
}

/// First sampled `S` passing every density; trial `k` draws from stream `k`.
pub fn find_good_restriction(
    q: &[Density],
    n: usize,
    m: usize,
    d: usize,
    t: u32,
    max_trials: usize,
    seed: u64,
) -> Result<(Vec<usize>, RestrictionReport)> {
    if max_trials == 0 {
        return Err(Error::Parameter("maxTrials must be positive".into()));
    }
    let mut best: Option<RestrictionReport> = None;
    for trial in 0..max_trials {
        let s = sample_restriction_trial(n, m, seed, trial as u64)?;
        let mut report = check_restriction(q, &s, d, t, m, n)?;
        report.trials_used = trial + 1;
        report.seed = Some(seed);
        if report.passed {
            return Ok((s, report));
        }
        if best.as_ref().map_or(true, |b| report.passing_count() > b.passing_count()) {
            best = Some(report);
        }
    }
    let mut best = best.expect("at least one trial");
    best.trials_used = max_trials;
    Err(Error::Exhausted { trials: max_trials, best: Box::new(best) })
}

/// Junta part `q̃^S` and error part `e` of a density restricted to `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedParts {
    pub junta: Density,
    pub error: MultilinearPoly,
}

pub fn decompose_restricted_density(q: &Density, s: &[usize], j: &[usize]) -> Result<RestrictedParts> {
    let smask = poly::mask_of(s);
    let jmask = poly::mask_of(j);
    if jmask & !smask != 0 {
        return Err(Error::MalformedInput("junta coordinates must lie inside S".into()));
    }
    let junta = Density::from_poly(q.poly().restrict_terms(jmask))?;
    let error = MultilinearPoly::from_terms(
        q.n(),
        q.poly()
            .terms()
            .filter(|(a, _)| a & !smask == 0 && a & !jmask != 0)
            .map(|(a, c)| (a, c.clone())),
    );
    Ok(RestrictedParts { junta, error })
}
