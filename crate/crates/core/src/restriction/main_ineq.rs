use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{ceil_log_t, check_params, decompose_restricted_density, find_good_restriction, RestrictionReport};
use crate::boolfn::Density;
use crate::csp::{self, Instance};
use crate::error::{Error, Result};
use crate::poly;
use crate::rational::{self, Rational};
use crate::sa::{pe_apply, pe_plant, sa_value};
use crate::slack::{farkas_decompose, lp_value, slack_functions, FarkasResult, PolyhedralRelaxation};

const TRIALS: usize = 1000;

/// The error bound `C(m,d)·sqrt(16mtd/√n) + C(m,d)·n^{d/2}·2^{−t}` at
/// real `t = d log₂ n`.
pub fn epsilon_n(n: usize, m: usize, d: usize) -> f64 {
    let (nf, mf, df) = (n as f64, m as f64, d as f64);
    let binom = rational::to_f64(&Rational::from_integer(rational::binomial(m as u64, d as u64)));
    let t = df * nf.log2();
    binom * (16.0 * mf * t * df / nf.sqrt()).sqrt() + binom * nf.powf(df / 2.0) * 2f64.powf(-t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SlackTerm {
    /// 1-based row number in the relaxation.
    pub slack: usize,
    #[serde(with = "rational::serde_str")]
    pub scale: Rational,
    #[serde(with = "rational::serde_str")]
    pub lambda: Rational,
    #[serde(with = "rational::serde_str")]
    pub sup_norm: Rational,
    pub in_qt: bool,
    #[serde(with = "poly::one_based")]
    pub junta: Vec<usize>,
    /// `p̃E_S(q̃)` for slacks in `Q_t`, `p̃E_S(q)` otherwise.
    #[serde(with = "rational::serde_str")]
    pub junta_term: Rational,
    #[serde(with = "rational::serde_str")]
    pub error_term: Rational,
    #[serde(with = "rational::serde_str")]
    pub max_bad_coeff: Rational,
    /// `C(m,d)·γ`, with `γ` rounded up.
    #[serde(with = "rational::serde_str")]
    pub cap_gamma: Rational,
    /// `C(m,d)·max|ê(α)|`.
    #[serde(with = "rational::serde_str")]
    pub cap_measured: Rational,
    /// `Σ_{1≤j≤d} C(m,j)·max|ê(α)|`.
    #[serde(with = "rational::serde_str")]
    pub cap_sound: Rational,
    pub within_stated_cap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainTerms {
    #[serde(with = "rational::serde_str")]
    pub lambda0: Rational,
    #[serde(with = "rational::serde_str")]
    pub junta_terms: Rational,
    #[serde(with = "rational::serde_str")]
    pub error_terms: Rational,
    #[serde(with = "rational::serde_str")]
    pub outside_terms: Rational,
    #[serde(with = "rational::serde_str")]
    pub total: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MainInequalityReport {
    pub relaxation: String,
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub t: u32,
    pub seed: u64,
    pub slack_count: usize,
    /// `R ≤ n^{d/2}`.
    pub slack_count_ok: bool,
    pub dropped_zero_slacks: Vec<usize>,
    pub qt_size: usize,
    pub restriction: RestrictionReport,
    #[serde(with = "rational::serde_str")]
    pub lp_value: Rational,
    #[serde(with = "rational::serde_str")]
    pub sa_value: Rational,
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    /// `−C(m,d)·γ − C(m,d)·n^{d/2}·2^{−t}` with both roots rounded down.
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    /// `−Σ_{Q_t} λ_i·cap_sound_i − Σ_{j≤d} C(m,j)·Σ_{outside} λ_i`.
    #[serde(with = "rational::serde_str")]
    pub rhs_sound: Rational,
    pub holds: bool,
    pub holds_sound: bool,
    #[serde(with = "rational::serde_str")]
    pub gamma_lower: Rational,
    #[serde(with = "rational::serde_str")]
    pub gamma_upper: Rational,
    pub chain: ChainTerms,
    pub per_slack_error_terms: Vec<SlackTerm>,
    pub outside_qt: Vec<SlackTerm>,
    pub epsilon_n: String,
}

impl MainInequalityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn int(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

fn internal(what: String) -> Error {
    Error::Internal(what)
}

pub fn main_inequality_experiment(
    rel: &PolyhedralRelaxation,
    inst0: &Instance,
    d: usize,
    seed: u64,
) -> Result<MainInequalityReport> {
    let n = rel.n();
    let m = inst0.n();
    check_params(n, m)?;
    if d == 0 || d > m {
        return Err(Error::Parameter(format!("degree {d} outside [1, m = {m}]")));
    }
    let t = ceil_log_t(n, d);
    let sa = sa_value(inst0, d)?;

    let slacks = slack_functions(rel)?;
    let slack_count = slacks.len();
    let slack_count_ok = super::family_size_ok(slack_count, n, d);
    if !slack_count_ok {
        log::warn!("relaxation has {slack_count} slacks, more than n^(d/2)");
    }
    let cap = rational::pow2(t as i64);
    let mut dropped = Vec::new();
    // (row, scale, density)
    let mut normalized: Vec<(usize, Rational, Density)> = Vec::new();
    for (i, q) in slacks.polys.iter().enumerate() {
        if q.is_zero() {
            log::info!("dropping identically zero slack {}", i + 1);
            dropped.push(i + 1);
            continue;
        }
        let mean = q.coeff(0);
        if !mean.is_positive() {
            return Err(Error::MalformedInput(format!("slack {} is nonzero with mean {}", i + 1, rational::format(&mean))));
        }
        let density = Density::from_poly(q.scaled(&mean.recip()))
            .map_err(|e| Error::MalformedInput(format!("slack {}: {e}", i + 1)))?;
        normalized.push((i, mean, density));
    }
    let (inside, outside): (Vec<_>, Vec<_>) = normalized.into_iter().partition(|(_, _, q)| q.sup_norm() <= cap);
    let qt: Vec<Density> = inside.iter().map(|(_, _, q)| q.clone()).collect();

    let (s, mut restriction) = if qt.is_empty() {
        let s = super::sample_restriction(n, m, seed)?;
        let mut r = super::check_restriction(&qt, &s, d, t, m, n)?;
        r.seed = Some(seed);
        (s, r)
    } else {
        find_good_restriction(&qt, n, m, d, t, TRIALS, seed)?
    };
    for (rec, (row, _, _)) in restriction.densities.iter_mut().zip(&inside) {
        rec.density_id = row + 1;
    }

    let inst_s = csp::plant(inst0, &s, n)?;
    let pe_s = pe_plant(&sa.pe, &s, n)?;
    if pe_apply(&pe_s, &csp::instance_polynomial(&inst_s)) != sa.value {
        return Err(internal("planted functional changed the SA value".into()));
    }
    let lp = lp_value(rel, &inst_s)?.value;
    let (lambda0, lambda) = match farkas_decompose(&lp, &inst_s, rel)? {
        FarkasResult::Decomposition { lambda0, lambda } => (lambda0, lambda),
        FarkasResult::Infeasible { .. } => {
            return Err(internal("no decomposition of L − ℑ_S at the LP value".into()));
        }
    };

    let binom = int(rational::binomial(m as u64, d as u64));
    let n_err: Rational = (1..=d).map(|j| int(rational::binomial(m as u64, j as u64))).sum();
    let n_sup = &n_err + Rational::from_integer(1.into());
    let params = &restriction.parameters;
    let gamma_lower = rational::root_lower_bound(&params.gamma_pow4, 4, 1_000_000);
    let gamma_upper = rational::root_upper_bound(&params.gamma_pow4, 4, 1_000_000);
    let cap_gamma = &binom * &gamma_upper;

    let mut junta_terms = Rational::zero();
    let mut error_terms = Rational::zero();
    let mut rhs_sound = Rational::zero();
    let mut per_slack = Vec::with_capacity(inside.len());
    for ((row, scale, q), rec) in inside.iter().zip(&restriction.densities) {
        let lam = &lambda[*row] * scale;
        let parts = decompose_restricted_density(q, &s, &rec.junta)?;
        let jt = pe_apply(&pe_s, parts.junta.poly());
        let et = pe_apply(&pe_s, &parts.error);
        if jt.is_negative() {
            return Err(internal(format!("negative functional value on the junta part of slack {}", row + 1)));
        }
        if &jt + &et != pe_apply(&pe_s, q.poly()) {
            return Err(internal(format!("linearity failed on slack {}", row + 1)));
        }
        let cap_measured = &binom * &rec.max_bad_coeff;
        let cap_sound = &n_err * &rec.max_bad_coeff;
        let abs = et.abs();
        if abs > cap_sound {
            return Err(internal(format!("error term of slack {} exceeds its moment bound", row + 1)));
        }
        junta_terms += &lam * &jt;
        error_terms += &lam * &et;
        rhs_sound -= &lam * &cap_sound;
        per_slack.push(SlackTerm {
            slack: row + 1,
            scale: scale.clone(),
            lambda: lam,
            sup_norm: rec.sup_norm.clone(),
            in_qt: true,
            junta: rec.junta.clone(),
            junta_term: jt,
            error_term: et,
            max_bad_coeff: rec.max_bad_coeff.clone(),
            cap_gamma: cap_gamma.clone(),
            within_stated_cap: abs <= cap_measured,
            cap_measured,
            cap_sound,
        });
    }

    let mut outside_terms = Rational::zero();
    let mut outside_qt = Vec::with_capacity(outside.len());
    for (row, scale, q) in &outside {
        let lam = &lambda[*row] * scale;
        let v = pe_apply(&pe_s, q.poly());
        if v.abs() > n_sup {
            return Err(internal(format!("functional value on slack {} exceeds its sup-norm bound", row + 1)));
        }
        outside_terms += &lam * &v;
        rhs_sound -= &lam * &n_sup;
        outside_qt.push(SlackTerm {
            slack: row + 1,
            scale: scale.clone(),
            lambda: lam,
            sup_norm: q.sup_norm(),
            in_qt: false,
            junta: Vec::new(),
            junta_term: v,
            error_term: Rational::zero(),
            max_bad_coeff: Rational::zero(),
            cap_gamma: Rational::zero(),
            cap_measured: Rational::zero(),
            cap_sound: n_sup.clone(),
            within_stated_cap: true,
        });
    }

    let lhs = &lp - &sa.value;
    let total = &lambda0 + &junta_terms + &error_terms + &outside_terms;
    if total != lhs {
        return Err(internal(format!(
            "chain total {} differs from L − SA = {}",
            rational::format(&total),
            rational::format(&lhs)
        )));
    }
    let n_half_lower = rational::root_lower_bound(&int(num_traits::pow(BigInt::from(n), d)), 2, 1_000_000);
    let rhs = -(&binom * &gamma_lower) - &binom * &n_half_lower / rational::pow2(t as i64);
    let holds_sound = lhs >= rhs_sound;
    if !holds_sound {
        return Err(internal("main inequality chain violated".into()));
    }
    restriction.seed = Some(seed);
    Ok(MainInequalityReport {
        relaxation: rel.name().to_string(),
        instance: format!("{} constraints on {} variables", inst0.m(), m),
        n,
        m,
        d,
        t,
        seed,
        slack_count,
        slack_count_ok,
        dropped_zero_slacks: dropped,
        qt_size: inside.len(),
        restriction,
        lp_value: lp,
        sa_value: sa.value,
        holds: lhs >= rhs,
        holds_sound,
        lhs,
        rhs,
        rhs_sound,
        gamma_lower,
        gamma_upper,
        chain: ChainTerms { lambda0, junta_terms, error_terms, outside_terms, total },
        per_slack_error_terms: per_slack,
        outside_qt,
        epsilon_n: rational::decimal12(epsilon_n(n, m, d)),
    })
}
