//! Exact rational numbers and their canonical text form.
//!
//! Every value in the crate is a [`Rational`], an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. The text form
//! is `"p/q"`, or just `"p"` when the denominator is one; the sign always sits
//! on the numerator.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^k` as a rational, `k` may be negative.
pub fn pow2(k: i64) -> Rational {
    let p = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Canonical `"p/q"` rendering.
pub fn format(q: &Rational) -> String {
    let mut s = String::new();
    if q.denom().is_one() {
        let _ = write!(s, "{}", q.numer());
    } else {
        let _ = write!(s, "{}/{}", q.numer(), q.denom());
    }
    s
}

/// Parse `"p/q"`, `"p"` or a plain decimal like `"0.25"`.
pub fn parse(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::MalformedInput(format!("not a rational number: {text:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::MalformedInput(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(bad());
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| bad())?
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(w * &scale + f, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Huge operands: divide after shifting both into range.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Decimal rendering with twelve fractional digits, used for the few
/// floating-point quantities that appear in reports.
pub fn decimal12(x: f64) -> String {
    format!("{x:.12}")
}

/// Binomial coefficient as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Smallest integer `r` with `r^k >= x` for a nonnegative rational `x`.
pub fn ceil_root(x: &Rational, k: u32) -> BigInt {
    assert!(!x.is_negative(), "root of a negative number");
    let target = x.ceil().to_integer();
    // r^k >= x  <=>  r^k >= ceil(x) for integer r.
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one();
    while num_traits::pow(hi.clone(), k as usize) < target {
        hi <<= 1;
    }
    while lo < hi {
        let mid: BigInt = (&lo + &hi) >> 1;
        if num_traits::pow(mid.clone(), k as usize) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    hi
}

/// Rational upper bound with denominator `denom` for `x^(1/k)`:
/// returns the smallest `p/denom` with `(p/denom)^k >= x`.
pub fn root_upper_bound(x: &Rational, k: u32, denom: u64) -> Rational {
    let scaled = x * Rational::from_integer(num_traits::pow(BigInt::from(denom), k as usize));
    let p = ceil_root(&scaled, k);
    Rational::new(p, BigInt::from(denom))
}

/// Largest `p/denom` with `(p/denom)^k <= x`.
pub fn root_lower_bound(x: &Rational, k: u32, denom: u64) -> Rational {
    let scaled = x * Rational::from_integer(num_traits::pow(BigInt::from(denom), k as usize));
    let mut p = ceil_root(&scaled, k);
    if Rational::from_integer(num_traits::pow(p.clone(), k as usize)) > scaled {
        p -= 1;
    }
    Rational::new(p, BigInt::from(denom))
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Serde adapters: rationals travel as canonical strings.
pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

pub mod serde_vec {
    use super::Rational;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&super::format(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|t| super::parse(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_opt {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&super::format(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let v = Option::<String>::deserialize(d)?;
        v.map(|t| super::parse(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text() {
        assert_eq!(format(&rat(4, 6)), "2/3");
        assert_eq!(format(&rat(-4, 6)), "-2/3");
        assert_eq!(format(&rat(3, -6)), "-1/2");
        assert_eq!(format(&int(0)), "0");
        assert_eq!(format(&int(-7)), "-7");
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse("2/3").unwrap(), rat(2, 3));
        assert_eq!(parse(" -10/4 ").unwrap(), rat(-5, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert_eq!(parse("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse("-1.5").unwrap(), rat(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 4), BigInt::from(0));
        assert_eq!(binomial(12, 0), BigInt::from(1));
    }

    #[test]
    fn roots() {
        assert_eq!(ceil_root(&int(16), 2), BigInt::from(4));
        assert_eq!(ceil_root(&int(17), 2), BigInt::from(5));
        assert_eq!(ceil_root(&rat(1, 2), 4), BigInt::from(1));
        let up = root_upper_bound(&int(2), 2, 1000);
        assert_eq!(up, rat(1415, 1000));
        assert!(&up * &up >= int(2));
        assert_eq!(root_lower_bound(&int(2), 2, 1000), rat(1414, 1000));
        assert_eq!(root_lower_bound(&int(144), 2, 1000), int(12));
        assert_eq!(root_upper_bound(&int(144), 2, 1000), int(12));
    }

    #[test]
    fn powers_of_two() {
        assert_eq!(pow2(3), int(8));
        assert_eq!(pow2(-2), rat(1, 4));
    }
}
