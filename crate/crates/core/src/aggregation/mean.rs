use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exponent of a generalized (power) mean. Any non-zero finite value or
/// ±infinity; NaN and 0 are rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const MIN: Exponent = Exponent(f64::NEG_INFINITY);
    pub const MAX: Exponent = Exponent(f64::INFINITY);
    pub const HARMONIC: Exponent = Exponent(-1.0);
    pub const ARITHMETIC: Exponent = Exponent(1.0);
    pub const QUADRATIC: Exponent = Exponent(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() {
            return Err(Error::invalid("exponent is NaN"));
        }
        if p == 0.0 {
            return Err(Error::ZeroExponent);
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let p = match t {
            "inf" | "+inf" | "max" => f64::INFINITY,
            "-inf" | "min" => f64::NEG_INFINITY,
            _ => t
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad exponent {s:?}")))?,
        };
        Exponent::new(p)
    }
}

pub(crate) const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_weights(weights: &[f64], expected_len: usize) -> Result<()> {
    if weights.len() != expected_len {
        return Err(Error::invalid(format!(
            "expected {expected_len} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("weights must be finite and non-negative"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::invalid(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Weighted generalized mean `(Σ wᵢ vᵢᵖ)^(1/p)` with `Σ wᵢ = 1`.
///
/// Without weights every value counts `1/n`. `p = +inf` is the maximum and
/// `p = -inf` the minimum over entries with positive weight. For `p < 0` a
/// zero value makes the mean 0, its continuous limit.
pub fn generalized_mean(values: &[f64], p: Exponent, weights: Option<&[f64]>) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("generalized mean of an empty list"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::invalid(format!(
            "generalized mean needs non-negative finite values, got {v}"
        )));
    }
    if let Some(w) = weights {
        check_weights(w, values.len())?;
    }
    weighted_power_mean(values, weights, p.0)
}

/// Core evaluation. Weights only need to be non-negative with a positive
/// sum; they are normalised here.
pub(crate) fn weighted_power_mean(values: &[f64], weights: Option<&[f64]>, p: f64) -> Result<f64> {
    let terms: Vec<(f64, f64)> = match weights {
        Some(w) => values
            .iter()
            .zip(w)
            .filter(|(_, w)| **w > 0.0)
            .map(|(v, w)| (*v, *w))
            .collect(),
        None => values.iter().map(|v| (*v, 1.0)).collect(),
    };
    if terms.is_empty() {
        return Err(Error::invalid("all weights are zero"));
    }
    let lo = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
    let hi = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if p == f64::INFINITY {
        return Ok(hi);
    }
    if p == f64::NEG_INFINITY || lo == hi {
        return Ok(lo);
    }
    if p < 0.0 && lo == 0.0 {
        return Ok(0.0);
    }
    // Scale by the extreme that keeps every ratio^p within (0, 1].
    let scale = if p > 0.0 { hi } else { lo };
    let weight_sum: f64 = terms.iter().map(|t| t.1).sum();
    let acc: f64 = terms.iter().map(|(v, w)| w * (v / scale).powf(p)).sum();
    let m = scale * (acc / weight_sum).powf(1.0 / p);
    Ok(m.clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gm(v: &[f64], p: f64) -> f64 {
        generalized_mean(v, Exponent::new(p).unwrap(), None).unwrap()
    }

    #[test]
    fn named_special_cases() {
        assert!((gm(&[0.2, 0.4], 1.0) - 0.3).abs() < 1e-15);
        assert_eq!(gm(&[0.1, 0.9], f64::INFINITY), 0.9);
        assert_eq!(gm(&[0.1, 0.9], f64::NEG_INFINITY), 0.1);
        assert!((gm(&[0.3, 0.4], 2.0) - 0.125f64.sqrt()).abs() < 1e-15);
        assert!((gm(&[0.3, 0.4], 2.0) - 0.3535534).abs() < 1e-7);
        assert!((gm(&[0.5, 0.25], -1.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_with_negative_exponent_is_zero() {
        assert_eq!(gm(&[0.0, 0.5], -1.0), 0.0);
        assert_eq!(gm(&[0.0, 0.5], -5.0), 0.0);
        assert!((gm(&[0.0, 0.5], 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Exponent::ARITHMETIC;
        assert!(generalized_mean(&[], p, None).is_err());
        assert!(generalized_mean(&[-0.1, 0.2], p, None).is_err());
        assert!(generalized_mean(&[0.1, 0.2], p, Some(&[0.5])).is_err());
        assert!(generalized_mean(&[0.1, 0.2], p, Some(&[0.7, 0.7])).is_err());
        assert!(generalized_mean(&[0.1, 0.2], p, Some(&[1.5, -0.5])).is_err());
        assert!(matches!(Exponent::new(0.0), Err(Error::ZeroExponent)));
        assert!(Exponent::new(f64::NAN).is_err());
    }

    #[test]
    fn weighted_extrema_ignore_zero_weight() {
        let v = [0.1, 0.5, 0.9];
        let w = [0.0, 0.5, 0.5];
        assert_eq!(generalized_mean(&v, Exponent::MAX, Some(&w)).unwrap(), 0.9);
        assert_eq!(generalized_mean(&v, Exponent::MIN, Some(&w)).unwrap(), 0.5);
        let m = generalized_mean(&v, Exponent::ARITHMETIC, Some(&w)).unwrap();
        assert!((m - 0.7).abs() < 1e-15);
    }

    #[test]
    fn extreme_exponents_do_not_overflow() {
        let v = [1e-8, 0.5, 1.0];
        let hi = gm(&v, 400.0);
        let lo = gm(&v, -400.0);
        assert!(hi > 0.99 && hi <= 1.0);
        assert!((1e-8..1.1e-8).contains(&lo));
    }

    #[test]
    fn parses_exponents() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::MAX);
        assert_eq!("-inf".parse::<Exponent>().unwrap(), Exponent::MIN);
        assert_eq!("-5".parse::<Exponent>().unwrap().value(), -5.0);
        assert!("0".parse::<Exponent>().is_err());
        assert_eq!(Exponent::MIN.to_string(), "-inf");
    }
}
