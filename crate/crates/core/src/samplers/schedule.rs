use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size rule: `step(k)` is the step used to move from iterate `k` to
/// iterate `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant {
        h: f64,
    },
    /// `h_{k+1} = 2 / (M + m + (2/3)·m·(k − K₁)₊)`
    Varying {
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
        k1: u64,
    },
}

impl StepSchedule {
    pub fn constant(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
        }
        Ok(Self::Constant { h })
    }

    pub fn varying(m: f64, big_m: f64, k1: u64) -> Result<Self> {
        if !(m > 0.0 && big_m >= m && big_m.is_finite()) {
            return Err(Error::InvalidConstants(format!("need 0 < m ≤ M, got m={m}, M={big_m}")));
        }
        Ok(Self::Varying { m, big_m, k1 })
    }

    /// The varying schedule with `K₁` from [`compute_k1`].
    pub fn theorem2(m: f64, big_m: f64, p: usize, w2_0: f64) -> Result<Self> {
        Self::varying(m, big_m, compute_k1(m, big_m, p, w2_0)?)
    }

    pub fn step(&self, k: u64) -> f64 {
        match *self {
            Self::Constant { h } => h,
            Self::Varying { m, big_m, k1 } => {
                let excess = k.saturating_sub(k1) as f64;
                2.0 / (big_m + m + 2.0 / 3.0 * m * excess)
            }
        }
    }
}

/// Warm-up length `K₁` of the varying schedule: the smallest non-negative
/// integer with
///
/// `K₁ ≥ (ln(W2₀/√p) + ln(m/M) + ½ln(M+m)) / ln(1 + 2m/(M−m))`.
///
/// Returns 0 when `M = m` or when the numerator is not positive. A relative
/// slack of `1e−12` absorbs round-off when the ratio sits on an integer.
pub fn compute_k1(m: f64, big_m: f64, p: usize, w2_0: f64) -> Result<u64> {
    if !(m.is_finite() && m > 0.0 && big_m.is_finite() && big_m >= m) {
        return Err(Error::InvalidConstants(format!("need 0 < m ≤ M, got m={m}, M={big_m}")));
    }
    if p == 0 {
        return Err(Error::InvalidConstants("dimension must be at least 1".into()));
    }
    if !(w2_0 >= 0.0) || w2_0.is_infinite() {
        return Err(Error::InvalidParameter(format!("W2_0 must be finite and non-negative, got {w2_0}")));
    }
    if big_m == m || w2_0 == 0.0 {
        return Ok(0);
    }
    let terms = [
        (w2_0 / (p as f64).sqrt()).ln(),
        (m / big_m).ln(),
        0.5 * (big_m + m).ln(),
    ];
    let numerator: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if numerator <= 1e-12 * scale {
        return Ok(0);
    }
    let denominator = (2.0 * m / (big_m - m)).ln_1p();
    let ratio = numerator / denominator;
    Ok((ratio - 1e-12 * ratio.max(1.0)).ceil().max(0.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_equal_constants() {
        assert_eq!(compute_k1(5.0, 5.0, 10, 1e6).unwrap(), 0);
    }

    #[test]
    fn k1_vanishing_numerator() {
        let (m, big_m, p) = (10.0, 20.0, 100usize);
        let w = (p as f64).sqrt() * (big_m / m) / (big_m + m).sqrt();
        assert_eq!(compute_k1(m, big_m, p, w).unwrap(), 0);
    }

    #[test]
    fn k1_worked_value() {
        // Numerator ln 11 − ln 2 + ½ ln 30, denominator ln 3.
        let num = 11f64.ln() - 2f64.ln() + 0.5 * 30f64.ln();
        let ratio = num / 3f64.ln();
        assert!((ratio - 3.0997).abs() < 1e-3);
        assert_eq!(compute_k1(10.0, 20.0, 100, 110.0).unwrap(), 4);
    }

    #[test]
    fn k1_rejects_bad_constants() {
        assert!(compute_k1(0.0, 1.0, 1, 1.0).is_err());
        assert!(compute_k1(2.0, 1.0, 1, 1.0).is_err());
        assert!(compute_k1(1.0, 2.0, 0, 1.0).is_err());
        assert!(compute_k1(1.0, 2.0, 1, -1.0).is_err());
    }

    #[test]
    fn varying_schedule_shape() {
        let s = StepSchedule::varying(10.0, 20.0, 4).unwrap();
        for k in 0..=4 {
            assert_eq!(s.step(k), 2.0 / 30.0);
        }
        let mut prev = s.step(0);
        for k in 1..10_000 {
            let h = s.step(k);
            assert!(h <= prev && h > 0.0);
            prev = h;
        }
        assert!((s.step(7) - 2.0 / (30.0 + 20.0)).abs() < 1e-15);
    }

    #[test]
    fn huge_k1_is_constant() {
        let s = StepSchedule::varying(1.0, 3.0, u64::MAX).unwrap();
        assert_eq!(s.step(123_456), 0.5);
    }
}
