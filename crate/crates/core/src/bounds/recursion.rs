//! Scalar recursions `x_{k+1} = g(x_k)` and closed-form sequences that
//! dominate them.

use crate::error::{Error, Result};

/// `7√2/6`, the discretization constant of the one-step recursion.
pub const ONE_STEP_ALPHA: f64 = 7.0 * std::f64::consts::SQRT_2 / 6.0;

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("A must lie in (0, 1), got {a}")))
    }
}

fn check_nonneg(values: &[(&str, f64)]) -> Result<()> {
    for (name, x) in values {
        if !(x.is_finite() && *x >= 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be finite and non-negative, got {x}")));
        }
    }
    Ok(())
}

/// `(1 − A)^k x₀ + C/A + B²/(C + √A·B)`, a bound on any non-negative
/// sequence with `x_{k+1}² ≤ [(1 − A)x_k + C]² + B²`.
pub fn lemma1_closed(a: f64, b: f64, c: f64, x0: f64, k: u64) -> Result<f64> {
    check_a(a)?;
    check_nonneg(&[("B", b), ("C", c), ("x0", x0)])?;
    let tail = if b == 0.0 { 0.0 } else { b * b / (c + a.sqrt() * b) };
    Ok((1.0 - a).powf(k as f64) * x0 + c / a + tail)
}

/// The constants `E` and `D = EA` of the sharp closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaEConstants {
    pub e: f64,
    pub d: f64,
}

impl LemmaEConstants {
    /// `E = ((1 − A)C + √(C² + (2A − A²)B²)) / (2A − A²)`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        check_a(a)?;
        check_nonneg(&[("B", b), ("C", c)])?;
        let q = 2.0 * a - a * a;
        let e = ((1.0 - a) * c + (c * c + q * b * b).sqrt()) / q;
        Ok(Self { e, d: e * a })
    }
}

/// `(1 − A)^k x₀ + E`: the sharp bound for `x_{k+1}² ≤ [(1 − A)x_k + C]² + B²`.
pub fn lemma_e_closed(a: f64, b: f64, c: f64, x0: f64, k: u64) -> Result<f64> {
    let LemmaEConstants { e, .. } = LemmaEConstants::new(a, b, c)?;
    check_nonneg(&[("x0", x0)])?;
    Ok((1.0 - a).powf(k as f64) * x0 + e)
}

/// `x_k` of `x_{k+1} = √([(1 − A)x_k + C]² + B²)`.
pub fn lemma_e_iterate(a: f64, b: f64, c: f64, x0: f64, k: u64) -> Result<f64> {
    check_a(a)?;
    check_nonneg(&[("B", b), ("C", c), ("x0", x0)])?;
    Ok((0..k).fold(x0, |x, _| ((1.0 - a) * x + c).hypot(b)))
}

fn check_lemma_i(a: f64, b: f64, c: f64, d: f64, x0: f64) -> Result<()> {
    if !(d > 0.0 && d < a && a < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < D < A < 1, got A={a}, D={d}")));
    }
    check_nonneg(&[("B", b), ("C", c), ("x0", x0)])
}

/// `(1 − A + D)^k x₀ + C/(A − D) + B/√((A − D)(2 − A − D))`, for
/// `x_{k+1} ≤ √((1 − A)²x_k² + B²) + C + D x_k` with `0 < D < A < 1`.
pub fn lemma_i_closed(a: f64, b: f64, c: f64, d: f64, x0: f64, k: u64) -> Result<f64> {
    check_lemma_i(a, b, c, d, x0)?;
    let gap = a - d;
    Ok((1.0 - gap).powf(k as f64) * x0 + c / gap + b / (gap * (2.0 - a - d)).sqrt())
}

/// `x_k` of `x_{k+1} = √((1 − A)²x_k² + B²) + C + D x_k`.
pub fn lemma_i_iterate(a: f64, b: f64, c: f64, d: f64, x0: f64, k: u64) -> Result<f64> {
    check_lemma_i(a, b, c, d, x0)?;
    Ok((0..k).fold(x0, |x, _| ((1.0 - a) * x).hypot(b) + c + d * x))
}

/// One LMC step of the distance recursion:
/// `√({ϱW + αM√(h³p) + hδ√p}² + σ²h²p)` with `ϱ = max(1 − mh, Mh − 1)`
/// and `α = 7√2/6`.
pub fn one_step_recursion(w: f64, m: f64, big_m: f64, p: usize, h: f64, delta: f64, sigma: f64) -> f64 {
    let p = p as f64;
    let rho = (1.0 - m * h).max(big_m * h - 1.0);
    let drift = rho * w + ONE_STEP_ALPHA * big_m * (h.powi(3) * p).sqrt() + h * delta * p.sqrt();
    drift.hypot(sigma * h * p.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_forcing_is_geometric() {
        for k in [0u64, 1, 7, 50] {
            let want = 0.7f64.powf(k as f64) * 3.0;
            assert!((lemma_e_closed(0.3, 0.0, 0.0, 3.0, k).unwrap() - want).abs() < 1e-14);
            assert!((lemma_e_iterate(0.3, 0.0, 0.0, 3.0, k).unwrap() - want).abs() < 1e-14);
            let want_i = 0.8f64.powf(k as f64) * 3.0;
            assert!((lemma_i_closed(0.3, 0.0, 0.0, 0.1, 3.0, k).unwrap() - want_i).abs() < 1e-14);
            assert!((lemma_i_iterate(0.3, 0.0, 0.0, 0.1, 3.0, k).unwrap() - want_i).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_point_c_over_a() {
        let x = lemma_e_iterate(0.5, 0.0, 1.0, 0.0, 200).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
        for k in 0..50 {
            assert!(lemma_e_closed(0.5, 0.0, 1.0, 0.0, k).unwrap() >= lemma_e_iterate(0.5, 0.0, 1.0, 0.0, k).unwrap());
        }
    }

    #[test]
    fn sharp_form_is_below_lemma1() {
        for &(a, b, c) in &[(0.1, 1.0, 0.5), (0.9, 2.0, 0.0), (0.01, 0.3, 3.0)] {
            let e = lemma_e_closed(a, b, c, 1.0, 10).unwrap();
            assert!(e <= lemma1_closed(a, b, c, 1.0, 10).unwrap() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn d_equals_e_times_a() {
        let LemmaEConstants { e, d } = LemmaEConstants::new(0.2, 1.5, 0.7).unwrap();
        let direct = ((0.8 * e + 0.7f64).powi(2) + 2.25).sqrt() - 0.8 * e;
        assert!((d - direct).abs() < 1e-12);
    }

    #[test]
    fn lemma_i_small_d() {
        let x = lemma_i_closed(0.4, 0.0, 1.0, 1e-300, 0.0, 1000).unwrap();
        assert!((x - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(lemma_e_closed(1.0, 0.0, 0.0, 1.0, 1).is_err());
        assert!(lemma_e_iterate(0.0, 0.0, 0.0, 1.0, 1).is_err());
        assert!(lemma_i_closed(0.3, 0.0, 0.0, 0.3, 1.0, 1).is_err());
    }

    #[test]
    fn one_step_examples() {
        let (m, big_m, p) = (10.0, 20.0, 100usize);
        let h = 2.0 / 30.0;
        let v = one_step_recursion(0.0, m, big_m, p, h, 0.0, 0.0);
        assert!((v - ONE_STEP_ALPHA * big_m * (h.powi(3) * 100.0).sqrt()).abs() < 1e-13);
        let rho = one_step_recursion(1.0, m, big_m, 1, h, 0.0, 0.0) - one_step_recursion(0.0, m, big_m, 1, h, 0.0, 0.0);
        assert!((rho - 10.0 / 30.0).abs() < 1e-14);
    }
}
