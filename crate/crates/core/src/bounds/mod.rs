//! Closed-form Wasserstein-2 upper bounds for the chains in
//! [`crate::samplers`], and the scalar recursions behind them.
//!
//! Every evaluator returns a [`BoundValue`] carrying the step-size hypotheses
//! it checked. A hypothesis that fails is reported in the flags; only inputs
//! for which a formula is undefined are errors.

mod recursion;

pub use recursion::{
    lemma1_closed, lemma_e_closed, lemma_e_iterate, lemma_i_closed, lemma_i_iterate, one_step_recursion,
    LemmaEConstants, ONE_STEP_ALPHA,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rounded value of `7√2/6` used in the first-order bounds.
pub const C_165: f64 = 1.65;

/// Inputs shared by the bound evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "M2", default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    pub p: usize,
    pub h: f64,
    #[serde(rename = "K")]
    pub k: u64,
    /// `W2(ν₀, π)`, or an upper bound on it.
    pub w2_0: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl BoundQuery {
    pub fn new(m: f64, big_m: f64, p: usize, h: f64, k: u64, w2_0: f64) -> Self {
        Self {
            m,
            big_m,
            m2: None,
            p,
            h,
            k,
            w2_0,
            delta: 0.0,
            sigma: 0.0,
        }
    }

    pub fn with_m2(mut self, m2: f64) -> Self {
        self.m2 = Some(m2);
        self
    }

    pub fn with_noise(mut self, delta: f64, sigma: f64) -> Self {
        self.delta = delta;
        self.sigma = sigma;
        self
    }

    pub fn with_step(mut self, h: f64, k: u64) -> Self {
        self.h = h;
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_constants(self.m, self.big_m, self.p)?;
        if let Some(m2) = self.m2 {
            if !(m2.is_finite() && m2 >= 0.0) {
                return Err(Error::InvalidConstants(format!("M2 must be finite and non-negative, got {m2}")));
            }
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.h)));
        }
        for (name, x) in [("W2_0", self.w2_0), ("delta", self.delta), ("sigma", self.sigma)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and non-negative, got {x}")));
            }
        }
        Ok(())
    }

    fn m2_required(&self) -> Result<f64> {
        self.m2
            .ok_or_else(|| Error::InvalidConstants("this bound needs a Hessian-Lipschitz constant M2".into()))
    }

    fn sqrt_p(&self) -> f64 {
        (self.p as f64).sqrt()
    }

    fn sqrt_hp(&self) -> f64 {
        (self.h * self.p as f64).sqrt()
    }
}

fn check_constants(m: f64, big_m: f64, p: usize) -> Result<()> {
    if !(m.is_finite() && m > 0.0 && big_m.is_finite() && big_m >= m) {
        return Err(Error::InvalidConstants(format!("need 0 < m ≤ M, got m={m}, M={big_m}")));
    }
    if p == 0 {
        return Err(Error::InvalidConstants("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Which guarantee a value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Constant-step LMC.
    Thm1,
    /// LMC with the varying schedule.
    Thm2,
    /// LMC with noisy gradients.
    Thm3,
    /// LMC with noisy gradients under Hessian smoothness.
    Thm4,
    /// LMCO.
    Thm5Lmco,
    /// LMCO'.
    Thm5LmcoPrime,
    /// LMCO with the higher-moment initial distance.
    PropB,
    /// The earlier constant-step bound used for comparison.
    Dm,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        Self::Thm1,
        Self::Thm2,
        Self::Thm3,
        Self::Thm4,
        Self::Thm5Lmco,
        Self::Thm5LmcoPrime,
        Self::PropB,
        Self::Dm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Thm1 => "thm1",
            Self::Thm2 => "thm2",
            Self::Thm3 => "thm3",
            Self::Thm4 => "thm4",
            Self::Thm5Lmco => "thm5_lmco",
            Self::Thm5LmcoPrime => "thm5_lmco_prime",
            Self::PropB => "prop_b",
            Self::Dm => "dm",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown bound {s:?}")))
    }
}

/// One step-size hypothesis and whether the query satisfies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlag {
    pub condition: String,
    pub holds: bool,
}

fn flag(condition: &str, holds: bool) -> HypothesisFlag {
    HypothesisFlag {
        condition: condition.to_string(),
        holds,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub tag: BoundKind,
    pub flags: Vec<HypothesisFlag>,
}

impl BoundValue {
    /// True when every hypothesis of the guarantee holds.
    pub fn hypotheses_hold(&self) -> bool {
        self.flags.iter().all(|f| f.holds)
    }
}

/// Constants used by the second-order bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm5Constants {
    /// `11.5` for LMCO, `7.3` and `1.3` for LMCO'.
    #[default]
    Statement,
    /// The sharper `7.2` for LMCO, `7.28` and `1.23` for LMCO'.
    Proof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondOrderVariant {
    Lmco,
    LmcoPrime,
}

fn first_order_step(q: &BoundQuery) -> Result<()> {
    q.validate()?;
    if q.h >= 2.0 / q.big_m {
        return Err(Error::StepHypothesis(format!("h = {} is not below 2/M = {}", q.h, 2.0 / q.big_m)));
    }
    Ok(())
}

fn pow_k(base: f64, k: u64) -> f64 {
    base.abs().powf(k as f64)
}

/// Case (a) formula `(1 − mh)^K W2₀ + 1.65(M/m)√(hp)`, without checks.
fn thm1_a(q: &BoundQuery) -> f64 {
    pow_k(1.0 - q.m * q.h, q.k) * q.w2_0 + C_165 * (q.big_m / q.m) * q.sqrt_hp()
}

/// Constant-step LMC, `0 < h < 2/M`.
///
/// For `h ≤ 2/(m+M)`: `(1 − mh)^K W2₀ + 1.65(M/m)√(hp)`; otherwise
/// `(Mh − 1)^K W2₀ + 1.65·Mh/(2 − Mh)·√(hp)`.
pub fn bound_thm1(q: &BoundQuery) -> Result<BoundValue> {
    first_order_step(q)?;
    let case_a = q.h <= 2.0 / (q.m + q.big_m);
    let value = if case_a {
        thm1_a(q)
    } else {
        let mh = q.big_m * q.h;
        pow_k(mh - 1.0, q.k) * q.w2_0 + C_165 * mh / (2.0 - mh) * q.sqrt_hp()
    };
    Ok(BoundValue {
        value,
        tag: BoundKind::Thm1,
        flags: vec![flag("h < 2/M", true), flag("h <= 2/(m+M)", case_a)],
    })
}

/// Varying-step LMC at iteration `k ≥ K₁`:
/// `3.5M√p / (m√(M + m + (2/3)m(k − K₁)))`.
pub fn bound_thm2(m: f64, big_m: f64, p: usize, k: u64, k1: u64) -> Result<BoundValue> {
    check_constants(m, big_m, p)?;
    if k < k1 {
        return Err(Error::InvalidParameter(format!("k = {k} is below the warm-up length K1 = {k1}")));
    }
    let value = 3.5 * big_m * (p as f64).sqrt() / (m * (big_m + m + 2.0 / 3.0 * m * (k - k1) as f64).sqrt());
    Ok(BoundValue {
        value,
        tag: BoundKind::Thm2,
        flags: vec![flag("k >= K1", true)],
    })
}

/// The two noise terms of the noisy first-order bound.
pub fn thm3_noise_terms(q: &BoundQuery) -> (f64, f64) {
    let bias = q.delta * q.sqrt_p() / q.m;
    let var = if q.sigma == 0.0 {
        0.0
    } else {
        q.sigma.powi(2) * q.sqrt_hp() / (C_165 * q.big_m + q.sigma * q.m.sqrt())
    };
    (bias, var)
}

/// Noisy-gradient LMC: the case (a) first-order bound plus
/// `δ√p/m + σ²√(hp)/(1.65M + σ√m)`. Requires `h < 2/M`; `h ≤ 2/(m+M)` is
/// flagged.
pub fn bound_thm3(q: &BoundQuery) -> Result<BoundValue> {
    first_order_step(q)?;
    let (bias, var) = thm3_noise_terms(q);
    Ok(BoundValue {
        value: thm1_a(q) + bias + var,
        tag: BoundKind::Thm3,
        flags: vec![flag("h <= 2/(m+M)", q.h <= 2.0 / (q.m + q.big_m))],
    })
}

/// The five terms of the Hessian-smooth noisy bound, in order: contraction,
/// `M2hp/(2m)`, `(11/5)Mh√(Mp)/m`, `δ√p/m`, `2σ²√(hp)/(M2√(hp) + 2σ√m)`.
pub fn thm4_terms(q: &BoundQuery) -> Result<[f64; 5]> {
    let m2 = q.m2_required()?;
    let (m, big_m, h, p) = (q.m, q.big_m, q.h, q.p as f64);
    let var = if q.sigma == 0.0 {
        0.0
    } else {
        2.0 * q.sigma.powi(2) * q.sqrt_hp() / (m2 * q.sqrt_hp() + 2.0 * q.sigma * m.sqrt())
    };
    Ok([
        pow_k(1.0 - m * h, q.k) * q.w2_0,
        m2 * h * p / (2.0 * m),
        11.0 / 5.0 * big_m * h * (big_m * p).sqrt() / m,
        q.delta * q.sqrt_p() / m,
        var,
    ])
}

/// Noisy-gradient LMC under Hessian smoothness. Needs `M2`.
pub fn bound_thm4(q: &BoundQuery) -> Result<BoundValue> {
    first_order_step(q)?;
    let terms = thm4_terms(q)?;
    Ok(BoundValue {
        value: terms.iter().sum(),
        tag: BoundKind::Thm4,
        flags: vec![flag("h <= 2/(m+M)", q.h <= 2.0 / (q.m + q.big_m))],
    })
}

/// Second-order samplers:
///
/// * LMCO: `(1 − mh/4)^K W2₀ + 11.5·M2h(p+1)/m`, for `h ≤ m/M²`;
/// * LMCO': `(1 − mh/4)^K W2₀ + 1.3·M²h²√(Mp)/m + 7.3·M2h(p+1)/m`, for
///   `h ≤ 3m/(4M²)`.
///
/// [`Thm5Constants::Proof`] swaps in the sharper constants.
pub fn bound_thm5(q: &BoundQuery, variant: SecondOrderVariant, constants: Thm5Constants) -> Result<BoundValue> {
    q.validate()?;
    let m2 = q.m2_required()?;
    let (m, big_m, h, p) = (q.m, q.big_m, q.h, q.p as f64);
    let contraction = pow_k(1.0 - 0.25 * m * h, q.k) * q.w2_0;
    let (value, tag, flags) = match variant {
        SecondOrderVariant::Lmco => {
            let c = match constants {
                Thm5Constants::Statement => 11.5,
                Thm5Constants::Proof => 7.2,
            };
            (
                contraction + c * m2 * h * (p + 1.0) / m,
                BoundKind::Thm5Lmco,
                vec![flag("h <= m/M^2", h <= m / (big_m * big_m))],
            )
        }
        SecondOrderVariant::LmcoPrime => {
            let (c_hess, c_step) = match constants {
                Thm5Constants::Statement => (7.3, 1.3),
                Thm5Constants::Proof => (7.28, 1.23),
            };
            (
                contraction + c_step * big_m * big_m * h * h * (big_m * p).sqrt() / m + c_hess * m2 * h * (p + 1.0) / m,
                BoundKind::Thm5LmcoPrime,
                vec![flag("h <= 3m/(4M^2)", h <= 0.75 * m / (big_m * big_m))],
            )
        }
    };
    Ok(BoundValue { value, tag, flags })
}

/// Natural logarithm of the LMCO bound in terms of the `2^{K+1}`-th moment
/// distance `w_high`:
///
/// `(2m/M2)·(w_K exp(v_K w_K^{−2^K}))^{2^K}` with
/// `w_K = M2·w_high/(2m) + ½e^{−mh}` and
/// `v_K = 2M2·M^{3/2}√(2p + 2^K)/m³ + e^{−mh}`.
pub fn log_bound_prop_b(m: f64, big_m: f64, m2: f64, p: usize, h: f64, k: u32, w_high: f64) -> Result<f64> {
    check_constants(m, big_m, p)?;
    if !(m2.is_finite() && m2 > 0.0) {
        return Err(Error::InvalidConstants(format!("M2 must be positive, got {m2}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if k > 50 {
        return Err(Error::InvalidParameter(format!("K = {k} exceeds 50")));
    }
    if !(w_high.is_finite() && w_high >= 0.0) {
        return Err(Error::InvalidParameter(format!("W_high must be finite and non-negative, got {w_high}")));
    }
    let two_k = (1u64 << k) as f64;
    let decay = (-m * h).exp();
    let w = m2 * w_high / (2.0 * m) + 0.5 * decay;
    let v = 2.0 * m2 * big_m.powf(1.5) * (2.0 * p as f64 + two_k).sqrt() / m.powi(3) + decay;
    let ln_w = w.ln();
    // v·w^{−2^K}, itself in log-space.
    let ln_inner = v.ln() - two_k * ln_w;
    if ln_inner > 700.0 {
        return Err(Error::Overflow {
            log_value: f64::INFINITY,
        });
    }
    let log_value = (2.0 * m / m2).ln() + two_k * (ln_w + ln_inner.exp());
    if !log_value.is_finite() {
        return Err(Error::Overflow { log_value });
    }
    Ok(log_value)
}

/// [`log_bound_prop_b`] exponentiated; an [`Error::Overflow`] carries the
/// logarithm when the value does not fit in a double.
pub fn bound_prop_b(m: f64, big_m: f64, m2: f64, p: usize, h: f64, k: u32, w_high: f64) -> Result<BoundValue> {
    let log_value = log_bound_prop_b(m, big_m, m2, p, h, k, w_high)?;
    let value = log_value.exp();
    if !value.is_finite() {
        return Err(Error::Overflow { log_value });
    }
    Ok(BoundValue {
        value,
        tag: BoundKind::PropB,
        flags: vec![],
    })
}

/// The comparison bound for constant-step LMC:
/// `√(2(1 − mMh/(m+M))^K W2₀² + (Mhp/m)(m+M)(h + (m+M)/(2mM))(2 + M²h/m + M²h²/6))`.
pub fn bound_dm(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let (m, big_m, h, p) = (q.m, q.big_m, q.h, q.p as f64);
    let s = m + big_m;
    let contraction = 2.0 * pow_k(1.0 - m * big_m * h / s, q.k) * q.w2_0 * q.w2_0;
    let floor = (big_m * h * p / m)
        * s
        * (h + s / (2.0 * m * big_m))
        * (2.0 + big_m * big_m * h / m + big_m * big_m * h * h / 6.0);
    Ok(BoundValue {
        value: (contraction + floor).sqrt(),
        tag: BoundKind::Dm,
        flags: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> BoundQuery {
        BoundQuery::new(10.0, 20.0, 100, 1.0 / 30.0, 1000, 110.0)
    }

    #[test]
    fn thm1_examples() {
        let q = base().with_step(1.0 / 15.0, 0);
        let b = bound_thm1(&q).unwrap();
        assert_relative_eq!(b.value, 110.0 + 3.3 * (100.0f64 / 15.0).sqrt(), max_relative = 1e-14);
        assert!((b.value - 118.52).abs() < 0.01);
        assert!(b.hypotheses_hold());

        let tiny = bound_thm1(&base().with_step(1e-14, 5)).unwrap().value;
        assert!((tiny - 110.0).abs() < 1e-4);
        assert!(matches!(bound_thm1(&base().with_step(0.1, 1)), Err(Error::StepHypothesis(_))));
    }

    #[test]
    fn thm1_case_b() {
        let q = base().with_step(0.08, 3);
        let b = bound_thm1(&q).unwrap();
        let want = 0.6f64.powi(3) * 110.0 + 1.65 * 1.6 / 0.4 * 8f64.sqrt();
        assert_relative_eq!(b.value, want, max_relative = 1e-14);
        assert!(!b.hypotheses_hold());
    }

    #[test]
    fn thm2_examples() {
        let b = bound_thm2(10.0, 20.0, 100, 4, 4).unwrap();
        assert_relative_eq!(b.value, 700.0 / (10.0 * 30f64.sqrt()), max_relative = 1e-14);
        assert!((b.value - 12.78).abs() < 0.005);
        let doubled = bound_thm2(10.0, 20.0, 200, 4, 4).unwrap();
        assert_relative_eq!(doubled.value / b.value, 2f64.sqrt(), max_relative = 1e-14);
        assert!(bound_thm2(10.0, 20.0, 100, 3, 4).is_err());
    }

    #[test]
    fn thm3_reductions() {
        let q = base();
        let a = bound_thm1(&q).unwrap().value;
        assert_eq!(bound_thm3(&q).unwrap().value, a);
        let with_bias = bound_thm3(&q.with_noise(0.1, 0.0)).unwrap().value;
        assert_relative_eq!(with_bias - a, 0.1 * 10.0 / 10.0, max_relative = 1e-12);
    }

    #[test]
    fn thm4_reduction() {
        let q = base().with_m2(0.0);
        let t = thm4_terms(&q).unwrap();
        let want = (1.0f64 - 1.0 / 3.0).powi(1000) * 110.0 + 2.2 * 20.0 / 30.0 * 2000f64.sqrt() / 10.0;
        assert_relative_eq!(bound_thm4(&q).unwrap().value, want, max_relative = 1e-14);
        assert_eq!(t[1], 0.0);
        assert!(bound_thm4(&base()).is_err());
    }

    #[test]
    fn thm5_scaling() {
        let q = base().with_m2(5.0).with_step(1.0 / 40.0, 500);
        let zero = bound_thm5(&q.with_m2(0.0), SecondOrderVariant::Lmco, Thm5Constants::Statement).unwrap();
        assert_relative_eq!(zero.value, (1.0f64 - 0.25 / 4.0).powi(500) * 110.0, max_relative = 1e-13);
        // Drop the contraction term to compare the others.
        let mut q0 = q;
        q0.w2_0 = 0.0;
        let full = bound_thm5(&q0, SecondOrderVariant::LmcoPrime, Thm5Constants::Statement).unwrap().value;
        let half = bound_thm5(&q0.with_step(q.h / 2.0, q.k), SecondOrderVariant::LmcoPrime, Thm5Constants::Statement)
            .unwrap()
            .value;
        let middle = 1.3 * 400.0 * q.h * q.h * 2000f64.sqrt() / 10.0;
        let last = 7.3 * 5.0 * q.h * 101.0 / 10.0;
        assert_relative_eq!(full, middle + last, max_relative = 1e-13);
        assert_relative_eq!(half, middle / 4.0 + last / 2.0, max_relative = 1e-13);
        let proof = bound_thm5(&q0, SecondOrderVariant::Lmco, Thm5Constants::Proof).unwrap().value;
        assert_relative_eq!(proof, 7.2 * 5.0 * q.h * 101.0 / 10.0, max_relative = 1e-13);
    }

    #[test]
    fn prop_b_k0_and_direct() {
        let (m, big_m, m2, p, h, w) = (2.0f64, 3.0f64, 0.5, 4usize, 0.1, 20.0);
        let b = bound_prop_b(m, big_m, m2, p, h, 0, w).unwrap();
        let wk = m2 * w / (2.0 * m) + 0.5 * (-m * h).exp();
        let vk = 2.0 * m2 * big_m.powf(1.5) * 9f64.sqrt() / m.powi(3) + (-m * h).exp();
        assert_relative_eq!(b.value, 2.0 * m / m2 * wk * (vk / wk).exp(), max_relative = 1e-13);
        for k in 1..4u32 {
            let e = 2f64.powi(k as i32);
            let vk = 2.0 * m2 * big_m.powf(1.5) * (8.0 + e).sqrt() / m.powi(3) + (-m * h).exp();
            let direct = 2.0 * m / m2 * (wk * (vk * wk.powf(-e)).exp()).powf(e);
            assert_relative_eq!(bound_prop_b(m, big_m, m2, p, h, k, w).unwrap().value, direct, max_relative = 1e-12);
        }
        assert!(bound_prop_b(m, big_m, 0.0, p, h, 0, w).is_err());
        assert!(matches!(bound_prop_b(1.0, 1.0, 1.0, 1, 1.0, 20, 1e-3), Err(Error::Overflow { .. })));
    }

    #[test]
    fn dm_limits() {
        let q = base();
        let far = bound_dm(&q.with_step(q.h, 1_000_000)).unwrap().value;
        let (m, big_m, h, p) = (10.0f64, 20.0f64, 1.0f64 / 30.0, 100.0f64);
        let floor = (big_m * h * p / m) * 30.0 * (h + 30.0 / 400.0) * (2.0 + 400.0 * h / m + 400.0 * h * h / 6.0);
        assert_relative_eq!(far, floor.sqrt(), max_relative = 1e-12);
        let mut z = q.with_step(1e-16, 10);
        z.w2_0 = 0.0;
        assert!(bound_dm(&z).unwrap().value < 1e-6);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in BoundKind::ALL {
            assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
            assert_eq!(k.to_string(), k.name());
        }
    }
}
