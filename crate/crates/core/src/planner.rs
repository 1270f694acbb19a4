//! Iteration budgets: the smallest `K` (and a matching step `h`) for which a
//! bound guarantees `W2 ≤ ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_dm, bound_thm1, bound_thm2, bound_thm3, bound_thm4, bound_thm5, BoundKind, BoundQuery, SecondOrderVariant,
    Thm5Constants,
};
use crate::error::{Error, Result};
use crate::samplers::{compute_k1, StepSchedule};

/// Points in the coarse log-spaced scan over `h`.
const GRID_POINTS: usize = 240;
/// The scan covers `[hmax·1e−12, hmax]`.
const GRID_DECADES: f64 = 12.0;
/// Relative width at which the bisection on `h` stops.
const H_RTOL: f64 = 1e-10;
/// Largest budget the search will report.
pub const K_MAX: u64 = 1 << 52;

/// Everything a bound needs except `h` and `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "M2", default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    pub p: usize,
    pub w2_0: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl PlanParams {
    pub fn new(m: f64, big_m: f64, p: usize, w2_0: f64) -> Self {
        Self {
            m,
            big_m,
            m2: None,
            p,
            w2_0,
            delta: 0.0,
            sigma: 0.0,
        }
    }

    pub fn query(&self, h: f64, k: u64) -> BoundQuery {
        BoundQuery {
            m: self.m,
            big_m: self.big_m,
            m2: self.m2,
            p: self.p,
            h,
            k,
            w2_0: self.w2_0,
            delta: self.delta,
            sigma: self.sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    #[serde(rename = "K_eps")]
    pub k_eps: u64,
    /// Step minimizing the bound at `K_eps`; for `thm2`, the last step of the
    /// varying schedule.
    pub h_star: f64,
    /// Bound value at `(h_star, K_eps)`, at most `ε`.
    pub achieved: f64,
    pub tag: BoundKind,
    /// Warm-up length, for `thm2`.
    #[serde(rename = "K1", default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<u64>,
}

/// Right end of the step interval searched for `kind`.
pub fn step_cap(kind: BoundKind, m: f64, big_m: f64) -> Option<f64> {
    match kind {
        BoundKind::Thm1 | BoundKind::Thm3 | BoundKind::Thm4 | BoundKind::Dm => Some(2.0 / (m + big_m)),
        BoundKind::Thm5Lmco => Some(m / (big_m * big_m)),
        BoundKind::Thm5LmcoPrime => Some(0.75 * m / (big_m * big_m)),
        BoundKind::Thm2 | BoundKind::PropB => None,
    }
}

/// Evaluates a constant-step bound.
pub fn evaluate(kind: BoundKind, params: &PlanParams, h: f64, k: u64) -> Result<f64> {
    let q = params.query(h, k);
    let b = match kind {
        BoundKind::Thm1 => bound_thm1(&q)?,
        BoundKind::Thm3 => bound_thm3(&q)?,
        BoundKind::Thm4 => bound_thm4(&q)?,
        BoundKind::Thm5Lmco => bound_thm5(&q, SecondOrderVariant::Lmco, Thm5Constants::Statement)?,
        BoundKind::Thm5LmcoPrime => bound_thm5(&q, SecondOrderVariant::LmcoPrime, Thm5Constants::Statement)?,
        BoundKind::Dm => bound_dm(&q)?,
        BoundKind::Thm2 | BoundKind::PropB => {
            return Err(Error::InvalidParameter(format!("{kind} is not a constant-step bound")))
        }
    };
    Ok(b.value)
}

/// The part of the bound that no `(h, K)` can remove.
fn floor_term(kind: BoundKind, params: &PlanParams) -> f64 {
    match kind {
        BoundKind::Thm3 | BoundKind::Thm4 => params.delta * (params.p as f64).sqrt() / params.m,
        _ => 0.0,
    }
}

/// Minimizes `h ↦ bound(h, k)` over `(0, hmax]`: a log-spaced scan, then
/// bisection on the sign of a finite-difference slope around the best grid
/// point. Returns `(h, value)`.
pub fn minimize_step<F>(hmax: f64, f: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let lo = hmax * 10f64.powf(-GRID_DECADES);
    let ratio = (hmax / lo).ln();
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            if i + 1 == GRID_POINTS {
                hmax
            } else {
                lo * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp()
            }
        })
        .collect();
    let values = grid.iter().map(|&h| f(h)).collect::<Result<Vec<_>>>()?;
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID_POINTS - 1)];
    let (mut h_best, mut v_best) = (grid[best], values[best]);
    while b - a > H_RTOL * b {
        let mid = 0.5 * (a + b);
        let step = (1e-6 * mid).min(0.5 * (b - a));
        let left = f(mid - step)?;
        let right = f(mid + step)?;
        let centre = f(mid)?;
        if centre < v_best {
            h_best = mid;
            v_best = centre;
        }
        if right < left {
            a = mid;
        } else {
            b = mid;
        }
    }
    for h in [a, b] {
        let v = f(h)?;
        if v < v_best {
            h_best = h;
            v_best = v;
        }
    }
    Ok((h_best, v_best))
}

/// Smallest `K` such that `min_h bound(h, K) ≤ ε` over the bound's step
/// interval; for `thm2` the closed-form inversion of the varying-schedule
/// bound.
///
/// An unreachable `ε` gives [`Error::Infeasible`] naming the floor.
pub fn min_iterations(kind: BoundKind, epsilon: f64, params: &PlanParams) -> Result<PlanResult> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    params.query(1.0, 0).validate()?;
    if kind == BoundKind::Thm2 {
        return thm2_iterations(epsilon, params);
    }
    let hmax = step_cap(kind, params.m, params.big_m)
        .ok_or_else(|| Error::InvalidParameter(format!("the planner does not support {kind}")))?;
    let floor = floor_term(kind, params);
    if floor >= epsilon {
        return Err(Error::Infeasible { epsilon, floor });
    }
    let best = |k: u64| minimize_step(hmax, |h| evaluate(kind, params, h, k));
    let (h0, v0) = best(0)?;
    if v0 <= epsilon {
        return Ok(PlanResult {
            k_eps: 0,
            h_star: h0,
            achieved: v0,
            tag: kind,
            k1: None,
        });
    }
    let mut hi = 1u64;
    let mut found = best(hi)?;
    while found.1 > epsilon {
        if hi >= K_MAX {
            return Err(Error::Infeasible {
                epsilon,
                floor: found.1.max(floor),
            });
        }
        hi *= 2;
        found = best(hi)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let candidate = best(mid)?;
        if candidate.1 <= epsilon {
            hi = mid;
            found = candidate;
        } else {
            lo = mid;
        }
    }
    Ok(PlanResult {
        k_eps: hi,
        h_star: found.0,
        achieved: found.1,
        tag: kind,
        k1: None,
    })
}

fn thm2_iterations(epsilon: f64, params: &PlanParams) -> Result<PlanResult> {
    let (m, big_m, p) = (params.m, params.big_m, params.p);
    let k1 = compute_k1(m, big_m, p, params.w2_0)?;
    let value = |k: u64| bound_thm2(m, big_m, p, k, k1).map(|b| b.value);
    let target = (3.5 * big_m * (p as f64).sqrt() / (m * epsilon)).powi(2);
    let extra = (1.5 / m * (target - (big_m + m))).ceil();
    let mut k = if extra > 0.0 {
        if extra >= (K_MAX - k1) as f64 {
            return Err(Error::Infeasible { epsilon, floor: 0.0 });
        }
        k1 + extra as u64
    } else {
        k1
    };
    // Round-off guards around the ceiling.
    while value(k)? > epsilon {
        k += 1;
    }
    while k > k1 && value(k - 1)? <= epsilon {
        k -= 1;
    }
    let schedule = StepSchedule::varying(m, big_m, k1)?;
    Ok(PlanResult {
        k_eps: k,
        h_star: schedule.step(k.saturating_sub(1)),
        achieved: value(k)?,
        tag: BoundKind::Thm2,
        k1: Some(k1),
    })
}

/// The explicit pair `h = min(m²ε²/(11M²p), 2/(m+M))`,
/// `K = ⌈ln(2W2₀/ε)/(mh)⌉`, which always makes the constant-step bound at
/// most `ε`.
pub fn sufficient_pair(epsilon: f64, m: f64, big_m: f64, p: usize, w2_0: f64) -> Result<(f64, u64)> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    BoundQuery::new(m, big_m, p, 1.0, 0, w2_0).validate()?;
    let h = if epsilon.is_infinite() {
        2.0 / (m + big_m)
    } else {
        (m * m * epsilon * epsilon / (11.0 * big_m * big_m * p as f64)).min(2.0 / (m + big_m))
    };
    let k = ((2.0 * w2_0 / epsilon).ln() / (m * h)).ceil();
    Ok((h, if k > 0.0 { k as u64 } else { 0 }))
}

/// One row of the iteration-count comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub p: usize,
    pub epsilon: f64,
    pub k_thm1: u64,
    pub k_thm2: u64,
    pub k_dm: u64,
}

impl Figure1Row {
    /// `K_thm2 ≤ K_thm1 ≤ K_dm`.
    pub fn ordered(&self) -> bool {
        self.k_thm2 <= self.k_thm1 && self.k_thm1 <= self.k_dm
    }

    /// Natural logarithms of `(K_thm1, K_thm2, K_dm)`.
    pub fn log_k(&self) -> (f64, f64, f64) {
        ((self.k_thm1 as f64).ln(), (self.k_thm2 as f64).ln(), (self.k_dm as f64).ln())
    }
}

/// `K_ε` from the optimized constant-step bound, the varying-step bound and
/// the comparison bound, for every `(p, ε)` with `W2₀ = p + p/m`. Rows are
/// ordered by `ε`, then `p`, and computed in parallel.
pub fn figure1_table(m: f64, big_m: f64, epsilons: &[f64], p_grid: &[usize]) -> Result<Vec<Figure1Row>> {
    if epsilons.is_empty() || p_grid.is_empty() {
        return Err(Error::InvalidParameter("figure grids must be nonempty".into()));
    }
    let cells: Vec<(f64, usize)> = epsilons
        .iter()
        .flat_map(|&e| p_grid.iter().map(move |&p| (e, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(epsilon, p)| {
            let params = PlanParams::new(m, big_m, p, p as f64 + p as f64 / m);
            Ok(Figure1Row {
                p,
                epsilon,
                k_thm1: min_iterations(BoundKind::Thm1, epsilon, &params)?.k_eps,
                k_thm2: min_iterations(BoundKind::Thm2, epsilon, &params)?.k_eps,
                k_dm: min_iterations(BoundKind::Dm, epsilon, &params)?.k_eps,
            })
        })
        .collect()
}

/// Averages over `p` of the iteration-count ratios for one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Summary {
    pub epsilon: f64,
    pub rows: usize,
    /// Mean over rows of `K_dm / K_thm2`.
    pub mean_ratio_dm_thm2: f64,
    /// Mean over rows of `K_dm / K_thm1`.
    pub mean_ratio_dm_thm1: f64,
    /// `Σ K_dm / Σ K_thm2`.
    pub ratio_of_means_dm_thm2: f64,
    /// `Σ K_dm / Σ K_thm1`.
    pub ratio_of_means_dm_thm1: f64,
    /// Rows breaking `K_thm2 ≤ K_thm1 ≤ K_dm`.
    pub ordering_violations: usize,
}

/// One summary per distinct `ε`, in order of first appearance.
pub fn figure1_summary(rows: &[Figure1Row]) -> Vec<Figure1Summary> {
    let mut eps: Vec<f64> = Vec::new();
    for r in rows {
        if !eps.contains(&r.epsilon) {
            eps.push(r.epsilon);
        }
    }
    eps.into_iter()
        .map(|epsilon| {
            let sel: Vec<&Figure1Row> = rows.iter().filter(|r| r.epsilon == epsilon).collect();
            let n = sel.len() as f64;
            let mean = |f: &dyn Fn(&Figure1Row) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / n;
            let sum = |f: &dyn Fn(&Figure1Row) -> u64| sel.iter().map(|r| f(r) as f64).sum::<f64>();
            Figure1Summary {
                epsilon,
                rows: sel.len(),
                mean_ratio_dm_thm2: mean(&|r| r.k_dm as f64 / r.k_thm2 as f64),
                mean_ratio_dm_thm1: mean(&|r| r.k_dm as f64 / r.k_thm1 as f64),
                ratio_of_means_dm_thm2: sum(&|r| r.k_dm) / sum(&|r| r.k_thm2),
                ratio_of_means_dm_thm1: sum(&|r| r.k_dm) / sum(&|r| r.k_thm1),
                ordering_violations: sel.iter().filter(|r| !r.ordered()).count(),
            }
        })
        .collect()
}
