use std::io::{self, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::rng::ChainRng;

/// Current iterate of one chain. Single owner; run chains in parallel by
/// giving each its own state and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub theta: DVector<f64>,
    /// Number of transitions applied so far.
    pub k: u64,
    pub rng: ChainRng,
}

impl ChainState {
    pub fn new(theta0: DVector<f64>, seed: u64) -> Self {
        Self {
            theta: theta0,
            k: 0,
            rng: ChainRng::new(seed),
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

/// A step-size hypothesis of the matching guarantee that does not hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisWarning {
    pub condition: String,
    pub h: f64,
    pub limit: f64,
}

impl HypothesisWarning {
    pub(crate) fn check(condition: &str, h: f64, limit: f64) -> Option<Self> {
        (h > limit).then(|| {
            log::warn!("step {h} exceeds {condition} limit {limit}");
            Self {
                condition: condition.to_string(),
                h,
                limit,
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Keep `θ` every `stride` iterations (and at `k = 0`); `None` keeps only
    /// step sizes.
    pub stride: Option<u64>,
}

impl RunOptions {
    pub fn every(stride: u64) -> Self {
        Self {
            stride: Some(stride.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: u64,
    /// Step used to reach this iterate; 0 for `k = 0`.
    pub h: f64,
    pub theta: DVector<f64>,
}

/// Append-only history of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainTrace {
    pub records: Vec<TraceRecord>,
    /// `steps[k]` is the step used from iterate `k` to `k + 1`.
    pub steps: Vec<f64>,
    pub noise_draws: u64,
    pub noise_sq_norm_sum: f64,
    pub warnings: Vec<HypothesisWarning>,
}

impl ChainTrace {
    pub fn mean_noise_sq_norm(&self) -> f64 {
        if self.noise_draws == 0 {
            0.0
        } else {
            self.noise_sq_norm_sum / self.noise_draws as f64
        }
    }

    /// CSV with columns `k, h_k, theta_1, …, theta_p`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let p = self.records.first().map_or(0, |r| r.theta.len());
        write!(out, "k,h_k")?;
        for j in 1..=p {
            write!(out, ",theta_{j}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(out, "{},{}", r.k, sig17(r.h))?;
            for x in r.theta.iter() {
                write!(out, ",{}", sig17(*x))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Applies `iterations` transitions. `transition` moves `state.theta` one step
/// and returns the step size it used; bookkeeping is done here.
pub(crate) fn drive<F>(
    state: &mut ChainState,
    trace: &mut ChainTrace,
    iterations: u64,
    options: RunOptions,
    mut transition: F,
) -> Result<()>
where
    F: FnMut(&mut ChainState, &mut ChainTrace) -> Result<f64>,
{
    if let Some(stride) = options.stride {
        if state.k.is_multiple_of(stride) && trace.records.last().is_none_or(|r| r.k != state.k) {
            trace.records.push(TraceRecord {
                k: state.k,
                h: 0.0,
                theta: state.theta.clone(),
            });
        }
    }
    for _ in 0..iterations {
        let h = transition(state, trace)?;
        if state.theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { iteration: state.k + 1 });
        }
        state.k += 1;
        trace.steps.push(h);
        if let Some(stride) = options.stride {
            if state.k.is_multiple_of(stride) {
                trace.records.push(TraceRecord {
                    k: state.k,
                    h,
                    theta: state.theta.clone(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn csv_layout() {
        let trace = ChainTrace {
            records: vec![
                TraceRecord { k: 0, h: 0.0, theta: dvector![1.0, -2.0] },
                TraceRecord { k: 2, h: 0.5, theta: dvector![0.25, 0.125] },
            ],
            ..Default::default()
        };
        let csv = trace.to_csv_string();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "k,h_k,theta_1,theta_2");
        assert_eq!(lines.len(), 3);
        let fields: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields, vec![2.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn drive_records_at_stride() {
        let mut state = ChainState::new(dvector![1.0], 0);
        let mut trace = ChainTrace::default();
        drive(&mut state, &mut trace, 5, RunOptions::every(2), |s, _| {
            s.theta *= 0.5;
            Ok(0.1)
        })
        .unwrap();
        let ks: Vec<_> = trace.records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 2, 4]);
        assert_eq!(trace.steps.len(), 5);
        assert_eq!(state.k, 5);
    }

    #[test]
    fn drive_stops_on_non_finite() {
        let mut state = ChainState::new(dvector![1.0], 0);
        let mut trace = ChainTrace::default();
        let err = drive(&mut state, &mut trace, 3, RunOptions::default(), |s, _| {
            s.theta[0] = f64::INFINITY;
            Ok(1.0)
        })
        .unwrap_err();
        assert_eq!(err, Error::NonFinite { iteration: 1 });
    }
}
