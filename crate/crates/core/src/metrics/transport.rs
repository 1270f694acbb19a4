use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// Largest sample size accepted by [`empirical_w2`].
pub const MAX_EMPIRICAL_SAMPLES: usize = 4096;

/// Minimum-cost perfect matching on an `n × n` cost matrix given row-major.
///
/// Shortest augmenting paths with dual potentials, `O(n³)`. Returns the
/// column assigned to each row and the total cost.
pub fn assignment(n: usize, cost: &[f64]) -> Result<(Vec<usize>, f64)> {
    if cost.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            actual: cost.len(),
        });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("costs must be finite".into()));
    }
    // 1-based rows and columns; column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            let row = &cost[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    let total = col_of.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok((col_of, total))
}

/// Exact `W2` between the empirical measures of two samples of equal size
/// `n ≤ 4096`: the square root of the mean squared distance under the
/// optimal matching.
pub fn empirical_w2(x: &[DVector<f64>], y: &[DVector<f64>]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidParameter("samples are empty".into()));
    }
    if n > MAX_EMPIRICAL_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "{n} samples exceed the limit of {MAX_EMPIRICAL_SAMPLES}"
        )));
    }
    let p = x[0].len();
    for s in x.iter().chain(y) {
        check_dim(p, s.len())?;
    }
    let mut cost = Vec::with_capacity(n * n);
    for a in x {
        for b in y {
            cost.push((a - b).norm_squared());
        }
    }
    let (_, total) = assignment(n, &cost)?;
    Ok((total.max(0.0) / n as f64).sqrt())
}
