//! Moving-block bootstrap index generation and AR-based block-length selection.

use crate::error::{Error, Result};
use crate::lossfn::LossMatrix;
use crate::numeric::solve_linear;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of the automatic block-length rule.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BlockLengthSelection {
    /// the block length: largest significant AR lag across all pairwise differentials
    pub block_length: usize,
    /// diagnostic: the maximum *count* of significant lags across pairs
    pub max_significant_count: usize,
    /// AR order used in the regressions
    pub ar_order: usize,
}

/// Pick the block length from AR(p) fits on every pairwise loss differential.
///
/// Each d_ij series is regressed on its first min(10, n^(1/3)) lags plus an
/// intercept; a lag counts as significant when |coef|/s.e. > 1.96. The block
/// length is the largest significant lag over all pairs, floored at 1.
/// Constant differential series carry no dependence information and are
/// skipped.
pub fn select_block_length(loss_matrix: &LossMatrix) -> Result<BlockLengthSelection> {
    let n = loss_matrix.n_obs();
    if n < 30 {
        return Err(Error::InvalidInput(format!(
            "automatic block-length selection needs n >= 30 (got {n}); pass an explicit block length"
        )));
    }
    let p_max = ((n as f64).powf(1.0 / 3.0).floor() as usize).clamp(1, 10);
    let m = loss_matrix.n_models();

    let mut best_lag = 0usize;
    let mut best_count = 0usize;
    for i in 0..m {
        for j in (i + 1)..m {
            let d: Vec<f64> = loss_matrix
                .row(i)
                .iter()
                .zip(loss_matrix.row(j))
                .map(|(a, b)| a - b)
                .collect();
            if is_constant(&d) {
                continue;
            }
            if let Some((largest, count)) = significant_lags(&d, p_max) {
                best_lag = best_lag.max(largest);
                best_count = best_count.max(count);
            }
        }
    }
    Ok(BlockLengthSelection {
        block_length: best_lag.max(1),
        max_significant_count: best_count,
        ar_order: p_max,
    })
}

fn is_constant(d: &[f64]) -> bool {
    d.windows(2).all(|w| w[0] == w[1])
}

/// OLS AR(p) fit with intercept; returns (largest significant lag, count).
fn significant_lags(d: &[f64], p: usize) -> Option<(usize, usize)> {
    let n = d.len();
    let rows = n - p;
    let k = p + 1; // intercept + p lags
    if rows <= k + 1 {
        return None;
    }
    // normal equations X'X and X'y
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for t in p..n {
        let mut x = Vec::with_capacity(k);
        x.push(1.0);
        for lag in 1..=p {
            x.push(d[t - lag]);
        }
        for a in 0..k {
            xty[a] += x[a] * d[t];
            for b in 0..k {
                xtx[a][b] += x[a] * x[b];
            }
        }
    }
    let coef = solve_linear(&xtx, &xty)?;

    // residual variance
    let mut rss = 0.0;
    for t in p..n {
        let mut fit = coef[0];
        for lag in 1..=p {
            fit += coef[lag] * d[t - lag];
        }
        let r = d[t] - fit;
        rss += r * r;
    }
    let dof = rows.checked_sub(k)?;
    if dof == 0 {
        return None;
    }
    let sigma2 = rss / dof as f64;

    // diagonal of (X'X)^{-1} by solving against unit vectors
    let mut largest = 0usize;
    let mut count = 0usize;
    for lag in 1..=p {
        let mut e = vec![0.0; k];
        e[lag] = 1.0;
        let col = solve_linear(&xtx, &e)?;
        let se = (sigma2 * col[lag]).max(0.0).sqrt();
        if se > 0.0 && (coef[lag] / se).abs() > 1.96 {
            largest = largest.max(lag);
            count += 1;
        }
    }
    Some((largest, count))
}

/// Moving-block bootstrap: B index vectors of length n built from blocks of
/// length p with uniformly random start points in [0, n-p].
///
/// The same index sets are shared by every model and every pair; that is what
/// makes the bootstrapped statistics comparable across models.
pub fn bootstrap_indices(n: usize, b: usize, p: usize, seed: u64) -> Result<Vec<Vec<u32>>> {
    if p == 0 || p > n {
        return Err(Error::InvalidInput(format!(
            "block length {p} outside [1, {n}]"
        )));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidInput("series too long for u32 indices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_blocks = n.div_ceil(p);
    let max_start = (n - p) as u32;
    let mut all = Vec::with_capacity(b);
    for _ in 0..b {
        let mut idx = Vec::with_capacity(n_blocks * p);
        for _ in 0..n_blocks {
            let start = if max_start == 0 {
                0
            } else {
                rng.gen_range(0..=max_start)
            };
            for offset in 0..p as u32 {
                idx.push(start + offset);
            }
        }
        idx.truncate(n);
        all.push(idx);
    }
    Ok(all)
}
