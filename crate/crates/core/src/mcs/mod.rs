//! The Model Confidence Set procedure: equal-predictive-ability statistics
//! over a shared moving-block bootstrap, sequential elimination of the worst
//! model, and the survivor report with ranks, t statistics and p-values.

// index-based loops mirror the pairwise matrix algebra
#![allow(clippy::needless_range_loop)]

mod bootstrap;

pub use bootstrap::{bootstrap_indices, select_block_length, BlockLengthSelection};

use crate::error::{Error, Result};
use crate::lossfn::LossMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// EPA test statistic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum McsStatistic {
    /// range statistic: max |t_ij| over pairs
    #[serde(rename = "TR")]
    TR,
    /// max studentized average differential: max t_i.
    #[serde(rename = "Tmax")]
    Tmax,
}

impl std::fmt::Display for McsStatistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            McsStatistic::TR => write!(f, "TR"),
            McsStatistic::Tmax => write!(f, "Tmax"),
        }
    }
}

impl std::str::FromStr for McsStatistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TR" | "tr" | "Tr" => Ok(McsStatistic::TR),
            "Tmax" | "tmax" | "TMAX" => Ok(McsStatistic::Tmax),
            other => Err(Error::Config(format!(
                "unknown statistic `{other}` (use TR or Tmax)"
            ))),
        }
    }
}

/// Configuration of one MCS run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McsConfig {
    /// confidence level of the sequential tests, in (0,1)
    pub alpha: f64,
    /// bootstrap replicates; at least 100, 1000+ recommended
    pub b: usize,
    pub statistic: McsStatistic,
    /// explicit block length; `None` selects it from AR fits on the differentials
    pub block_length: Option<usize>,
    pub seed: u64,
}

impl McsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha {} outside (0,1)",
                self.alpha
            )));
        }
        if self.b < 100 {
            return Err(Error::Config(format!(
                "need at least 100 bootstrap replicates (got {})",
                self.b
            )));
        }
        if let Some(p) = self.block_length {
            if p == 0 {
                return Err(Error::Config("block length must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Pairwise and per-model loss differentials with their time means.
///
/// Mostly a diagnostic surface; the engine works on the mean arrays directly.
#[derive(Debug, Clone)]
pub struct LossDifferentials {
    /// d_ij[i][j][t] = loss_i[t] - loss_j[t]
    pub d_ij: Vec<Vec<Vec<f64>>>,
    /// d_idot[i][t] = (m-1)^{-1} sum_{j != i} d_ij[t]
    pub d_idot: Vec<Vec<f64>>,
    pub dbar_ij: Vec<Vec<f64>>,
    pub dbar_idot: Vec<f64>,
}

/// Materialize the differential series of a loss matrix.
pub fn loss_differentials(lm: &LossMatrix) -> LossDifferentials {
    let m = lm.n_models();
    let n = lm.n_obs();
    let mut d_ij = vec![vec![vec![0.0; n]; m]; m];
    for i in 0..m {
        for j in 0..m {
            for t in 0..n {
                d_ij[i][j][t] = lm.row(i)[t] - lm.row(j)[t];
            }
        }
    }
    let mut d_idot = vec![vec![0.0; n]; m];
    for i in 0..m {
        for t in 0..n {
            let mut acc = 0.0;
            for j in 0..m {
                if j != i {
                    acc += d_ij[i][j][t];
                }
            }
            d_idot[i][t] = acc / (m - 1) as f64;
        }
    }
    let dbar_ij = d_ij
        .iter()
        .map(|row| row.iter().map(|s| mean(s)).collect())
        .collect();
    let dbar_idot = d_idot.iter().map(|s| mean(s)).collect();
    LossDifferentials {
        d_ij,
        d_idot,
        dbar_ij,
        dbar_idot,
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// t statistic with the zero-variance conventions:
/// zero variance and zero mean gives 0; zero variance with a nonzero mean
/// marks a deterministically ordered pair (±∞).
fn studentize(mean: f64, var: f64) -> f64 {
    if var > 0.0 {
        mean / var.sqrt()
    } else if mean == 0.0 {
        0.0
    } else if mean > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Observed EPA statistics plus the bootstrap mean arrays they came from.
#[derive(Debug, Clone)]
pub struct EpaStatistics {
    /// model indices these statistics refer to (into the original loss matrix)
    pub models: Vec<usize>,
    pub dbar_ij: Vec<Vec<f64>>,
    pub var_ij: Vec<Vec<f64>>,
    pub t_ij: Vec<Vec<f64>>,
    pub dbar_idot: Vec<f64>,
    pub var_idot: Vec<f64>,
    pub t_idot: Vec<f64>,
    /// per-model bootstrap replicate means of the loss rows (k x B)
    pub boot_model_means: Vec<Vec<f64>>,
}

/// Shared per-run state: observed and bootstrap means over the full model set.
struct Workspace {
    /// observed mean pairwise differential, m x m
    dbar: Vec<Vec<f64>>,
    /// bootstrap variance of each pairwise mean differential, m x m
    var_ij: Vec<Vec<f64>>,
    /// bootstrap replicate means per model, m x B
    boot_lbar: Vec<Vec<f64>>,
    b: usize,
}

impl Workspace {
    fn build(lm: &LossMatrix, indices: &[Vec<u32>]) -> Workspace {
        let m = lm.n_models();
        let n = lm.n_obs();
        let b = indices.len();
        let nf = n as f64;

        // pairwise differential means computed from the differential series
        let mut dbar = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let mut acc = 0.0;
                let (ri, rj) = (lm.row(i), lm.row(j));
                for t in 0..n {
                    acc += ri[t] - rj[t];
                }
                dbar[i][j] = acc / nf;
                dbar[j][i] = -dbar[i][j];
            }
        }

        // replicate means per model; parallel over replicates, deterministic
        // because every replicate lands in its own slot
        let per_rep: Vec<Vec<f64>> = indices
            .par_iter()
            .map(|idx| {
                (0..m)
                    .map(|i| {
                        let row = lm.row(i);
                        idx.iter().map(|&t| row[t as usize]).sum::<f64>() / nf
                    })
                    .collect()
            })
            .collect();
        let mut boot_lbar = vec![vec![0.0; b]; m];
        for (rep, means) in per_rep.iter().enumerate() {
            for i in 0..m {
                boot_lbar[i][rep] = means[i];
            }
        }

        // bootstrap variances of the pairwise mean differentials
        let mut var_ij = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let mut acc = 0.0;
                for rep in 0..b {
                    let dev = (boot_lbar[i][rep] - boot_lbar[j][rep]) - dbar[i][j];
                    acc += dev * dev;
                }
                let v = acc / b as f64;
                var_ij[i][j] = v;
                var_ij[j][i] = v;
            }
        }

        Workspace {
            dbar,
            var_ij,
            boot_lbar,
            b,
        }
    }

    /// Average-differential means and bootstrap variances over a model subset.
    fn idot_quantities(&self, subset: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
        let k = subset.len();
        let km1 = (k - 1) as f64;
        let dbar_idot: Vec<f64> = subset
            .iter()
            .map(|&i| {
                subset
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| self.dbar[i][j])
                    .sum::<f64>()
                    / km1
            })
            .collect();

        // replicate average differential per model: summing the pairwise
        // replicate-mean differences keeps degenerate cases exactly zero
        let mut boot_idot = vec![vec![0.0; self.b]; k];
        for rep in 0..self.b {
            for (pos, &i) in subset.iter().enumerate() {
                let li = self.boot_lbar[i][rep];
                let mut acc = 0.0;
                for &j in subset {
                    if j != i {
                        acc += li - self.boot_lbar[j][rep];
                    }
                }
                boot_idot[pos][rep] = acc / km1;
            }
        }
        let var_idot: Vec<f64> = (0..k)
            .map(|pos| {
                let mut acc = 0.0;
                for rep in 0..self.b {
                    let dev = boot_idot[pos][rep] - dbar_idot[pos];
                    acc += dev * dev;
                }
                acc / self.b as f64
            })
            .collect();
        (dbar_idot, var_idot, boot_idot)
    }

    fn statistics(&self, subset: &[usize]) -> EpaStatistics {
        let k = subset.len();
        let mut dbar_ij = vec![vec![0.0; k]; k];
        let mut var_ij = vec![vec![0.0; k]; k];
        let mut t_ij = vec![vec![0.0; k]; k];
        for (a, &i) in subset.iter().enumerate() {
            for (c, &j) in subset.iter().enumerate() {
                if a == c {
                    continue;
                }
                dbar_ij[a][c] = self.dbar[i][j];
                var_ij[a][c] = self.var_ij[i][j];
                t_ij[a][c] = studentize(self.dbar[i][j], self.var_ij[i][j]);
            }
        }
        let (dbar_idot, var_idot, _) = self.idot_quantities(subset);
        let t_idot: Vec<f64> = dbar_idot
            .iter()
            .zip(&var_idot)
            .map(|(&m, &v)| studentize(m, v))
            .collect();
        let boot_model_means: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| self.boot_lbar[i].clone())
            .collect();
        EpaStatistics {
            models: subset.to_vec(),
            dbar_ij,
            var_ij,
            t_ij,
            dbar_idot,
            var_idot,
            t_idot,
            boot_model_means,
        }
    }

    /// Observed statistic and bootstrap p-value on a subset.
    fn test(&self, subset: &[usize], statistic: McsStatistic) -> (f64, f64) {
        let k = subset.len();
        match statistic {
            McsStatistic::TR => {
                let mut observed = 0.0_f64;
                for (a, &i) in subset.iter().enumerate() {
                    for &j in subset.iter().skip(a + 1) {
                        observed = observed.max(studentize(self.dbar[i][j], self.var_ij[i][j]).abs());
                    }
                }
                let mut exceed = 0usize;
                for rep in 0..self.b {
                    let mut t_star = 0.0_f64;
                    for (a, &i) in subset.iter().enumerate() {
                        for &j in subset.iter().skip(a + 1) {
                            let v = self.var_ij[i][j];
                            if v > 0.0 {
                                let dev = (self.boot_lbar[i][rep] - self.boot_lbar[j][rep])
                                    - self.dbar[i][j];
                                t_star = t_star.max((dev / v.sqrt()).abs());
                            }
                        }
                    }
                    if t_star >= observed {
                        exceed += 1;
                    }
                }
                (observed, exceed as f64 / self.b as f64)
            }
            McsStatistic::Tmax => {
                let (dbar_idot, var_idot, boot_idot) = self.idot_quantities(subset);
                let observed = dbar_idot
                    .iter()
                    .zip(&var_idot)
                    .map(|(&m, &v)| studentize(m, v))
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut exceed = 0usize;
                for rep in 0..self.b {
                    let mut t_star = f64::NEG_INFINITY;
                    for pos in 0..k {
                        let v = var_idot[pos];
                        let t = if v > 0.0 {
                            (boot_idot[pos][rep] - dbar_idot[pos]) / v.sqrt()
                        } else {
                            0.0
                        };
                        t_star = t_star.max(t);
                    }
                    if t_star >= observed {
                        exceed += 1;
                    }
                }
                (observed, exceed as f64 / self.b as f64)
            }
        }
    }
}

/// EPA statistics over the full model set for externally supplied indices.
pub fn epa_statistics(lm: &LossMatrix, indices: &[Vec<u32>]) -> Result<EpaStatistics> {
    validate_matrix_for_mcs(lm)?;
    if indices.is_empty() {
        return Err(Error::InvalidInput("no bootstrap index sets supplied".into()));
    }
    let ws = Workspace::build(lm, indices);
    let subset: Vec<usize> = (0..lm.n_models()).collect();
    Ok(ws.statistics(&subset))
}

/// Outcome of a single EPA test on the full model set.
#[derive(Debug, Clone)]
pub struct EpaTest {
    pub statistic_value: f64,
    pub p_value: f64,
    pub block_length: usize,
    pub statistics: EpaStatistics,
}

/// One-shot EPA test (no elimination) under `config`.
pub fn epa_test(lm: &LossMatrix, config: &McsConfig) -> Result<EpaTest> {
    config.validate()?;
    validate_matrix_for_mcs(lm)?;
    let block_length = resolve_block_length(lm, config)?.0;
    let indices = bootstrap_indices(lm.n_obs(), config.b, block_length, config.seed)?;
    let ws = Workspace::build(lm, &indices);
    let subset: Vec<usize> = (0..lm.n_models()).collect();
    let (value, p) = ws.test(&subset, config.statistic);
    Ok(EpaTest {
        statistic_value: value,
        p_value: p,
        block_length,
        statistics: ws.statistics(&subset),
    })
}

/// Elimination rules: the model with the largest studentized relative loss.
///
/// Ties break toward the smallest model index, which keeps reruns
/// deterministic.
pub fn eliminate_worst(stats: &EpaStatistics, statistic: McsStatistic) -> usize {
    let k = stats.models.len();
    debug_assert!(k >= 2);
    let score = |pos: usize| -> f64 {
        match statistic {
            McsStatistic::TR => (0..k)
                .filter(|&j| j != pos)
                .map(|j| stats.t_ij[pos][j])
                .fold(f64::NEG_INFINITY, f64::max),
            McsStatistic::Tmax => stats.t_idot[pos],
        }
    };
    let mut worst = 0usize;
    let mut worst_score = score(0);
    for pos in 1..k {
        let s = score(pos);
        if s > worst_score {
            worst = pos;
            worst_score = s;
        }
    }
    stats.models[worst]
}

fn validate_matrix_for_mcs(lm: &LossMatrix) -> Result<()> {
    if lm.n_models() < 2 {
        return Err(Error::InvalidInput(
            "the MCS procedure needs at least 2 models".into(),
        ));
    }
    if lm.n_obs() < 10 {
        return Err(Error::InvalidInput(format!(
            "the bootstrap needs at least 10 observations (got {})",
            lm.n_obs()
        )));
    }
    Ok(())
}

fn resolve_block_length(
    lm: &LossMatrix,
    config: &McsConfig,
) -> Result<(usize, Option<BlockLengthSelection>)> {
    match config.block_length {
        Some(p) => {
            if p > lm.n_obs() {
                return Err(Error::InvalidInput(format!(
                    "block length {p} exceeds sample size {}",
                    lm.n_obs()
                )));
            }
            Ok((p, None))
        }
        None => {
            let sel = select_block_length(lm)?;
            Ok((sel.block_length, Some(sel)))
        }
    }
}

/// Per-survivor row of the report.
#[derive(Debug, Clone, Serialize)]
pub struct SsmModelReport {
    pub model: String,
    pub rank_r: usize,
    pub t_r: f64,
    pub p_value_r: f64,
    pub rank_max: usize,
    pub t_max: f64,
    pub p_value_max: f64,
    pub avg_loss: f64,
}

/// One elimination event.
#[derive(Debug, Clone, Serialize)]
pub struct EliminationStep {
    pub step: usize,
    pub model: String,
    pub statistic_value: f64,
    /// raw bootstrap p-value of the step's EPA test
    pub p_value_raw: f64,
    /// running maximum of the step p-values (the MCS p-value)
    pub p_value_mcs: f64,
}

/// Result of the sequential MCS procedure.
#[derive(Debug, Clone, Serialize)]
pub struct SsmResult {
    pub statistic: McsStatistic,
    pub alpha: f64,
    pub b: usize,
    pub block_length: usize,
    pub seed: u64,
    pub block_length_diagnostics: Option<BlockLengthSelection>,
    /// survivors ordered by their rank under the configured statistic
    pub survivors: Vec<SsmModelReport>,
    /// eliminated models in elimination order
    pub eliminated: Vec<EliminationStep>,
    /// MCS p-value shared by the surviving set
    pub survivor_p_value: f64,
}

impl SsmResult {
    pub fn survivor_names(&self) -> Vec<&str> {
        self.survivors.iter().map(|r| r.model.as_str()).collect()
    }

    pub fn elimination_order(&self) -> Vec<&str> {
        self.eliminated.iter().map(|e| e.model.as_str()).collect()
    }

    /// Survivor table CSV: one row per surviving model.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        w.write_record([
            "model",
            "rank_R",
            "t_R",
            "p_value_R",
            "rank_max",
            "t_max",
            "p_value_max",
            "avg_loss_x1000",
        ])
        .and_then(|_| {
            for r in &self.survivors {
                w.write_record([
                    r.model.clone(),
                    r.rank_r.to_string(),
                    format!("{:.6}", r.t_r),
                    format!("{:.6}", r.p_value_r),
                    r.rank_max.to_string(),
                    format!("{:.6}", r.t_max),
                    format!("{:.6}", r.p_value_max),
                    format!("{:.6}", r.avg_loss * 1000.0),
                ])?;
            }
            w.flush()?;
            Ok(())
        })
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
    }

    /// Structured report with the full elimination trace.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("serialize SSM report: {e}")))?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Run the full sequential procedure.
///
/// The block length is chosen once on the initial model set and held fixed;
/// statistics and bootstrap variances are recomputed on the surviving set at
/// every step, reusing one shared set of bootstrap indices derived from the
/// seed.
pub fn run_mcs(lm: &LossMatrix, config: &McsConfig) -> Result<SsmResult> {
    config.validate()?;
    validate_matrix_for_mcs(lm)?;
    let (block_length, diagnostics) = resolve_block_length(lm, config)?;
    let indices = bootstrap_indices(lm.n_obs(), config.b, block_length, config.seed)?;
    let ws = Workspace::build(lm, &indices);

    let mut survivors: Vec<usize> = (0..lm.n_models()).collect();
    let mut eliminated = Vec::new();
    let mut running_max = 0.0_f64;
    let survivor_p;

    loop {
        if survivors.len() == 1 {
            // the survivor set is never empty; a single remaining model is
            // kept with p-value 1
            survivor_p = 1.0;
            break;
        }
        let (value, p_raw) = ws.test(&survivors, config.statistic);
        running_max = running_max.max(p_raw);
        if p_raw > config.alpha {
            survivor_p = running_max.min(1.0);
            break;
        }
        let stats = ws.statistics(&survivors);
        let worst = eliminate_worst(&stats, config.statistic);
        eliminated.push(EliminationStep {
            step: eliminated.len() + 1,
            model: lm.model_names()[worst].clone(),
            statistic_value: value,
            p_value_raw: p_raw,
            p_value_mcs: running_max,
        });
        survivors.retain(|&i| i != worst);
    }

    // final-set statistics for the report columns
    let stats = ws.statistics(&survivors);
    let k = survivors.len();
    let t_r: Vec<f64> = (0..k)
        .map(|pos| {
            if k == 1 {
                0.0
            } else {
                (0..k)
                    .filter(|&j| j != pos)
                    .map(|j| stats.t_ij[pos][j])
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect();
    let t_max = stats.t_idot.clone();

    // the non-selected statistic's p-value column reports the EPA test on the
    // final set under that statistic
    let (p_r, p_max) = if k == 1 {
        (1.0, 1.0)
    } else {
        let other = match config.statistic {
            McsStatistic::TR => McsStatistic::Tmax,
            McsStatistic::Tmax => McsStatistic::TR,
        };
        let (_, p_other) = ws.test(&survivors, other);
        match config.statistic {
            McsStatistic::TR => (survivor_p, p_other),
            McsStatistic::Tmax => (p_other, survivor_p),
        }
    };

    let rank_of = |values: &[f64]| -> Vec<usize> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let mut ranks = vec![0usize; values.len()];
        for (rank, &pos) in order.iter().enumerate() {
            ranks[pos] = rank + 1;
        }
        ranks
    };
    let rank_r = rank_of(&t_r);
    let rank_max = rank_of(&t_max);

    let mut rows: Vec<SsmModelReport> = (0..k)
        .map(|pos| SsmModelReport {
            model: lm.model_names()[survivors[pos]].clone(),
            rank_r: rank_r[pos],
            t_r: t_r[pos],
            p_value_r: p_r,
            rank_max: rank_max[pos],
            t_max: t_max[pos],
            p_value_max: p_max,
            avg_loss: lm.mean_loss(survivors[pos]),
        })
        .collect();
    rows.sort_by_key(|r| match config.statistic {
        McsStatistic::TR => r.rank_r,
        McsStatistic::Tmax => r.rank_max,
    });

    Ok(SsmResult {
        statistic: config.statistic,
        alpha: config.alpha,
        b: config.b,
        block_length,
        seed: config.seed,
        block_length_diagnostics: diagnostics,
        survivors: rows,
        eliminated,
        survivor_p_value: survivor_p,
    })
}
