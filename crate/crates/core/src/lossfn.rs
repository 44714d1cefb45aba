//! Loss functions and loss-matrix construction for model comparison.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default smoothness for the differentiable VaR loss.
pub const DEFAULT_DELTA: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarLossType {
    Normal,
    Differentiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VolLossWhich {
    Se1,
    Se2,
    Qlike,
    R2Log,
    Ae1,
    Ae2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LevelLossWhich {
    Se,
    Ae,
}

/// Which loss feeds the loss matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum LossKind {
    Var {
        tau: f64,
        which: VarLossType,
        /// smoothness of the differentiable variant; ignored for `normal`
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Vol {
        which: VolLossWhich,
    },
    Level {
        which: LevelLossWhich,
    },
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

/// Asymmetric VaR loss (τ - d_t)(y_t - VaR_t) with d_t = 1(y_t < VaR_t),
/// or its differentiable variant with m_δ(a,b) = [1 + exp(δ(a-b))]^{-1}.
pub fn loss_var(
    realized: &[f64],
    evaluated: &[f64],
    tau: f64,
    which: VarLossType,
    delta: f64,
) -> Result<Vec<f64>> {
    if realized.len() != evaluated.len() {
        return Err(Error::InvalidInput(format!(
            "realized ({}) and evaluated ({}) length mismatch",
            realized.len(),
            evaluated.len()
        )));
    }
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::InvalidInput(format!("tau {tau} outside (0,1)")));
    }
    if which == VarLossType::Differentiable && delta <= 0.0 {
        return Err(Error::InvalidInput(format!("delta {delta} must be > 0")));
    }
    Ok(realized
        .iter()
        .zip(evaluated)
        .map(|(&y, &v)| match which {
            VarLossType::Normal => {
                let d = if y < v { 1.0 } else { 0.0 };
                (tau - d) * (y - v)
            }
            VarLossType::Differentiable => {
                let m = 1.0 / (1.0 + (delta * (y - v)).exp());
                (tau - m) * (y - v)
            }
        })
        .collect())
}

/// Volatility forecast losses; inputs are standard-deviation measures.
pub fn loss_vol(realized: &[f64], evaluated: &[f64], which: VolLossWhich) -> Result<Vec<f64>> {
    if realized.len() != evaluated.len() {
        return Err(Error::InvalidInput(format!(
            "realized ({}) and evaluated ({}) length mismatch",
            realized.len(),
            evaluated.len()
        )));
    }
    let needs_positive = matches!(which, VolLossWhich::Qlike | VolLossWhich::R2Log);
    realized
        .iter()
        .zip(evaluated)
        .enumerate()
        .map(|(t, (&rv, &ev))| {
            if needs_positive && (rv <= 0.0 || ev <= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "non-positive volatility at index {t} for a log/ratio loss"
                )));
            }
            Ok(match which {
                VolLossWhich::Se1 => (rv - ev).powi(2),
                VolLossWhich::Se2 => (rv * rv - ev * ev).powi(2),
                VolLossWhich::Qlike => (ev * ev).ln() + rv * rv / (ev * ev),
                VolLossWhich::R2Log => ((rv * rv) / (ev * ev)).ln().powi(2),
                VolLossWhich::Ae1 => (rv - ev).abs(),
                VolLossWhich::Ae2 => (rv * rv - ev * ev).abs(),
            })
        })
        .collect()
}

/// Squared or absolute error on level forecasts.
pub fn loss_level(realized: &[f64], evaluated: &[f64], which: LevelLossWhich) -> Result<Vec<f64>> {
    if realized.len() != evaluated.len() {
        return Err(Error::InvalidInput(format!(
            "realized ({}) and evaluated ({}) length mismatch",
            realized.len(),
            evaluated.len()
        )));
    }
    Ok(realized
        .iter()
        .zip(evaluated)
        .map(|(&y, &f)| match which {
            LevelLossWhich::Se => (y - f).powi(2),
            LevelLossWhich::Ae => (y - f).abs(),
        })
        .collect())
}

/// Per-model per-time losses: the sole input of the MCS procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    model_names: Vec<String>,
    /// m rows, n columns
    losses: Vec<Vec<f64>>,
}

impl LossMatrix {
    /// Build from rows; every entry must be finite and rows equally long.
    pub fn new(model_names: Vec<String>, losses: Vec<Vec<f64>>) -> Result<Self> {
        if model_names.len() != losses.len() {
            return Err(Error::InvalidInput(format!(
                "{} model names for {} loss rows",
                model_names.len(),
                losses.len()
            )));
        }
        if losses.is_empty() {
            return Err(Error::InvalidInput("empty loss matrix".into()));
        }
        let n = losses[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("loss matrix has zero columns".into()));
        }
        for (i, row) in losses.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "loss row for model `{}` has length {} (expected {n})",
                    model_names[i],
                    row.len()
                )));
            }
            if let Some(t) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite loss for model `{}` at time {t}",
                    model_names[i]
                )));
            }
        }
        Ok(LossMatrix {
            model_names,
            losses,
        })
    }

    pub fn n_models(&self) -> usize {
        self.losses.len()
    }

    pub fn n_obs(&self) -> usize {
        self.losses[0].len()
    }

    pub fn model_names(&self) -> &[String] {
        &self.model_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.losses[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.losses
    }

    pub fn mean_loss(&self, i: usize) -> f64 {
        self.losses[i].iter().sum::<f64>() / self.n_obs() as f64
    }

    /// Write as CSV: header `model,t1..tn`, then one row per model.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| {
            Error::io(path, std::io::Error::other(e.to_string()))
        })?;
        let mut header = vec!["model".to_string()];
        header.extend((1..=self.n_obs()).map(|t| format!("t{t}")));
        writer
            .write_record(&header)
            .and_then(|_| {
                for (name, row) in self.model_names.iter().zip(&self.losses) {
                    let mut record = vec![name.clone()];
                    record.extend(row.iter().map(|v| format!("{v:.17e}")));
                    writer.write_record(&record)?;
                }
                writer.flush()?;
                Ok(())
            })
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
    }

    /// Read back the CSV format produced by [`LossMatrix::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::InvalidInput(format!("cannot read CSV header: {e}")))?;
        if headers.get(0).map(|h| h.eq_ignore_ascii_case("model")) != Some(true) {
            return Err(Error::InvalidInput(format!(
                "{}: first column of a loss matrix CSV must be `model`",
                path.display()
            )));
        }
        let mut names = Vec::new();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row_no = i + 1;
            let record = record.map_err(|e| Error::CsvRow {
                row: row_no,
                message: e.to_string(),
            })?;
            let name = record
                .get(0)
                .ok_or_else(|| Error::CsvRow {
                    row: row_no,
                    message: "missing model name".into(),
                })?
                .to_string();
            let mut row = Vec::with_capacity(record.len().saturating_sub(1));
            for field in record.iter().skip(1) {
                let v: f64 = field.parse().map_err(|e| Error::CsvRow {
                    row: row_no,
                    message: format!("bad number `{field}`: {e}"),
                })?;
                row.push(v);
            }
            names.push(name);
            rows.push(row);
        }
        LossMatrix::new(names, rows)
    }
}

/// Apply `kind` to every model column of a forecast panel.
///
/// `forecasts[i]` is model i's forecast series aligned to `realized`.
pub fn build_loss_matrix(
    realized: &[f64],
    model_names: &[String],
    forecasts: &[Vec<f64>],
    kind: LossKind,
) -> Result<LossMatrix> {
    if model_names.len() != forecasts.len() {
        return Err(Error::InvalidInput(format!(
            "{} names for {} forecast columns",
            model_names.len(),
            forecasts.len()
        )));
    }
    let mut rows = Vec::with_capacity(forecasts.len());
    for (name, column) in model_names.iter().zip(forecasts) {
        let row = match kind {
            LossKind::Var { tau, which, delta } => loss_var(realized, column, tau, which, delta),
            LossKind::Vol { which } => loss_vol(realized, column, which),
            LossKind::Level { which } => loss_level(realized, column, which),
        }
        .map_err(|e| Error::InvalidInput(format!("model `{name}`: {e}")))?;
        if let Some(t) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite loss for model `{name}` at time {t}"
            )));
        }
        rows.push(row);
    }
    LossMatrix::new(model_names.to_vec(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn var_loss_hand_values() {
        let l = loss_var(&[-3.0], &[-2.0], 0.05, VarLossType::Normal, 0.0).unwrap();
        assert_relative_eq!(l[0], 0.95, epsilon = 1e-12);
        let l = loss_var(&[1.0], &[-2.0], 0.05, VarLossType::Normal, 0.0).unwrap();
        assert_relative_eq!(l[0], 0.15, epsilon = 1e-12);
    }

    #[test]
    fn var_loss_nonnegative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let y = rng.gen_range(-5.0..5.0);
            let v = rng.gen_range(-5.0..5.0);
            let l = loss_var(&[y], &[v], 0.05, VarLossType::Normal, 0.0).unwrap()[0];
            assert!(l >= 0.0);
        }
    }

    #[test]
    fn differentiable_loss_at_equality_is_zero() {
        let l = loss_var(&[1.5], &[1.5], 0.05, VarLossType::Differentiable, 25.0).unwrap();
        assert_eq!(l[0], 0.0);
    }

    #[test]
    fn differentiable_approaches_normal_for_large_delta() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut sup_gap: f64 = 0.0;
        for _ in 0..500 {
            let y: f64 = rng.gen_range(-5.0..5.0);
            let mut v: f64 = rng.gen_range(-5.0..5.0);
            // keep pairs bounded away from the kink
            if (y - v).abs() < 0.01 {
                v += 0.02_f64.copysign(v - y);
            }
            let normal = loss_var(&[y], &[v], 0.05, VarLossType::Normal, 0.0).unwrap()[0];
            let smooth =
                loss_var(&[y], &[v], 0.05, VarLossType::Differentiable, 1e4).unwrap()[0];
            sup_gap = sup_gap.max((normal - smooth).abs());
        }
        assert!(sup_gap <= 1e-3, "sup gap {sup_gap}");
    }

    #[test]
    fn vol_loss_hand_values() {
        assert_relative_eq!(
            loss_vol(&[1.2], &[1.0], VolLossWhich::Se1).unwrap()[0],
            0.04,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            loss_vol(&[1.0], &[1.0], VolLossWhich::Qlike).unwrap()[0],
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(loss_vol(&[0.7], &[0.7], VolLossWhich::Ae2).unwrap()[0], 0.0);
    }

    #[test]
    fn vol_losses_zero_iff_equal() {
        let kinds = [
            VolLossWhich::Se1,
            VolLossWhich::Se2,
            VolLossWhich::R2Log,
            VolLossWhich::Ae1,
            VolLossWhich::Ae2,
        ];
        for which in kinds {
            assert_eq!(loss_vol(&[0.9], &[0.9], which).unwrap()[0], 0.0);
            assert!(loss_vol(&[0.9], &[1.1], which).unwrap()[0] > 0.0);
        }
    }

    #[test]
    fn vol_loss_rejects_nonpositive_for_log_kinds() {
        assert!(loss_vol(&[0.0], &[1.0], VolLossWhich::Qlike).is_err());
        assert!(loss_vol(&[1.0], &[0.0], VolLossWhich::R2Log).is_err());
        // SE/AE have no positivity requirement
        assert!(loss_vol(&[0.0], &[1.0], VolLossWhich::Se1).is_ok());
    }

    #[test]
    fn level_loss_hand_values() {
        assert_eq!(loss_level(&[2.0], &[2.0], LevelLossWhich::Se).unwrap()[0], 0.0);
        assert_eq!(loss_level(&[3.0], &[1.0], LevelLossWhich::Se).unwrap()[0], 4.0);
        assert_eq!(loss_level(&[3.0], &[1.0], LevelLossWhich::Ae).unwrap()[0], 2.0);
    }

    #[test]
    fn matrix_single_perfect_model_is_zero_row() {
        let realized = vec![1.0, -0.5, 0.25];
        let m = build_loss_matrix(
            &realized,
            &["perfect".to_string()],
            std::slice::from_ref(&realized),
            LossKind::Level {
                which: LevelLossWhich::Se,
            },
        )
        .unwrap();
        assert_eq!(m.row(0), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn matrix_identical_models_identical_rows() {
        let realized = vec![1.0, -0.5, 0.25, 2.0];
        let col = vec![-1.0, -1.2, -0.8, -1.1];
        let m = build_loss_matrix(
            &realized,
            &["a".to_string(), "b".to_string()],
            &[col.clone(), col],
            LossKind::Var {
                tau: 0.05,
                which: VarLossType::Normal,
                delta: DEFAULT_DELTA,
            },
        )
        .unwrap();
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn matrix_composition_matches_scalar_losses() {
        let realized = vec![0.3, -2.0, 1.0];
        let f1 = vec![-1.0, -1.5, -0.5];
        let f2 = vec![-2.0, -1.0, -2.5];
        let m = build_loss_matrix(
            &realized,
            &["m1".to_string(), "m2".to_string()],
            &[f1.clone(), f2.clone()],
            LossKind::Var {
                tau: 0.05,
                which: VarLossType::Normal,
                delta: DEFAULT_DELTA,
            },
        )
        .unwrap();
        for t in 0..3 {
            let l1 =
                loss_var(&realized[t..=t], &f1[t..=t], 0.05, VarLossType::Normal, 0.0).unwrap()[0];
            let l2 =
                loss_var(&realized[t..=t], &f2[t..=t], 0.05, VarLossType::Normal, 0.0).unwrap()[0];
            assert_eq!(m.row(0)[t], l1);
            assert_eq!(m.row(1)[t], l2);
        }
    }

    #[test]
    fn matrix_rejects_nonfinite_with_location() {
        let realized = vec![1.0, 1.0];
        // QLIKE with a zero forecast produces the rejection
        let err = build_loss_matrix(
            &realized,
            &["good".to_string(), "bad".to_string()],
            &[vec![1.0, 1.0], vec![1.0, 0.0]],
            LossKind::Vol {
                which: VolLossWhich::Qlike,
            },
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad"), "{msg}");
        assert!(msg.contains("index 1") || msg.contains("time 1"), "{msg}");
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loss.csv");
        let m = LossMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.1, 0.25, 1e-7], vec![0.5, 0.125, 2.0]],
        )
        .unwrap();
        m.write_csv(&path).unwrap();
        let back = LossMatrix::read_csv(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn quantile_consistency_small() {
        // the constant minimizer of the mean tick loss is the tau-quantile
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let sample: Vec<f64> = (0..20_000).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let tau = 0.25;
        let target = crate::numeric::empirical_quantile(&sample, tau);
        let mut best = (f64::INFINITY, f64::NAN);
        let mut c = -3.0;
        while c <= 3.0 {
            let mean: f64 = loss_var(&sample, &vec![c; sample.len()], tau, VarLossType::Normal, 0.0)
                .unwrap()
                .iter()
                .sum::<f64>()
                / sample.len() as f64;
            if mean < best.0 {
                best = (mean, c);
            }
            c += 0.005;
        }
        assert!(
            (best.1 - target).abs() <= 0.01,
            "grid minimizer {} vs quantile {}",
            best.1,
            target
        );
    }
}
