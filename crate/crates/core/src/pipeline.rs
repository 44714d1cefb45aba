//! End-to-end driver: ingestion, rolling forecasts, loss matrix, MCS,
//! combination and backtests, with a reproducibility manifest.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::lossfn::{build_loss_matrix, LossMatrix};
use crate::market_data::{load_returns, split_sample, summary_statistics, ReturnSeries, SummaryStats};
use crate::mcs::{run_mcs, McsConfig, SsmResult};
use crate::riskeval::{
    backtest, combine_var_average, combine_var_dynamic, rolling_var_forecast, write_backtest_csv,
    BacktestRow, ForecastPanel,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Reproducibility record written at the end of a pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub seed: u64,
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub name: String,
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Write the summary-statistics table (one row per sample section).
pub fn write_stats_csv(rows: &[(String, SummaryStats)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    w.write_record([
        "series",
        "n",
        "min",
        "max",
        "mean",
        "std_dev",
        "skewness",
        "kurtosis",
        "quantile_level",
        "quantile",
        "JB",
    ])
    .and_then(|_| {
        for (name, s) in rows {
            w.write_record([
                name.clone(),
                s.n.to_string(),
                format!("{:.6}", s.min),
                format!("{:.6}", s.max),
                format!("{:.6}", s.mean),
                format!("{:.6}", s.std_dev),
                format!("{:.6}", s.skewness),
                format!("{:.6}", s.kurtosis),
                format!("{}", s.quantile_level),
                format!("{:.6}", s.quantile),
                format!("{:.6}", s.jb),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
    .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
}

fn write_combined_csv(
    panel: &ForecastPanel,
    avg: &[f64],
    dynamic: &[f64],
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    w.write_record(["date", "realized", "var_avg", "var_dyn"])
        .and_then(|_| {
            for k in 0..panel.n_obs() {
                w.write_record([
                    panel.dates[k].format("%Y-%m-%d").to_string(),
                    format!("{:.17e}", panel.realized[k]),
                    format!("{:.17e}", avg[k]),
                    format!("{:.17e}", dynamic[k]),
                ])?;
            }
            w.flush()?;
            Ok(())
        })
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
}

/// Filenames produced by the pipeline, relative to the output directory.
pub const STATS_FILE: &str = "summary_stats.csv";
pub const PANEL_FILE: &str = "forecast_panel.csv";
pub const LOSS_FILE: &str = "loss_matrix.csv";
pub const SSM_CSV_FILE: &str = "ssm_report.csv";
pub const SSM_JSON_FILE: &str = "ssm_report.json";
pub const COMBINED_FILE: &str = "combined_var.csv";
pub const BACKTEST_FILE: &str = "backtest.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything a full run leaves behind.
#[derive(Debug)]
pub struct PipelineOutput {
    pub output_dir: PathBuf,
    pub ssm: SsmResult,
    pub backtests: Vec<BacktestRow>,
    pub manifest: Manifest,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| {
        log::error!("stage `{name}` failed: {e}");
        match e {
            Error::InvalidInput(msg) => Error::InvalidInput(format!("stage `{name}`: {msg}")),
            Error::Config(msg) => Error::Config(format!("stage `{name}`: {msg}")),
            Error::Numerical(msg) => Error::Numerical(format!("stage `{name}`: {msg}")),
            Error::NoConvergence(msg) => Error::NoConvergence(format!("stage `{name}`: {msg}")),
            Error::Constraint(msg) => Error::Constraint(format!("stage `{name}`: {msg}")),
            other => other,
        }
    })
}

/// Run the whole experiment described by a config.
///
/// Artifacts are written as soon as each stage finishes, so a failing stage
/// leaves the earlier outputs in place. The manifest ties the run to the
/// config hash and seed; reruns with the same config produce byte-identical
/// artifacts.
pub fn run_pipeline(config: &RunConfig, config_path: Option<&Path>) -> Result<PipelineOutput> {
    run_pipeline_to(config, config_path, None)
}

/// [`run_pipeline`] with the output directory overridden; artifact bytes
/// depend only on the config contents and seed, never on the directory.
pub fn run_pipeline_to(
    config: &RunConfig,
    config_path: Option<&Path>,
    output_override: Option<&Path>,
) -> Result<PipelineOutput> {
    config.validate()?;
    let out_dir: &Path = output_override.unwrap_or(&config.run.output_dir);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let config_sha256 = match config_path {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
            sha256_hex(&bytes)
        }
        None => sha256_hex(
            serde_json::to_string(config)
                .map_err(|e| Error::Config(format!("serialize config: {e}")))?
                .as_bytes(),
        ),
    };

    // 1. data and summary statistics
    log::info!("stage `stats`: loading {}", config.data.path.display());
    let returns = stage("stats", load_returns(&config.data.path))?;
    let (in_sample, out_of_sample) = stage(
        "stats",
        split_sample(&returns, config.data.out_of_sample),
    )?;
    let stats_rows = vec![
        (
            "in_sample".to_string(),
            stage("stats", summary_statistics(&in_sample, config.run.tau))?,
        ),
        (
            "out_of_sample".to_string(),
            stage("stats", summary_statistics(&out_of_sample, config.run.tau))?,
        ),
    ];
    stage("stats", write_stats_csv(&stats_rows, &out_dir.join(STATS_FILE)))?;

    // 2. rolling one-step-ahead forecasts
    let models = config.model_specs()?;
    log::info!(
        "stage `forecast`: {} models x {} evaluation points",
        models.len(),
        config.data.out_of_sample
    );
    let panel = stage(
        "forecast",
        rolling_var_forecast(&models, &returns, &config.rolling_config()),
    )?;
    stage("forecast", panel.write_csv(&out_dir.join(PANEL_FILE)))?;

    // 3. loss matrix
    log::info!("stage `loss`");
    let loss_kind = config.loss_kind()?;
    let loss_matrix = stage(
        "loss",
        build_loss_matrix(
            &panel.realized,
            &panel.model_names,
            &panel.forecasts,
            loss_kind,
        ),
    )?;
    stage("loss", loss_matrix.write_csv(&out_dir.join(LOSS_FILE)))?;

    // 4. model confidence set
    log::info!("stage `mcs`");
    let mcs_config = config.mcs_config()?;
    let ssm = stage("mcs", run_mcs(&loss_matrix, &mcs_config))?;
    stage("mcs", ssm.write_csv(&out_dir.join(SSM_CSV_FILE)))?;
    stage("mcs", ssm.write_json(&out_dir.join(SSM_JSON_FILE)))?;
    log::info!(
        "stage `mcs`: {} of {} models survive at alpha = {}",
        ssm.survivors.len(),
        panel.n_models(),
        mcs_config.alpha
    );

    // 5. combination: the plain average pools every model, the dynamic rule
    // pools the survivors
    log::info!("stage `combine`");
    let avg = stage("combine", combine_var_average(&panel))?;
    let survivor_names: Vec<String> = ssm.survivors.iter().map(|r| r.model.clone()).collect();
    let survivor_panel = subset_panel(&panel, &survivor_names)?;
    let (dynamic, _weights) = stage(
        "combine",
        combine_var_dynamic(
            &survivor_panel,
            config.combination.eta,
            config.combination.lambda,
        ),
    )?;
    stage(
        "combine",
        write_combined_csv(&panel, &avg, &dynamic, &out_dir.join(COMBINED_FILE)),
    )?;

    // 6. backtests
    log::info!("stage `backtest`");
    let backtests = vec![
        stage(
            "backtest",
            backtest("VaR_Dyn", &panel.realized, &dynamic, config.run.tau),
        )?,
        stage(
            "backtest",
            backtest("VaR_Avg", &panel.realized, &avg, config.run.tau),
        )?,
    ];
    stage(
        "backtest",
        write_backtest_csv(&backtests, &out_dir.join(BACKTEST_FILE)),
    )?;

    // 7. manifest
    let mut artifacts = Vec::new();
    for name in [
        STATS_FILE,
        PANEL_FILE,
        LOSS_FILE,
        SSM_CSV_FILE,
        SSM_JSON_FILE,
        COMBINED_FILE,
        BACKTEST_FILE,
    ] {
        artifacts.push(ArtifactRecord {
            name: name.to_string(),
            sha256: hash_file(&out_dir.join(name))?,
        });
    }
    let manifest = Manifest {
        config_sha256,
        seed: config.run.seed,
        artifacts,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Numerical(format!("serialize manifest: {e}")))?;
    std::fs::write(out_dir.join(MANIFEST_FILE), manifest_json)
        .map_err(|e| Error::io(&out_dir.join(MANIFEST_FILE), e))?;

    Ok(PipelineOutput {
        output_dir: out_dir.to_path_buf(),
        ssm,
        backtests,
        manifest,
    })
}

fn subset_panel(panel: &ForecastPanel, names: &[String]) -> Result<ForecastPanel> {
    let mut forecasts = Vec::with_capacity(names.len());
    let mut kept = Vec::with_capacity(names.len());
    for name in names {
        let idx = panel
            .model_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidInput(format!("model `{name}` not in panel")))?;
        kept.push(name.clone());
        forecasts.push(panel.forecasts[idx].clone());
    }
    Ok(ForecastPanel {
        model_names: kept,
        forecasts,
        realized: panel.realized.clone(),
        dates: panel.dates.clone(),
        tau: panel.tau,
    })
}

/// The standalone MCS entry point: loss-matrix CSV in, SSM reports out.
pub fn run_mcs_on_csv(
    loss_csv: &Path,
    mcs_config: &McsConfig,
    out_csv: &Path,
    out_json: &Path,
) -> Result<SsmResult> {
    let matrix = LossMatrix::read_csv(loss_csv)?;
    let ssm = run_mcs(&matrix, mcs_config)?;
    ssm.write_csv(out_csv)?;
    ssm.write_json(out_json)?;
    Ok(ssm)
}

/// Re-export for CLI stats output reuse.
pub fn compute_split_stats(
    returns: &ReturnSeries,
    out_of_sample: Option<usize>,
    tau: f64,
) -> Result<Vec<(String, SummaryStats)>> {
    match out_of_sample {
        Some(n) => {
            let (ins, oos) = split_sample(returns, n)?;
            Ok(vec![
                ("in_sample".to_string(), summary_statistics(&ins, tau)?),
                ("out_of_sample".to_string(), summary_statistics(&oos, tau)?),
            ])
        }
        None => Ok(vec![(
            "full_sample".to_string(),
            summary_statistics(returns, tau)?,
        )]),
    }
}
