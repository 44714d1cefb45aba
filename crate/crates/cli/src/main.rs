//! Command line driver: ingestion, fitting, forecasting, losses, the MCS
//! procedure, combination and backtesting.
//!
//! Logs go to standard error; data artifacts go to files only. Exit codes:
//! 0 success, 2 input/parse failure, 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use varmcs_core::config::RunConfig;
use varmcs_core::error::{Error, ErrorClass};
use varmcs_core::lossfn::build_loss_matrix;
use varmcs_core::market_data::load_returns;
use varmcs_core::mcs::{McsConfig, McsStatistic};
use varmcs_core::pipeline::{
    compute_split_stats, run_mcs_on_csv, run_pipeline, write_stats_csv,
};
use varmcs_core::riskeval::{
    backtest, combine_var_average, combine_var_dynamic, rolling_var_forecast, write_backtest_csv,
    ForecastPanel,
};
use varmcs_core::volmodels::fit_vol_model;

#[derive(Parser)]
#[command(
    name = "varmcs",
    about = "Model Confidence Set comparisons of Value-at-Risk forecasting models",
    version
)]
struct Cli {
    /// worker threads (0 = rayon default); results are identical either way
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// only warnings and errors on stderr
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summary statistics of a price/return CSV
    Stats {
        /// CSV with `date` + (`price` | `return`) columns
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        /// also split off the last N observations and report both sections
        #[arg(long)]
        out_of_sample: Option<usize>,
        /// output CSV path
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit the configured volatility models on the in-sample window and
    /// export flat parameter files
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// fit only the named model
        #[arg(long)]
        model: Option<String>,
        /// directory for the .params.txt exports
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Rolling one-step-ahead VaR forecasts for the configured models
    Forecast {
        #[arg(long)]
        config: PathBuf,
        /// output panel CSV
        #[arg(long)]
        output: PathBuf,
    },
    /// Loss matrix from a forecast panel
    Loss {
        #[arg(long)]
        config: PathBuf,
        /// forecast panel CSV (from `forecast`)
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Model Confidence Set over a loss-matrix CSV
    Mcs(McsArgs),
    /// Combine panel forecasts into average and dynamic VaR series
    Combine {
        /// forecast panel CSV
        #[arg(long)]
        panel: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        #[arg(long, default_value_t = 10.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.99)]
        lambda: f64,
        /// restrict the dynamic rule to the survivors of this SSM report CSV
        #[arg(long)]
        ssm: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Backtest every VaR column of a CSV with date,realized,<series...>
    Backtest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run the whole experiment described by a config file
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct McsArgs {
    /// loss matrix CSV (first column `model`, then per-time losses)
    #[arg(long)]
    loss: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long = "B", alias = "b")]
    b: usize,
    /// TR or Tmax
    #[arg(long, default_value = "TR")]
    statistic: String,
    /// moving-block length; omitted = AR-based selection
    #[arg(long)]
    block_length: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// directory for ssm_report.csv and ssm_report.json
    #[arg(long)]
    output_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(
        env_logger::Env::default()
            .default_filter_or(if cli.quiet { "warn" } else { "info" }),
    )
    .target(env_logger::Target::Stderr)
    .init();

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            match e.class() {
                ErrorClass::Input => ExitCode::from(2),
                ErrorClass::Numerical => ExitCode::from(3),
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Stats {
            data,
            tau,
            out_of_sample,
            output,
        } => {
            let returns = load_returns(&data)?;
            let rows = compute_split_stats(&returns, out_of_sample, tau)?;
            write_stats_csv(&rows, &output)?;
            log::info!("wrote {}", output.display());
            Ok(())
        }
        Command::Fit {
            config,
            model,
            output_dir,
        } => {
            let cfg = RunConfig::load(&config)?;
            let returns = load_returns(&cfg.data.path)?;
            let window = returns.len().saturating_sub(cfg.data.out_of_sample);
            if window < 2 {
                return Err(Error::InvalidInput(
                    "no in-sample observations left after the split".into(),
                ));
            }
            let in_sample = returns.window(0, window);
            std::fs::create_dir_all(&output_dir).map_err(|e| Error::io(&output_dir, e))?;
            let optimizer = cfg.rolling_config().optimizer;
            let mut fitted_any = false;
            for (name, spec) in cfg.model_specs()? {
                if let Some(wanted) = &model {
                    if &name != wanted {
                        continue;
                    }
                }
                match spec {
                    varmcs_core::riskeval::ModelSpec::Garch(s) => {
                        let m = fit_vol_model(
                            &varmcs_core::volmodels::VolModelSpec::Garch(s),
                            &in_sample,
                            &optimizer,
                        )?;
                        write_flat(&output_dir, &name, &m.export_flat())?;
                    }
                    varmcs_core::riskeval::ModelSpec::Gas(s) => {
                        let m = fit_vol_model(
                            &varmcs_core::volmodels::VolModelSpec::Gas(s),
                            &in_sample,
                            &optimizer,
                        )?;
                        write_flat(&output_dir, &name, &m.export_flat())?;
                    }
                    varmcs_core::riskeval::ModelSpec::Caviar { variant, adaptive_g } => {
                        let mut cspec =
                            varmcs_core::caviar::CaviarSpec::new(variant, cfg.run.tau)?;
                        if let Some(g) = adaptive_g {
                            cspec = cspec.with_adaptive_g(g)?;
                        }
                        let fit = varmcs_core::caviar::caviar_fit(
                            &cspec,
                            &in_sample,
                            &cfg.rolling_config().caviar,
                        )?;
                        let mut flat = format!("model = {}\n", cspec.label());
                        for (i, b) in fit.params.beta.iter().enumerate() {
                            flat.push_str(&format!("beta{} = {:.12e}\n", i + 1, b));
                        }
                        flat.push_str(&format!("tick_loss = {:.12e}\n", fit.tick_loss));
                        write_flat(&output_dir, &name, &flat)?;
                    }
                }
                fitted_any = true;
                log::info!("fitted {name}");
            }
            if !fitted_any {
                return Err(Error::InvalidInput(format!(
                    "model `{}` not found in the config",
                    model.unwrap_or_default()
                )));
            }
            Ok(())
        }
        Command::Forecast { config, output } => {
            let cfg = RunConfig::load(&config)?;
            let returns = load_returns(&cfg.data.path)?;
            let panel = rolling_var_forecast(
                &cfg.model_specs()?,
                &returns,
                &cfg.rolling_config(),
            )?;
            panel.write_csv(&output)?;
            log::info!("wrote {}", output.display());
            Ok(())
        }
        Command::Loss {
            config,
            panel,
            output,
        } => {
            let cfg = RunConfig::load(&config)?;
            let panel = ForecastPanel::read_csv(&panel, cfg.run.tau)?;
            let matrix = build_loss_matrix(
                &panel.realized,
                &panel.model_names,
                &panel.forecasts,
                cfg.loss_kind()?,
            )?;
            matrix.write_csv(&output)?;
            log::info!("wrote {}", output.display());
            Ok(())
        }
        Command::Mcs(args) => {
            let statistic: McsStatistic = args.statistic.parse()?;
            let mcs_config = McsConfig {
                alpha: args.alpha,
                b: args.b,
                statistic,
                block_length: args.block_length,
                seed: args.seed,
            };
            std::fs::create_dir_all(&args.output_dir)
                .map_err(|e| Error::io(&args.output_dir, e))?;
            let ssm = run_mcs_on_csv(
                &args.loss,
                &mcs_config,
                &args.output_dir.join("ssm_report.csv"),
                &args.output_dir.join("ssm_report.json"),
            )?;
            log::info!(
                "{} survivors, {} eliminations; reports in {}",
                ssm.survivors.len(),
                ssm.eliminated.len(),
                args.output_dir.display()
            );
            Ok(())
        }
        Command::Combine {
            panel,
            tau,
            eta,
            lambda,
            ssm,
            output,
        } => {
            let panel = ForecastPanel::read_csv(&panel, tau)?;
            let avg = combine_var_average(&panel)?;
            let dyn_panel = match ssm {
                Some(path) => subset_from_ssm(&panel, &path)?,
                None => panel.clone(),
            };
            let (dynamic, _) = combine_var_dynamic(&dyn_panel, eta, lambda)?;
            let mut w = csv::Writer::from_path(&output)
                .map_err(|e| Error::io(&output, std::io::Error::other(e.to_string())))?;
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
                .map_err(|e| Error::io(&output, std::io::Error::other(e.to_string())))?;
            log::info!("wrote {}", output.display());
            Ok(())
        }
        Command::Backtest { input, tau, output } => {
            let panel = ForecastPanel::read_csv(&input, tau)?;
            let mut rows = Vec::new();
            for (name, col) in panel.model_names.iter().zip(&panel.forecasts) {
                rows.push(backtest(name, &panel.realized, col, tau)?);
            }
            write_backtest_csv(&rows, &output)?;
            log::info!("wrote {}", output.display());
            Ok(())
        }
        Command::Pipeline { config } => {
            let cfg = RunConfig::load(&config)?;
            let out = run_pipeline(&cfg, Some(&config))?;
            log::info!(
                "pipeline complete; artifacts in {}",
                out.output_dir.display()
            );
            Ok(())
        }
    }
}

fn write_flat(dir: &std::path::Path, name: &str, content: &str) -> Result<(), Error> {
    let safe: String = name
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    let path = dir.join(format!("{safe}.params.txt"));
    std::fs::write(&path, content).map_err(|e| Error::io(&path, e))
}

fn subset_from_ssm(panel: &ForecastPanel, ssm_csv: &std::path::Path) -> Result<ForecastPanel, Error> {
    // first column of the SSM report CSV holds the surviving model names
    let text = std::fs::read_to_string(ssm_csv).map_err(|e| Error::io(ssm_csv, e))?;
    let names: Vec<String> = text
        .lines()
        .skip(1)
        .filter_map(|line| line.split(',').next())
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no survivor rows",
            ssm_csv.display()
        )));
    }
    let mut model_names = Vec::new();
    let mut forecasts = Vec::new();
    for name in &names {
        let idx = panel
            .model_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| {
                Error::InvalidInput(format!("survivor `{name}` not found in the panel"))
            })?;
        model_names.push(name.clone());
        forecasts.push(panel.forecasts[idx].clone());
    }
    Ok(ForecastPanel {
        model_names,
        forecasts,
        realized: panel.realized.clone(),
        dates: panel.dates.clone(),
        tau: panel.tau,
    })
}
