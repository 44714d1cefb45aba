//! Volatility model zoo: the ARCH family and the score-driven models, plus
//! VaR extraction from a fitted model's one-step-ahead conditional
//! distribution.

pub mod garch;
pub mod gas;

pub use garch::{
    filter_variance, fit_garch, loglik, persistence, simulate, validate_params, GarchFamily,
    GarchFilterOutput, GarchFit, GarchParams, GarchSpec, OptimizerConfig, VarianceInit,
};
pub use gas::{
    fit_gas, gas_filter, gas_score_scale, simulate_gas_normal, GasDist, GasFilterOutput, GasFit,
    GasParams, GasScaling, GasSpec,
};

use crate::error::{Error, Result};
use crate::market_data::ReturnSeries;
use serde::{Deserialize, Serialize};

/// A volatility model specification, either ARCH-family or score-driven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum VolModelSpec {
    Garch(GarchSpec),
    Gas(GasSpec),
}

impl VolModelSpec {
    pub fn label(&self) -> String {
        match self {
            VolModelSpec::Garch(s) => s.label(),
            VolModelSpec::Gas(s) => s.label(),
        }
    }
}

/// Estimated parameters of a volatility model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VolModelParams {
    Garch(GarchParams),
    Gas(GasParams),
}

/// Filtered conditional-parameter paths.
#[derive(Debug, Clone)]
pub enum StatePath {
    Garch {
        sigma2: Vec<f64>,
        xi: Option<Vec<f64>>,
    },
    Gas {
        /// natural-space ζ_t rows
        zeta: Vec<Vec<f64>>,
    },
}

/// Conditional parameters at T+1 given the sample.
#[derive(Debug, Clone, Copy)]
pub enum OneStepForecast {
    Garch {
        mu: f64,
        sigma2: f64,
        xi: Option<f64>,
    },
    GasNormal {
        mu: f64,
        sigma2: f64,
    },
    GasStudentT {
        mu: f64,
        phi2: f64,
        nu: f64,
    },
}

/// A fitted volatility model: spec, parameters, likelihood, filtered state
/// and the one-step-ahead conditional parameters.
#[derive(Debug, Clone)]
pub struct FittedVolModel {
    pub spec: VolModelSpec,
    pub params: VolModelParams,
    pub loglik: f64,
    pub converged: bool,
    pub state_path: StatePath,
    pub one_step: OneStepForecast,
}

impl FittedVolModel {
    pub fn from_garch(spec: GarchSpec, fit: GarchFit) -> Self {
        let one_step = OneStepForecast::Garch {
            mu: fit.params.mu,
            sigma2: fit.filter.forecast_sigma2,
            xi: fit.filter.forecast_xi,
        };
        FittedVolModel {
            spec: VolModelSpec::Garch(spec),
            params: VolModelParams::Garch(fit.params),
            loglik: fit.loglik,
            converged: fit.converged,
            state_path: StatePath::Garch {
                sigma2: fit.filter.sigma2,
                xi: fit.filter.xi,
            },
            one_step,
        }
    }

    pub fn from_gas(spec: GasSpec, fit: GasFit) -> Self {
        let one_step = match spec.dist {
            GasDist::Normal => OneStepForecast::GasNormal {
                mu: fit.filter.forecast[0],
                sigma2: fit.filter.forecast[1],
            },
            GasDist::StudentT => OneStepForecast::GasStudentT {
                mu: fit.filter.forecast[0],
                phi2: fit.filter.forecast[1],
                nu: fit.filter.forecast[2],
            },
        };
        FittedVolModel {
            spec: VolModelSpec::Gas(spec),
            params: VolModelParams::Gas(fit.params),
            loglik: fit.loglik,
            converged: fit.converged,
            state_path: StatePath::Gas {
                zeta: fit.filter.zeta_path,
            },
            one_step,
        }
    }

    /// Short content hash of the spec, for the flat export format.
    pub fn spec_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(&self.spec).expect("spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Flat `name = value` export of the fitted model.
    pub fn export_flat(&self) -> String {
        let mut lines = vec![
            format!("model = {}", self.spec.label()),
            format!("spec_hash = {}", self.spec_hash()),
        ];
        match &self.params {
            VolModelParams::Garch(p) => {
                lines.push(format!("mu = {:.12e}", p.mu));
                lines.push(format!("omega = {:.12e}", p.omega));
                for (i, a) in p.alpha.iter().enumerate() {
                    lines.push(format!("alpha{} = {:.12e}", i + 1, a));
                }
                for (j, b) in p.beta.iter().enumerate() {
                    lines.push(format!("beta{} = {:.12e}", j + 1, b));
                }
                for (i, g) in p.gamma.iter().enumerate() {
                    lines.push(format!("gamma{} = {:.12e}", i + 1, g));
                }
                if let VolModelSpec::Garch(spec) = &self.spec {
                    if matches!(spec.family, GarchFamily::Aparch | GarchFamily::Ngarch) {
                        lines.push(format!("delta = {:.12e}", p.delta));
                    }
                    if spec.family == GarchFamily::Cgarch {
                        lines.push(format!("rho = {:.12e}", p.rho));
                        lines.push(format!("eta = {:.12e}", p.eta));
                    }
                }
            }
            VolModelParams::Gas(p) => {
                let names = ["mu", "scale", "shape"];
                for (k, name) in names.iter().take(p.omega.len()).enumerate() {
                    lines.push(format!("omega_{} = {:.12e}", name, p.omega[k]));
                    lines.push(format!("alpha_{} = {:.12e}", name, p.alpha[k]));
                    lines.push(format!("beta_{} = {:.12e}", name, p.beta[k]));
                }
            }
        }
        lines.push(format!("loglik = {:.12e}", self.loglik));
        lines.push(format!("converged = {}", self.converged));
        lines.join("\n") + "\n"
    }
}

/// Fit any volatility model spec.
pub fn fit_vol_model(
    spec: &VolModelSpec,
    returns: &ReturnSeries,
    optimizer: &OptimizerConfig,
) -> Result<FittedVolModel> {
    match spec {
        VolModelSpec::Garch(s) => Ok(FittedVolModel::from_garch(
            *s,
            fit_garch(s, returns, optimizer)?,
        )),
        VolModelSpec::Gas(s) => Ok(FittedVolModel::from_gas(*s, fit_gas(s, returns, optimizer)?)),
    }
}

/// Filter a previously estimated model over a (new) window and refresh its
/// one-step-ahead forecast, keeping the parameters frozen.
pub fn refilter(model: &FittedVolModel, returns: &ReturnSeries) -> Result<FittedVolModel> {
    match (&model.spec, &model.params) {
        (VolModelSpec::Garch(spec), VolModelParams::Garch(params)) => {
            let filt = filter_variance(spec, params, returns, VarianceInit::SampleVariance)?;
            Ok(FittedVolModel {
                spec: model.spec,
                params: model.params.clone(),
                loglik: model.loglik,
                converged: model.converged,
                one_step: OneStepForecast::Garch {
                    mu: params.mu,
                    sigma2: filt.forecast_sigma2,
                    xi: filt.forecast_xi,
                },
                state_path: StatePath::Garch {
                    sigma2: filt.sigma2,
                    xi: filt.xi,
                },
            })
        }
        (VolModelSpec::Gas(spec), VolModelParams::Gas(params)) => {
            let filt = gas_filter(spec, params, returns)?;
            let one_step = match spec.dist {
                GasDist::Normal => OneStepForecast::GasNormal {
                    mu: filt.forecast[0],
                    sigma2: filt.forecast[1],
                },
                GasDist::StudentT => OneStepForecast::GasStudentT {
                    mu: filt.forecast[0],
                    phi2: filt.forecast[1],
                    nu: filt.forecast[2],
                },
            };
            Ok(FittedVolModel {
                spec: model.spec,
                params: model.params.clone(),
                loglik: model.loglik,
                converged: model.converged,
                one_step,
                state_path: StatePath::Gas {
                    zeta: filt.zeta_path,
                },
            })
        }
        _ => Err(Error::InvalidInput("spec/params kind mismatch".into())),
    }
}

/// One-step-ahead VaR at level τ by inverting the conditional distribution.
pub fn var_from_model(model: &FittedVolModel, tau: f64) -> Result<f64> {
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::InvalidInput(format!("tau {tau} outside (0,1)")));
    }
    match (&model.spec, &model.one_step) {
        (VolModelSpec::Garch(spec), OneStepForecast::Garch { mu, sigma2, .. }) => {
            Ok(mu + sigma2.sqrt() * spec.dist.quantile(tau))
        }
        (_, OneStepForecast::GasNormal { mu, sigma2 }) => {
            Ok(mu + sigma2.sqrt() * crate::numeric::special::std_normal_quantile(tau))
        }
        (_, OneStepForecast::GasStudentT { mu, phi2, nu }) => {
            Ok(mu + phi2.sqrt() * crate::numeric::special::student_t_quantile(tau, *nu))
        }
        _ => Err(Error::InvalidInput("spec/forecast kind mismatch".into())),
    }
}
