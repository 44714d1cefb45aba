//! CAViaR: autoregressive models placed directly on the conditional
//! quantile, estimated by tick-loss minimisation.
//!
//! The symmetric-absolute-value, asymmetric-slope and indirect-GARCH
//! recursions evolve a positive quantity q_t internally and report
//! f_t = -q_t, the lower-tail quantile; the adaptive recursion evolves the
//! signed quantile directly.

use crate::error::{Error, Result};
use crate::market_data::ReturnSeries;
use crate::numeric::empirical_quantile;
use crate::numeric::optim::nelder_mead;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaviarVariant {
    SymmetricAbsValue,
    AsymmetricSlope,
    IndirectGarch,
    Adaptive,
}

impl CaviarVariant {
    pub fn n_params(&self) -> usize {
        match self {
            CaviarVariant::SymmetricAbsValue | CaviarVariant::IndirectGarch => 3,
            CaviarVariant::AsymmetricSlope => 4,
            CaviarVariant::Adaptive => 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CaviarVariant::SymmetricAbsValue => "CAViaR-SAV",
            CaviarVariant::AsymmetricSlope => "CAViaR-AS",
            CaviarVariant::IndirectGarch => "CAViaR-IG",
            CaviarVariant::Adaptive => "CAViaR-AD",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaviarSpec {
    pub variant: CaviarVariant,
    pub tau: f64,
    /// smoothing constant of the adaptive recursion
    #[serde(default = "default_adaptive_g")]
    pub adaptive_g: f64,
}

fn default_adaptive_g() -> f64 {
    10.0
}

impl CaviarSpec {
    pub fn new(variant: CaviarVariant, tau: f64) -> Result<Self> {
        if !(0.0 < tau && tau < 1.0) {
            return Err(Error::Constraint(format!("tau {tau} outside (0,1)")));
        }
        Ok(CaviarSpec {
            variant,
            tau,
            adaptive_g: default_adaptive_g(),
        })
    }

    pub fn with_adaptive_g(mut self, g: f64) -> Result<Self> {
        if g <= 0.0 || g.is_nan() {
            return Err(Error::Constraint(format!("G = {g} must be positive")));
        }
        self.adaptive_g = g;
        Ok(self)
    }

    pub fn label(&self) -> String {
        format!("{}({})", self.variant.label(), self.tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaviarParams {
    pub beta: Vec<f64>,
}

impl CaviarParams {
    pub fn validate(&self, spec: &CaviarSpec) -> Result<()> {
        if self.beta.len() != spec.variant.n_params() {
            return Err(Error::Constraint(format!(
                "{} expects {} parameters (got {})",
                spec.variant.label(),
                spec.variant.n_params(),
                self.beta.len()
            )));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Constraint("non-finite CAViaR parameter".into()));
        }
        if spec.variant == CaviarVariant::IndirectGarch
            && !(self.beta[0] > 0.0 && self.beta[1] >= 0.0 && self.beta[2] >= 0.0)
        {
            return Err(Error::Constraint(
                "indirect GARCH needs beta1 > 0, beta2 >= 0, beta3 >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Initial quantile state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantileInit {
    /// |empirical τ-quantile| of the first 10% of the sample (signed for the
    /// adaptive variant)
    Empirical,
    /// explicit initial internal state: q₁ for the positive-state variants,
    /// f₁ for the adaptive one
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct CaviarFilterOutput {
    /// the reported τ-quantile path f_t (negative in the lower tail)
    pub quantile: Vec<f64>,
    /// f_{T+1}
    pub forecast: f64,
}

fn initial_state(spec: &CaviarSpec, y: &[f64], init: QuantileInit) -> f64 {
    match init {
        QuantileInit::Fixed(v) => v,
        QuantileInit::Empirical => {
            let head = (y.len() / 10).max(1);
            let q = empirical_quantile(&y[..head], spec.tau);
            match spec.variant {
                CaviarVariant::Adaptive => q,
                _ => q.abs(),
            }
        }
    }
}

/// Run the variant's recursion and report the quantile path plus one step
/// beyond the sample.
pub fn caviar_filter(
    spec: &CaviarSpec,
    params: &CaviarParams,
    returns: &ReturnSeries,
    init: QuantileInit,
) -> Result<CaviarFilterOutput> {
    params.validate(spec)?;
    let y = returns.values();
    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least 2 observations".into()));
    }
    let b = &params.beta;
    let g = spec.adaptive_g;
    let mut state = initial_state(spec, y, init);
    let mut out = Vec::with_capacity(n);

    let report = |state: f64| -> f64 {
        match spec.variant {
            CaviarVariant::Adaptive => state,
            _ => -state,
        }
    };
    let step = |state: f64, y_prev: f64| -> f64 {
        match spec.variant {
            CaviarVariant::SymmetricAbsValue => b[0] + b[1] * state + b[2] * y_prev.abs(),
            CaviarVariant::AsymmetricSlope => {
                b[0] + b[1] * state + b[2] * y_prev.max(0.0) + b[3] * (-y_prev).max(0.0)
            }
            CaviarVariant::IndirectGarch => {
                (b[0] + b[1] * state * state + b[2] * y_prev * y_prev).sqrt()
            }
            CaviarVariant::Adaptive => state + b[0] / (1.0 + (g * (y_prev - state)).exp()),
        }
    };

    out.push(report(state));
    for t in 1..n {
        state = step(state, y[t - 1]);
        if !state.is_finite() {
            return Err(Error::NonFinite {
                context: "CAViaR recursion".into(),
                t,
            });
        }
        out.push(report(state));
    }
    let forecast_state = step(state, y[n - 1]);
    if !forecast_state.is_finite() {
        return Err(Error::NonFinite {
            context: "CAViaR forecast".into(),
            t: n,
        });
    }
    Ok(CaviarFilterOutput {
        quantile: out,
        forecast: report(forecast_state),
    })
}

/// Σ ρ_τ(y_t - f_t) with ρ_τ(u) = u(τ - 1(u<0)); nonnegative by construction.
pub fn tick_loss(realized: &[f64], quantile_path: &[f64], tau: f64) -> Result<f64> {
    if realized.len() != quantile_path.len() {
        return Err(Error::InvalidInput(format!(
            "realized ({}) and quantile ({}) length mismatch",
            realized.len(),
            quantile_path.len()
        )));
    }
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::InvalidInput(format!("tau {tau} outside (0,1)")));
    }
    Ok(realized
        .iter()
        .zip(quantile_path)
        .map(|(&y, &f)| {
            let u = y - f;
            u * (tau - if u < 0.0 { 1.0 } else { 0.0 })
        })
        .sum())
}

/// Multi-start settings for the tick-loss minimisation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CaviarFitConfig {
    /// uniform random candidate draws
    pub n_candidates: usize,
    /// best candidates polished by Nelder-Mead
    pub n_polish: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for CaviarFitConfig {
    fn default() -> Self {
        CaviarFitConfig {
            n_candidates: 10_000,
            n_polish: 10,
            max_iter: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaviarFit {
    pub params: CaviarParams,
    pub tick_loss: f64,
    pub filter: CaviarFilterOutput,
}

/// Tick-loss minimisation: uniform random candidates filtered to the best
/// few, each polished by Nelder-Mead; the reported parameters achieve the
/// smallest loss among every point evaluated.
pub fn caviar_fit(
    spec: &CaviarSpec,
    returns: &ReturnSeries,
    config: &CaviarFitConfig,
) -> Result<CaviarFit> {
    if returns.len() < 250 {
        log::warn!(
            "{}: fitting on {} observations; estimates below ~250 can be unstable",
            spec.label(),
            returns.len()
        );
    }
    let y = returns.values();
    // scale-adaptive candidate boxes around the unconditional quantile
    let scale = empirical_quantile(y, spec.tau).abs().max(0.1);

    let objective = |beta: &[f64]| -> f64 {
        let params = CaviarParams {
            beta: beta.to_vec(),
        };
        if params.validate(spec).is_err() {
            return f64::INFINITY;
        }
        match caviar_filter(spec, &params, returns, QuantileInit::Empirical) {
            Ok(out) => tick_loss(y, &out.quantile, spec.tau).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        match spec.variant {
            CaviarVariant::SymmetricAbsValue => vec![
                rng.gen_range(0.0..scale),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
            ],
            CaviarVariant::AsymmetricSlope => vec![
                rng.gen_range(0.0..scale),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
            ],
            CaviarVariant::IndirectGarch => vec![
                rng.gen_range(1e-8..scale * scale),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
            ],
            CaviarVariant::Adaptive => vec![rng.gen_range(-scale..scale)],
        }
    };

    let mut candidates: Vec<(f64, Vec<f64>)> = (0..config.n_candidates.max(1))
        .map(|_| {
            let beta = draw(&mut rng);
            (objective(&beta), beta)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut best = candidates
        .first()
        .cloned()
        .ok_or_else(|| Error::NoConvergence("no candidates".into()))?;
    if !best.0.is_finite() {
        return Err(Error::NoConvergence(format!(
            "{}: every start diverged",
            spec.label()
        )));
    }
    for (loss, beta) in candidates.iter().take(config.n_polish.max(1)) {
        if !loss.is_finite() {
            break;
        }
        let polished = nelder_mead(objective, beta, config.max_iter);
        if polished.fx < best.0 {
            best = (polished.fx, polished.x);
        }
    }

    let params = CaviarParams { beta: best.1 };
    let filter = caviar_filter(spec, &params, returns, QuantileInit::Empirical)?;
    Ok(CaviarFit {
        tick_loss: best.0,
        params,
        filter,
    })
}

/// One-step-ahead VaR: the recursion advanced once past the sample.
pub fn caviar_forecast(
    spec: &CaviarSpec,
    params: &CaviarParams,
    returns: &ReturnSeries,
) -> Result<f64> {
    Ok(caviar_filter(spec, params, returns, QuantileInit::Empirical)?.forecast)
}
