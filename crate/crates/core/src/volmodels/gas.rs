//! Score-driven (GAS) models for the Gaussian and Student-t conditional
//! distributions, with Fisher-information scaling of the forcing score.
//!
//! Time-varying parameters evolve in mapped space (log transforms for the
//! positive ones) and the scaled score is the update's forcing variable.

use crate::error::{Error, Result};
use crate::market_data::ReturnSeries;
use crate::numeric::optim::{bfgs, OptimResult};
use crate::numeric::special::{std_normal_logpdf, student_t_logpdf, trigamma};
use crate::numeric::{invert_sym2, sqrt_sym2};
use crate::volmodels::garch::OptimizerConfig;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GasDist {
    /// ζ = (μ, σ²)
    Normal,
    /// ζ = (μ, φ², ν) with φ the scale (not the standard deviation)
    #[serde(rename = "student_t")]
    StudentT,
}

/// Exponent a of the inverse-Fisher scaling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GasScaling {
    /// a = 0
    Identity,
    /// a = 1/2
    #[serde(rename = "invsqrt")]
    InvSqrt,
    /// a = 1 (the default; markedly more efficient than identity scaling)
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasSpec {
    pub dist: GasDist,
    pub scaling: GasScaling,
}

impl GasSpec {
    pub fn dim(&self) -> usize {
        match self.dist {
            GasDist::Normal => 2,
            GasDist::StudentT => 3,
        }
    }

    pub fn label(&self) -> String {
        let d = match self.dist {
            GasDist::Normal => "GAS-N",
            GasDist::StudentT => "GAS-T",
        };
        let a = match self.scaling {
            GasScaling::Identity => "a0",
            GasScaling::InvSqrt => "a05",
            GasScaling::Inverse => "a1",
        };
        format!("{d}({a})")
    }
}

/// Per-parameter intercept, score loading and autoregression of the mapped
/// update ζ̃_{t+1} = ω + α s̃_t + β ζ̃_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub omega: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl GasParams {
    pub fn validate(&self, spec: &GasSpec) -> Result<()> {
        let dim = spec.dim();
        if self.omega.len() != dim || self.alpha.len() != dim || self.beta.len() != dim {
            return Err(Error::Constraint(format!(
                "{}: parameter vectors must have length {dim}",
                spec.label()
            )));
        }
        if self.beta.iter().any(|b| b.abs() >= 1.0) {
            return Err(Error::Constraint(
                "mapped dynamics need |beta| < 1 for every parameter".into(),
            ));
        }
        if self
            .omega
            .iter()
            .chain(&self.alpha)
            .chain(&self.beta)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Constraint("non-finite GAS parameter".into()));
        }
        Ok(())
    }
}

/// ψ((ν+1)/2)/2 - ψ(ν/2)/2 - 1/(2ν), stable for large ν.
///
/// Direct evaluation cancels catastrophically past ν ≈ 10³; the asymptotic
/// series 1/(4ν²) - 1/(8ν⁴) + 1/(4ν⁶) is accurate to ~1e-10 from ν = 50 up.
fn digamma_tail_term(nu: f64) -> f64 {
    if nu >= 100.0 {
        let inv2 = 1.0 / (nu * nu);
        inv2 * (0.25 - inv2 * (0.125 - 0.25 * inv2))
    } else {
        0.5 * digamma((nu + 1.0) / 2.0) - 0.5 * digamma(nu / 2.0) - 0.5 / nu
    }
}

/// Fisher entry for ν: ψ'(ν/2)/4 - ψ'((ν+1)/2)/4 - (ν+5)/(2ν(ν+3)(ν+1)),
/// with the matching large-ν series 7/(2ν⁴) - 13/ν⁵ + 79/(2ν⁶) - 119/ν⁷.
fn fisher_nu_entry(nu: f64) -> f64 {
    if nu >= 300.0 {
        let inv = 1.0 / nu;
        inv.powi(4) * (3.5 - inv * (13.0 - inv * (39.5 - 119.0 * inv)))
    } else {
        0.25 * trigamma(nu / 2.0) - 0.25 * trigamma((nu + 1.0) / 2.0)
            - (nu + 5.0) / (2.0 * nu * (nu + 3.0) * (nu + 1.0))
    }
}

/// Conditional log density at natural parameters ζ.
pub fn log_density(dist: GasDist, zeta: &[f64], y: f64) -> f64 {
    match dist {
        GasDist::Normal => {
            let (mu, sigma2) = (zeta[0], zeta[1]);
            let sd = sigma2.sqrt();
            std_normal_logpdf((y - mu) / sd) - sd.ln()
        }
        GasDist::StudentT => {
            let (mu, phi2, nu) = (zeta[0], zeta[1], zeta[2]);
            let phi = phi2.sqrt();
            student_t_logpdf((y - mu) / phi, nu) - phi.ln()
        }
    }
}

/// Score ∇ of the log density with respect to the natural parameters.
pub fn score(dist: GasDist, zeta: &[f64], y: f64) -> Vec<f64> {
    match dist {
        GasDist::Normal => {
            let (mu, sigma2) = (zeta[0], zeta[1]);
            let d = y - mu;
            vec![d / sigma2, -0.5 / sigma2 * (1.0 - d * d / sigma2)]
        }
        GasDist::StudentT => {
            let (mu, phi2, nu) = (zeta[0], zeta[1], zeta[2]);
            let d = y - mu;
            let d2 = d * d;
            let denom = nu * phi2 + d2;
            let g_mu = (nu + 1.0) * d / denom;
            let g_phi2 = -0.5 / phi2 + 0.5 * (nu + 1.0) * d2 / (phi2 * denom);
            let g_nu = digamma_tail_term(nu) - 0.5 * (d2 / (nu * phi2)).ln_1p()
                + 0.5 * (nu + 1.0) * d2 / (nu * denom);
            vec![g_mu, g_phi2, g_nu]
        }
    }
}

/// Fisher information at natural parameters; the Student-t (φ², ν) block is
/// non-diagonal and returned as (I_μμ, I_φφ, I_φν, I_νν).
pub fn fisher(dist: GasDist, zeta: &[f64]) -> Vec<f64> {
    match dist {
        GasDist::Normal => {
            let sigma2 = zeta[1];
            vec![1.0 / sigma2, 0.5 / (sigma2 * sigma2)]
        }
        GasDist::StudentT => {
            let (phi2, nu) = (zeta[1], zeta[2]);
            let i_mu = (nu + 1.0) / (phi2 * (nu + 3.0));
            let i_pp = nu / (2.0 * phi2 * phi2 * (nu + 3.0));
            let i_pn = -1.0 / (phi2 * (nu + 1.0) * (nu + 3.0));
            let i_nn = fisher_nu_entry(nu);
            vec![i_mu, i_pp, i_pn, i_nn]
        }
    }
}

fn check_natural(spec: &GasSpec, zeta: &[f64]) -> Result<()> {
    let ok = match spec.dist {
        GasDist::Normal => zeta[1] > 0.0,
        GasDist::StudentT => zeta[1] > 0.0 && zeta[2] > 0.0,
    };
    if !ok || zeta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Constraint(format!(
            "natural parameters out of domain: {zeta:?}"
        )));
    }
    Ok(())
}

/// Scaled score s̃ = ṁ ⊙ I^{-a} ∇ in the mapped parameter space.
///
/// ṁ is the derivative of the mapping to the working parameters
/// (identity for μ, 1/σ², 1/φ², 1/ν for the log-transformed ones).
pub fn gas_score_scale(spec: &GasSpec, zeta: &[f64], y: f64) -> Result<Vec<f64>> {
    check_natural(spec, zeta)?;
    let grad = score(spec.dist, zeta, y);
    let info = fisher(spec.dist, zeta);
    let scaled = match spec.dist {
        GasDist::Normal => {
            let (i_mu, i_ss) = (info[0], info[1]);
            if i_mu <= 0.0 || i_ss <= 0.0 {
                return Err(Error::Numerical("singular Fisher matrix".into()));
            }
            match spec.scaling {
                GasScaling::Identity => grad,
                GasScaling::InvSqrt => vec![grad[0] / i_mu.sqrt(), grad[1] / i_ss.sqrt()],
                GasScaling::Inverse => vec![grad[0] / i_mu, grad[1] / i_ss],
            }
        }
        GasDist::StudentT => {
            let (i_mu, i_pp, i_pn, i_nn) = (info[0], info[1], info[2], info[3]);
            if i_mu <= 0.0 {
                return Err(Error::Numerical("singular Fisher matrix".into()));
            }
            match spec.scaling {
                GasScaling::Identity => grad,
                GasScaling::Inverse => {
                    // the (φ², ν) block is inverted jointly
                    let inv = invert_sym2(i_pp, i_pn, i_nn)
                        .ok_or_else(|| Error::Numerical("singular Fisher matrix".into()))?;
                    vec![
                        grad[0] / i_mu,
                        inv[0][0] * grad[1] + inv[0][1] * grad[2],
                        inv[1][0] * grad[1] + inv[1][1] * grad[2],
                    ]
                }
                GasScaling::InvSqrt => {
                    let root = sqrt_sym2(i_pp, i_pn, i_nn)
                        .ok_or_else(|| Error::Numerical("singular Fisher matrix".into()))?;
                    let inv = invert_sym2(root[0][0], root[0][1], root[1][1])
                        .ok_or_else(|| Error::Numerical("singular Fisher matrix".into()))?;
                    vec![
                        grad[0] / i_mu.sqrt(),
                        inv[0][0] * grad[1] + inv[0][1] * grad[2],
                        inv[1][0] * grad[1] + inv[1][1] * grad[2],
                    ]
                }
            }
        }
    };
    // map to the working space: identity for mu, log for the positive ones
    let mdot: Vec<f64> = match spec.dist {
        GasDist::Normal => vec![1.0, 1.0 / zeta[1]],
        GasDist::StudentT => vec![1.0, 1.0 / zeta[1], 1.0 / zeta[2]],
    };
    Ok(scaled.iter().zip(&mdot).map(|(s, m)| s * m).collect())
}

fn unmap(dist: GasDist, mapped: &[f64]) -> Vec<f64> {
    match dist {
        GasDist::Normal => vec![mapped[0], mapped[1].exp()],
        GasDist::StudentT => vec![mapped[0], mapped[1].exp(), mapped[2].exp()],
    }
}

/// Filtered natural-parameter paths.
#[derive(Debug, Clone)]
pub struct GasFilterOutput {
    /// natural-space ζ_t for every observation (n rows)
    pub zeta_path: Vec<Vec<f64>>,
    /// natural-space ζ_{T+1}
    pub forecast: Vec<f64>,
    pub loglik: f64,
}

/// Run the score-driven recursion in mapped space.
///
/// Mapped states start at their unconditional values ω/(1-β).
pub fn gas_filter(
    spec: &GasSpec,
    params: &GasParams,
    returns: &ReturnSeries,
) -> Result<GasFilterOutput> {
    params.validate(spec)?;
    let dim = spec.dim();
    let y = returns.values();
    let mut mapped: Vec<f64> = (0..dim)
        .map(|k| params.omega[k] / (1.0 - params.beta[k]))
        .collect();
    let mut zeta_path = Vec::with_capacity(y.len());
    let mut loglik = 0.0;
    for (t, &yt) in y.iter().enumerate() {
        let zeta = unmap(spec.dist, &mapped);
        if zeta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "GAS state".into(),
                t,
            });
        }
        loglik += log_density(spec.dist, &zeta, yt);
        let s = gas_score_scale(spec, &zeta, yt).map_err(|e| match e {
            Error::Constraint(msg) | Error::Numerical(msg) => Error::NonFinite {
                context: format!("GAS score ({msg})"),
                t,
            },
            other => other,
        })?;
        for k in 0..dim {
            mapped[k] = params.omega[k] + params.alpha[k] * s[k] + params.beta[k] * mapped[k];
        }
        if mapped.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "GAS update".into(),
                t,
            });
        }
        zeta_path.push(zeta);
    }
    let forecast = unmap(spec.dist, &mapped);
    Ok(GasFilterOutput {
        zeta_path,
        forecast,
        loglik,
    })
}

/// Outcome of a maximum-likelihood GAS fit.
#[derive(Debug, Clone)]
pub struct GasFit {
    pub params: GasParams,
    pub loglik: f64,
    pub converged: bool,
    pub filter: GasFilterOutput,
}

fn bounded_tanh(x: f64) -> f64 {
    (1.0 - 1e-9) * x.tanh()
}

fn atanh(x: f64) -> f64 {
    0.5 * ((1.0 + x) / (1.0 - x)).ln()
}

struct GasTransform {
    dim: usize,
}

impl GasTransform {
    fn unpack(&self, u: &[f64]) -> GasParams {
        let d = self.dim;
        GasParams {
            omega: u[..d].to_vec(),
            alpha: u[d..2 * d].to_vec(),
            beta: u[2 * d..3 * d].iter().map(|b| bounded_tanh(*b)).collect(),
        }
    }

    fn pack(&self, params: &GasParams) -> Vec<f64> {
        let mut u = params.omega.clone();
        u.extend(&params.alpha);
        u.extend(params.beta.iter().map(|b| atanh(b.clamp(-0.999999, 0.999999))));
        u
    }
}

/// Maximum-likelihood estimation of the static GAS parameters.
pub fn fit_gas(
    spec: &GasSpec,
    returns: &ReturnSeries,
    optimizer: &OptimizerConfig,
) -> Result<GasFit> {
    if returns.len() < 250 {
        log::warn!(
            "{}: fitting on {} observations; estimates below ~250 can be unstable",
            spec.label(),
            returns.len()
        );
    }
    let dim = spec.dim();
    let transform = GasTransform { dim };
    let y = returns.values();
    let n = y.len() as f64;
    let sample_mean = y.iter().sum::<f64>() / n;
    let sample_var = y.iter().map(|v| (v - sample_mean).powi(2)).sum::<f64>() / n;

    // moment-based start: unconditional mapped states at the sample moments
    let beta0 = [0.90, 0.95, 0.90];
    let alpha0 = [0.05, 0.05, 0.01];
    let uncond = match spec.dist {
        GasDist::Normal => vec![sample_mean, sample_var.max(1e-12).ln()],
        GasDist::StudentT => vec![
            sample_mean,
            // scale of a t with nu = 8: phi^2 = var (nu-2)/nu
            (sample_var * 0.75).max(1e-12).ln(),
            8.0_f64.ln(),
        ],
    };
    let start_params = GasParams {
        omega: (0..dim).map(|k| uncond[k] * (1.0 - beta0[k])).collect(),
        alpha: alpha0[..dim].to_vec(),
        beta: beta0[..dim].to_vec(),
    };
    let base = transform.pack(&start_params);

    let objective = |u: &[f64]| -> f64 {
        let params = transform.unpack(u);
        match gas_filter(spec, &params, returns) {
            Ok(out) if out.loglik.is_finite() => -out.loglik,
            _ => f64::INFINITY,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(optimizer.seed);
    let mut best: Option<OptimResult> = None;
    for start_idx in 0..optimizer.n_starts.max(1) {
        let start: Vec<f64> = if start_idx == 0 {
            base.clone()
        } else {
            base.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect()
        };
        if !objective(&start).is_finite() {
            continue;
        }
        let result = bfgs(|u| objective(u), &start, optimizer.max_iter);
        if !result.fx.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => result.fx < b.fx,
        };
        if better {
            best = Some(result);
        }
    }
    let best = best.ok_or_else(|| {
        Error::NoConvergence(format!(
            "{}: no start produced a finite likelihood",
            spec.label()
        ))
    })?;
    let params = transform.unpack(&best.x);
    let filter = gas_filter(spec, &params, returns)?;
    Ok(GasFit {
        loglik: filter.loglik,
        converged: best.converged,
        params,
        filter,
    })
}

/// Simulate a path from a Gaussian GAS process (used by tests and examples).
pub fn simulate_gas_normal(
    spec: &GasSpec,
    params: &GasParams,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    assert!(spec.dist == GasDist::Normal, "Gaussian simulation only");
    params.validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mapped: Vec<f64> = (0..2)
        .map(|k| params.omega[k] / (1.0 - params.beta[k]))
        .collect();
    let mut out = Vec::with_capacity(n + burn_in);
    for t in 0..n + burn_in {
        let zeta = unmap(GasDist::Normal, &mapped);
        if !zeta[1].is_finite() {
            return Err(Error::NonFinite {
                context: "GAS simulation".into(),
                t,
            });
        }
        let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
        let y = zeta[0] + zeta[1].sqrt() * z;
        let s = gas_score_scale(spec, &zeta, y)?;
        for k in 0..2 {
            mapped[k] = params.omega[k] + params.alpha[k] * s[k] + params.beta[k] * mapped[k];
        }
        out.push(y);
    }
    Ok(out.split_off(burn_in))
}
