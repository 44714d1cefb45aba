//! The ARCH family: filtering, persistence, likelihood, estimation and
//! simulation for GARCH, IGARCH, EGARCH, APARCH and its nested cases, and
//! the component model.

use crate::dist::InnovationDist;
use crate::error::{Error, Result};
use crate::market_data::ReturnSeries;
use crate::numeric::integrate_half_line;
use crate::numeric::optim::{bfgs, OptimResult};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GarchFamily {
    Garch,
    Igarch,
    Egarch,
    Aparch,
    Avgarch,
    #[serde(rename = "gjrgarch")]
    GjrGarch,
    Tgarch,
    Ngarch,
    Cgarch,
}

impl GarchFamily {
    pub fn label(&self) -> &'static str {
        match self {
            GarchFamily::Garch => "GARCH",
            GarchFamily::Igarch => "IGARCH",
            GarchFamily::Egarch => "EGARCH",
            GarchFamily::Aparch => "APARCH",
            GarchFamily::Avgarch => "AVGARCH",
            GarchFamily::GjrGarch => "GJRGARCH",
            GarchFamily::Tgarch => "TGARCH",
            GarchFamily::Ngarch => "NGARCH",
            GarchFamily::Cgarch => "CGARCH",
        }
    }

    /// Does the recursion carry asymmetry parameters γ?
    pub fn has_gamma(&self) -> bool {
        matches!(
            self,
            GarchFamily::Egarch | GarchFamily::Aparch | GarchFamily::GjrGarch | GarchFamily::Tgarch
        )
    }

    /// Power of the conditional-scale recursion, when fixed by the family.
    fn fixed_delta(&self) -> Option<f64> {
        match self {
            GarchFamily::Avgarch | GarchFamily::Tgarch => Some(1.0),
            GarchFamily::GjrGarch => Some(2.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchSpec {
    pub family: GarchFamily,
    /// ARCH order (α terms)
    pub p: usize,
    /// GARCH order (β terms)
    pub q: usize,
    pub dist: InnovationDist,
    pub include_mean: bool,
}

impl GarchSpec {
    pub fn new(family: GarchFamily, p: usize, q: usize, dist: InnovationDist) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Constraint("orders p, q must be >= 1".into()));
        }
        dist.validate()?;
        Ok(GarchSpec {
            family,
            p,
            q,
            dist,
            include_mean: false,
        })
    }

    pub fn with_mean(mut self) -> Self {
        self.include_mean = true;
        self
    }

    pub fn label(&self) -> String {
        format!("{}({},{})-{}", self.family.label(), self.p, self.q, self.dist.label())
    }
}

/// Flat parameter vector for every ARCH-family member; unused extras stay at
/// their neutral defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub mu: f64,
    pub omega: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// asymmetry loadings (EGARCH, APARCH, GJR, TGARCH); length p or empty
    #[serde(default)]
    pub gamma: Vec<f64>,
    /// Box-Cox power of the APARCH/NGARCH recursion
    #[serde(default = "default_delta2")]
    pub delta: f64,
    /// CGARCH permanent-component autoregression
    #[serde(default)]
    pub rho: f64,
    /// CGARCH shock loading of the permanent component
    #[serde(default)]
    pub eta: f64,
}

fn default_delta2() -> f64 {
    2.0
}

impl GarchParams {
    pub fn plain(mu: f64, omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        GarchParams {
            mu,
            omega,
            alpha,
            beta,
            gamma: Vec::new(),
            delta: 2.0,
            rho: 0.0,
            eta: 0.0,
        }
    }

    fn sum_alpha(&self) -> f64 {
        self.alpha.iter().sum()
    }

    fn sum_beta(&self) -> f64 {
        self.beta.iter().sum()
    }

    fn gamma_or_zero(&self, i: usize) -> f64 {
        self.gamma.get(i).copied().unwrap_or(0.0)
    }
}

/// Effective recursion power for a spec/params pair.
fn effective_delta(spec: &GarchSpec, params: &GarchParams) -> f64 {
    spec.family.fixed_delta().unwrap_or(match spec.family {
        GarchFamily::Aparch | GarchFamily::Ngarch => params.delta,
        _ => 2.0,
    })
}

/// Family-specific admissibility checks.
pub fn validate_params(spec: &GarchSpec, params: &GarchParams) -> Result<()> {
    let fail = |msg: String| Err(Error::Constraint(format!("{}: {msg}", spec.label())));
    if params.alpha.len() != spec.p {
        return fail(format!("expected {} alpha terms", spec.p));
    }
    if spec.family != GarchFamily::Ngarch && params.beta.len() != spec.q {
        return fail(format!("expected {} beta terms", spec.q));
    }
    if !params.mu.is_finite() || !params.omega.is_finite() {
        return fail("non-finite parameter".into());
    }

    let pos = params.omega > 0.0
        && params.alpha.iter().all(|a| *a >= 0.0)
        && params.beta.iter().all(|b| *b >= 0.0);
    let persistence_sum = params.sum_alpha() + params.sum_beta();

    match spec.family {
        GarchFamily::Garch => {
            if !pos {
                return fail("need omega > 0, alpha >= 0, beta >= 0".into());
            }
            if persistence_sum >= 1.0 {
                return fail(format!("alpha + beta = {persistence_sum} must be < 1"));
            }
        }
        GarchFamily::Igarch => {
            if !pos {
                return fail("need omega > 0, alpha >= 0, beta >= 0".into());
            }
            if (persistence_sum - 1.0).abs() > 1e-8 {
                return fail(format!("alpha + beta = {persistence_sum} must equal 1"));
            }
        }
        GarchFamily::Egarch => {
            if params.gamma.len() != spec.p {
                return fail(format!("expected {} gamma terms", spec.p));
            }
            if params.sum_beta().abs() >= 1.0 {
                return fail(format!("|sum beta| = {} must be < 1", params.sum_beta().abs()));
            }
        }
        GarchFamily::Aparch | GarchFamily::Tgarch => {
            if !pos {
                return fail("need omega > 0, alpha >= 0, beta >= 0".into());
            }
            if params.gamma.len() != spec.p {
                return fail(format!("expected {} gamma terms", spec.p));
            }
            if params.gamma.iter().any(|g| g.abs() >= 1.0) {
                return fail("need -1 < gamma < 1".into());
            }
            let delta = effective_delta(spec, params);
            if delta <= 0.0 || delta.is_nan() {
                return fail(format!("delta = {delta} must be > 0"));
            }
        }
        GarchFamily::GjrGarch => {
            if !pos {
                return fail("need omega > 0, alpha >= 0, beta >= 0".into());
            }
            if params.gamma.len() != spec.p {
                return fail(format!("expected {} gamma terms", spec.p));
            }
            if params.gamma.iter().any(|g| !(0.0..1.0).contains(g)) {
                return fail("need 0 <= gamma < 1".into());
            }
        }
        GarchFamily::Avgarch => {
            if !pos {
                return fail("need omega > 0, alpha >= 0, beta >= 0".into());
            }
        }
        GarchFamily::Ngarch => {
            if params.omega <= 0.0 || params.alpha.iter().any(|a| *a < 0.0) {
                return fail("need omega > 0, alpha >= 0".into());
            }
            if params.beta.iter().any(|b| *b != 0.0) {
                return fail("beta terms are fixed at zero".into());
            }
            if effective_delta(spec, params) <= 0.0 {
                return fail("delta must be > 0".into());
            }
        }
        GarchFamily::Cgarch => {
            if !pos {
                return fail("need omega > 0, alpha >= 0, beta >= 0".into());
            }
            if persistence_sum >= 1.0 {
                return fail(format!("alpha + beta = {persistence_sum} must be < 1"));
            }
            if params.rho >= 1.0 {
                return fail(format!("rho = {} must be < 1", params.rho));
            }
        }
    }
    Ok(())
}

/// Pre-sample variance convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceInit {
    /// sample variance of the filtered window (the default)
    SampleVariance,
    /// explicit pre-sample variance, mostly for tests and hand recursions
    Fixed(f64),
}

/// Filtered conditional-variance path.
#[derive(Debug, Clone)]
pub struct GarchFilterOutput {
    pub sigma2: Vec<f64>,
    /// permanent component path (CGARCH only)
    pub xi: Option<Vec<f64>>,
    pub forecast_sigma2: f64,
    pub forecast_xi: Option<f64>,
}

/// Run the family recursion over a return series.
///
/// Pre-sample states are set from `init` (sample variance by default); the
/// first max(p,q) conditional variances equal the initial value and the
/// recursion starts after them. The forecast entry extends the recursion one
/// step past the sample.
pub fn filter_variance(
    spec: &GarchSpec,
    params: &GarchParams,
    returns: &ReturnSeries,
    init: VarianceInit,
) -> Result<GarchFilterOutput> {
    validate_params(spec, params)?;
    let y = returns.values();
    let n = y.len();
    let k = spec.p.max(spec.q);
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "need more than max(p,q) = {k} observations (got {n})"
        )));
    }
    let eps: Vec<f64> = y.iter().map(|v| v - params.mu).collect();
    let init_var = match init {
        VarianceInit::Fixed(v) => {
            if v <= 0.0 || v.is_nan() {
                return Err(Error::InvalidInput(format!(
                    "initial variance {v} must be positive"
                )));
            }
            v
        }
        VarianceInit::SampleVariance => {
            let mean = eps.iter().sum::<f64>() / n as f64;
            let var = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
            if var > 0.0 {
                var
            } else {
                // degenerate window; keep the recursion well-defined
                1e-8
            }
        }
    };

    match spec.family {
        GarchFamily::Garch | GarchFamily::Igarch => {
            let step = |sigma2: &[f64], eps: &[f64], t: usize| {
                let mut s = params.omega;
                for (i, a) in params.alpha.iter().enumerate() {
                    s += a * eps[t - 1 - i] * eps[t - 1 - i];
                }
                for (j, b) in params.beta.iter().enumerate() {
                    s += b * sigma2[t - 1 - j];
                }
                s
            };
            let mut sigma2 = vec![init_var; k];
            for t in k..n {
                let s = step(&sigma2, &eps, t);
                check_state(s, t)?;
                sigma2.push(s);
            }
            let forecast = step(&sigma2, &eps, n);
            check_state(forecast, n)?;
            Ok(GarchFilterOutput {
                sigma2,
                xi: None,
                forecast_sigma2: forecast,
                forecast_xi: None,
            })
        }
        GarchFamily::Egarch => {
            let e_abs = spec.dist.abs_mean();
            let mut log_s2 = vec![init_var.ln(); k];
            let mut sigma2 = vec![init_var; k];
            let step = |sigma2: &[f64], log_s2: &[f64], t: usize| {
                let mut ls = params.omega;
                for i in 0..spec.p {
                    let w = eps[t - 1 - i] / sigma2[t - 1 - i].sqrt();
                    ls += params.alpha[i] * w + params.gamma[i] * (w.abs() - e_abs);
                }
                for (j, b) in params.beta.iter().enumerate() {
                    ls += b * log_s2[t - 1 - j];
                }
                ls
            };
            // exp() leaving the representable range (overflow or underflow
            // to zero) means the log recursion has degenerated
            let check_exp = |s: f64, t: usize| -> Result<()> {
                if !s.is_finite() || s <= 0.0 {
                    return Err(Error::NonFinite {
                        context: "log-variance recursion".into(),
                        t,
                    });
                }
                Ok(())
            };
            for t in k..n {
                let ls = step(&sigma2, &log_s2, t);
                let s = ls.exp();
                check_exp(s, t)?;
                log_s2.push(ls);
                sigma2.push(s);
            }
            let forecast = step(&sigma2, &log_s2, n).exp();
            check_exp(forecast, n)?;
            Ok(GarchFilterOutput {
                sigma2,
                xi: None,
                forecast_sigma2: forecast,
                forecast_xi: None,
            })
        }
        GarchFamily::Aparch
        | GarchFamily::Avgarch
        | GarchFamily::GjrGarch
        | GarchFamily::Tgarch
        | GarchFamily::Ngarch => {
            let delta = effective_delta(spec, params);
            // state is sigma^delta
            let mut state = vec![init_var.powf(delta / 2.0); k];
            let beta: &[f64] = if spec.family == GarchFamily::Ngarch {
                &[]
            } else {
                &params.beta
            };
            let step = |state: &[f64], t: usize| {
                let mut s = params.omega;
                for i in 0..spec.p {
                    let e = eps[t - 1 - i];
                    let g = params.gamma_or_zero(i);
                    s += params.alpha[i] * (e.abs() - g * e).powf(delta);
                }
                for (j, b) in beta.iter().enumerate() {
                    s += b * state[t - 1 - j];
                }
                s
            };
            for t in k..n {
                let s = step(&state, t);
                check_state(s, t)?;
                state.push(s);
            }
            let forecast_state = step(&state, n);
            check_state(forecast_state, n)?;
            let sigma2: Vec<f64> = state.iter().map(|s| s.powf(2.0 / delta)).collect();
            Ok(GarchFilterOutput {
                sigma2,
                xi: None,
                forecast_sigma2: forecast_state.powf(2.0 / delta),
                forecast_xi: None,
            })
        }
        GarchFamily::Cgarch => {
            if spec.p.max(spec.q) < 1 {
                unreachable!();
            }
            let mut sigma2 = vec![init_var; k];
            let mut xi = vec![init_var; k];
            let xi_step = |sigma2: &[f64], xi: &[f64], t: usize| {
                params.omega
                    + params.rho * xi[t - 1]
                    + params.eta * (eps[t - 1] * eps[t - 1] - sigma2[t - 1])
            };
            let sigma_step = |sigma2: &[f64], xi: &[f64], xi_t: f64, t: usize| {
                let mut s = xi_t;
                for (i, a) in params.alpha.iter().enumerate() {
                    s += a * (eps[t - 1 - i] * eps[t - 1 - i] - xi[t - 1 - i]);
                }
                for (j, b) in params.beta.iter().enumerate() {
                    s += b * (sigma2[t - 1 - j] - xi[t - 1 - j]);
                }
                s
            };
            for t in k..n {
                let xi_t = xi_step(&sigma2, &xi, t);
                let s = sigma_step(&sigma2, &xi, xi_t, t);
                if s <= 0.0 || s.is_nan() || !xi_t.is_finite() {
                    return Err(Error::VarianceNonPositive { t });
                }
                xi.push(xi_t);
                sigma2.push(s);
            }
            let xi_f = xi_step(&sigma2, &xi, n);
            let s_f = sigma_step(&sigma2, &xi, xi_f, n);
            if s_f <= 0.0 || s_f.is_nan() || !xi_f.is_finite() {
                return Err(Error::VarianceNonPositive { t: n });
            }
            Ok(GarchFilterOutput {
                sigma2,
                xi: Some(xi),
                forecast_sigma2: s_f,
                forecast_xi: Some(xi_f),
            })
        }
    }
}

fn check_state(s: f64, t: usize) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::NonFinite {
            context: "conditional variance recursion".into(),
            t,
        });
    }
    if s <= 0.0 {
        return Err(Error::VarianceNonPositive { t });
    }
    Ok(())
}

/// κ_i = E[|z| - γ_i z]^δ under the standardized innovation density,
/// by quadrature. For a symmetric density this is
/// [(1-γ)^δ + (1+γ)^δ] ∫_0^∞ z^δ f(z) dz.
fn kappa(dist: &InnovationDist, gamma: f64, delta: f64) -> Result<f64> {
    if delta >= dist.max_moment_order() {
        return Err(Error::Constraint(format!(
            "E|z|^{delta} does not exist for {} innovations",
            dist.label()
        )));
    }
    if delta == 0.0 {
        return Ok(1.0);
    }
    let half_moment = integrate_half_line(|z| z.powf(delta) * dist.pdf(z), 400);
    Ok(((1.0 - gamma).powf(delta) + (1.0 + gamma).powf(delta)) * half_moment)
}

/// Volatility persistence of a spec/params pair.
///
/// GARCH-type: Σα + Σβ. EGARCH: Σβ. APARCH family: Σ α_i κ_i + Σ β_j with
/// κ_i integrated against the innovation density. CGARCH: the slower of the
/// transitory Σα+Σβ and the permanent ρ.
pub fn persistence(spec: &GarchSpec, params: &GarchParams) -> Result<f64> {
    validate_params(spec, params)?;
    match spec.family {
        GarchFamily::Garch | GarchFamily::Igarch => Ok(params.sum_alpha() + params.sum_beta()),
        GarchFamily::Egarch => Ok(params.sum_beta()),
        GarchFamily::Cgarch => Ok((params.sum_alpha() + params.sum_beta()).max(params.rho)),
        GarchFamily::Aparch
        | GarchFamily::Avgarch
        | GarchFamily::GjrGarch
        | GarchFamily::Tgarch
        | GarchFamily::Ngarch => {
            let delta = effective_delta(spec, params);
            let mut p = params.sum_beta();
            for (i, a) in params.alpha.iter().enumerate() {
                p += a * kappa(&spec.dist, params.gamma_or_zero(i), delta)?;
            }
            Ok(p)
        }
    }
}

/// Gaussian or standardized Student-t log-likelihood of the filtered model.
pub fn loglik(spec: &GarchSpec, params: &GarchParams, returns: &ReturnSeries) -> Result<f64> {
    let filt = filter_variance(spec, params, returns, VarianceInit::SampleVariance)?;
    Ok(loglik_given_path(spec, params, returns, &filt.sigma2))
}

fn loglik_given_path(
    spec: &GarchSpec,
    params: &GarchParams,
    returns: &ReturnSeries,
    sigma2: &[f64],
) -> f64 {
    returns
        .values()
        .iter()
        .zip(sigma2)
        .map(|(&y, &s2)| {
            let sd = s2.sqrt();
            spec.dist.logpdf((y - params.mu) / sd) - sd.ln()
        })
        .sum()
}

/// Simulate a return path from the model (with a burn-in that is discarded).
pub fn simulate(
    spec: &GarchSpec,
    params: &GarchParams,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    validate_params(spec, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n + burn_in;
    let k = spec.p.max(spec.q);

    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        match spec.dist {
            InnovationDist::Gaussian => rand_distr::StandardNormal.sample(rng),
            InnovationDist::StudentT { nu } => {
                let t: f64 = rand_distr::StudentT::new(nu).unwrap().sample(rng);
                t * ((nu - 2.0) / nu).sqrt()
            }
        }
    };

    // start at a reasonable unconditional level
    let persistence_sum: f64 = params.sum_alpha() + params.sum_beta();
    let base_var = match spec.family {
        GarchFamily::Garch if persistence_sum < 1.0 => params.omega / (1.0 - persistence_sum),
        GarchFamily::Egarch => (params.omega / (1.0 - params.sum_beta())).exp(),
        GarchFamily::Cgarch if params.rho < 1.0 => params.omega / (1.0 - params.rho),
        _ => params.omega.max(1e-4),
    };

    let delta = effective_delta(spec, params);
    let e_abs = spec.dist.abs_mean();
    let mut sigma2 = vec![base_var; k];
    let mut log_s2 = vec![base_var.ln(); k];
    let mut state = vec![base_var.powf(delta / 2.0); k];
    let mut xi = vec![base_var; k];
    let mut eps: Vec<f64> = (0..k).map(|_| base_var.sqrt() * draw(&mut rng)).collect();
    let mut out = Vec::with_capacity(total);
    for e in &eps {
        out.push(params.mu + e);
    }

    for t in k..total {
        let s2 = match spec.family {
            GarchFamily::Garch | GarchFamily::Igarch => {
                let mut s = params.omega;
                for (i, a) in params.alpha.iter().enumerate() {
                    s += a * eps[t - 1 - i] * eps[t - 1 - i];
                }
                for (j, b) in params.beta.iter().enumerate() {
                    s += b * sigma2[t - 1 - j];
                }
                s
            }
            GarchFamily::Egarch => {
                let mut ls = params.omega;
                for i in 0..spec.p {
                    let w = eps[t - 1 - i] / sigma2[t - 1 - i].sqrt();
                    ls += params.alpha[i] * w + params.gamma[i] * (w.abs() - e_abs);
                }
                for (j, b) in params.beta.iter().enumerate() {
                    ls += b * log_s2[t - 1 - j];
                }
                log_s2.push(ls);
                ls.exp()
            }
            GarchFamily::Aparch
            | GarchFamily::Avgarch
            | GarchFamily::GjrGarch
            | GarchFamily::Tgarch
            | GarchFamily::Ngarch => {
                let mut s = params.omega;
                for i in 0..spec.p {
                    let e = eps[t - 1 - i];
                    let g = params.gamma_or_zero(i);
                    s += params.alpha[i] * (e.abs() - g * e).powf(delta);
                }
                if spec.family != GarchFamily::Ngarch {
                    for (j, b) in params.beta.iter().enumerate() {
                        s += b * state[t - 1 - j];
                    }
                }
                state.push(s);
                s.powf(2.0 / delta)
            }
            GarchFamily::Cgarch => {
                let xi_t = params.omega
                    + params.rho * xi[t - 1]
                    + params.eta * (eps[t - 1] * eps[t - 1] - sigma2[t - 1]);
                let mut s = xi_t;
                for (i, a) in params.alpha.iter().enumerate() {
                    s += a * (eps[t - 1 - i] * eps[t - 1 - i] - xi[t - 1 - i]);
                }
                for (j, b) in params.beta.iter().enumerate() {
                    s += b * (sigma2[t - 1 - j] - xi[t - 1 - j]);
                }
                xi.push(xi_t);
                s
            }
        };
        if s2 <= 0.0 || !s2.is_finite() {
            return Err(Error::NonFinite {
                context: "simulation".into(),
                t,
            });
        }
        // EGARCH/APARCH state vectors grow in lockstep with sigma2
        sigma2.push(s2);
        let e = s2.sqrt() * draw(&mut rng);
        eps.push(e);
        out.push(params.mu + e);
    }
    Ok(out.split_off(burn_in))
}

/// Multi-start settings for the likelihood optimizers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n_starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n_starts: 5,
            max_iter: 300,
            seed: 0,
        }
    }
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct GarchFit {
    pub params: GarchParams,
    pub loglik: f64,
    pub converged: bool,
    pub filter: GarchFilterOutput,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn atanh(x: f64) -> f64 {
    0.5 * ((1.0 + x) / (1.0 - x)).ln()
}

/// Map sticks u_1..u_m to nonnegative fractions with sum < 1.
fn stick_break(u: &[f64]) -> Vec<f64> {
    let mut remaining = 1.0;
    let mut out = Vec::with_capacity(u.len());
    for &ui in u {
        let f = sigmoid(ui) * remaining;
        out.push(f);
        remaining -= f;
    }
    out
}

/// Inverse of [`stick_break`].
fn stick_break_inv(f: &[f64]) -> Vec<f64> {
    let mut remaining = 1.0;
    let mut out = Vec::with_capacity(f.len());
    for &fi in f {
        let v = (fi / remaining).clamp(1e-12, 1.0 - 1e-12);
        out.push(logit(v));
        remaining -= fi;
    }
    out
}

fn softmax(u: &[f64]) -> Vec<f64> {
    let m = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = u.iter().map(|x| (x - m).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// Unconstrained parameterization per family.
///
/// Positive parameters are logs, interval-bounded ones are logistic/tanh, and
/// the stationarity region Σα + Σβ < 1 is reached by stick-breaking (softmax
/// shares at the exact unit boundary for IGARCH).
struct Transform {
    spec: GarchSpec,
}

impl Transform {
    fn dim(&self) -> usize {
        let s = &self.spec;
        let mean = usize::from(s.include_mean);
        match s.family {
            GarchFamily::Garch | GarchFamily::Igarch | GarchFamily::Avgarch => {
                mean + 1 + s.p + s.q
            }
            GarchFamily::Egarch => mean + 1 + 2 * s.p + s.q,
            GarchFamily::Aparch => mean + 1 + 2 * s.p + s.q + 1,
            GarchFamily::GjrGarch | GarchFamily::Tgarch => mean + 1 + 2 * s.p + s.q,
            GarchFamily::Ngarch => mean + 1 + s.p + 1,
            GarchFamily::Cgarch => mean + 1 + s.p + s.q + 2,
        }
    }

    fn unpack(&self, u: &[f64]) -> GarchParams {
        let s = &self.spec;
        let mut pos = 0usize;
        let mut take = |k: usize| {
            let slice = &u[pos..pos + k];
            pos += k;
            slice.to_vec()
        };
        let mu = if s.include_mean { take(1)[0] } else { 0.0 };
        let omega_raw = take(1)[0];

        match s.family {
            GarchFamily::Garch | GarchFamily::Avgarch | GarchFamily::Cgarch => {
                let sticks = take(s.p + s.q);
                let fr = stick_break(&sticks);
                let alpha = fr[..s.p].to_vec();
                let beta = fr[s.p..].to_vec();
                let mut params = GarchParams::plain(mu, omega_raw.exp(), alpha, beta);
                if s.family == GarchFamily::Cgarch {
                    let extra = take(2);
                    let ab = params.sum_alpha() + params.sum_beta();
                    params.rho = ab + sigmoid(extra[0]) * (1.0 - ab);
                    params.eta = sigmoid(extra[1]) * params.sum_beta();
                }
                params
            }
            GarchFamily::Igarch => {
                let w = softmax(&take(s.p + s.q));
                GarchParams::plain(mu, omega_raw.exp(), w[..s.p].to_vec(), w[s.p..].to_vec())
            }
            GarchFamily::Egarch => {
                let alpha = take(s.p);
                let gamma = take(s.p);
                let beta_raw = take(s.q);
                let beta = if s.q == 1 {
                    vec![bounded_tanh(beta_raw[0])]
                } else {
                    // |sum beta| < 1 via a tanh total split by softmax shares
                    // (q-1 free logits, the last one pinned at 0)
                    let total = bounded_tanh(beta_raw[0]);
                    let mut logits = beta_raw[1..].to_vec();
                    logits.push(0.0);
                    softmax(&logits).iter().map(|sh| sh * total).collect()
                };
                GarchParams {
                    mu,
                    omega: omega_raw,
                    alpha,
                    beta,
                    gamma,
                    delta: 2.0,
                    rho: 0.0,
                    eta: 0.0,
                }
            }
            GarchFamily::Aparch | GarchFamily::GjrGarch | GarchFamily::Tgarch => {
                let sticks = take(s.p + s.q);
                let fr = stick_break(&sticks);
                let gamma_raw = take(s.p);
                let gamma: Vec<f64> = gamma_raw
                    .iter()
                    .map(|g| match s.family {
                        GarchFamily::GjrGarch => sigmoid(*g) * (1.0 - 1e-9),
                        _ => (1.0 - 1e-9) * g.tanh(),
                    })
                    .collect();
                let delta = if s.family == GarchFamily::Aparch {
                    4.0 * sigmoid(take(1)[0])
                } else {
                    s.family.fixed_delta().unwrap()
                };
                GarchParams {
                    mu,
                    omega: omega_raw.exp(),
                    alpha: fr[..s.p].to_vec(),
                    beta: fr[s.p..].to_vec(),
                    gamma,
                    delta,
                    rho: 0.0,
                    eta: 0.0,
                }
            }
            GarchFamily::Ngarch => {
                let sticks = take(s.p);
                let alpha = stick_break(&sticks);
                let delta = 4.0 * sigmoid(take(1)[0]);
                GarchParams {
                    mu,
                    omega: omega_raw.exp(),
                    alpha,
                    beta: vec![0.0; s.q],
                    gamma: Vec::new(),
                    delta,
                    rho: 0.0,
                    eta: 0.0,
                }
            }
        }
    }

    /// Moment-based start in unconstrained space.
    fn start(&self, sample_mean: f64, sample_var: f64) -> Vec<f64> {
        let s = &self.spec;
        let mut u = Vec::with_capacity(self.dim());
        if s.include_mean {
            u.push(sample_mean);
        }
        let target_persistence = 0.9;
        match s.family {
            GarchFamily::Garch | GarchFamily::Avgarch | GarchFamily::Cgarch => {
                u.push((sample_var * (1.0 - target_persistence)).max(1e-12).ln());
                let mut fr = vec![0.05 / s.p as f64; s.p];
                fr.extend(vec![0.85 / s.q as f64; s.q]);
                u.extend(stick_break_inv(&fr));
                if s.family == GarchFamily::Cgarch {
                    u.push(logit(0.9)); // rho toward the upper part of (a+b, 1)
                    u.push(logit(0.1)); // small eta
                }
            }
            GarchFamily::Igarch => {
                u.push((sample_var * 0.02).max(1e-12).ln());
                // softmax weights ~ (0.05/p .., 0.95/q ..)
                u.extend(std::iter::repeat_n((0.05 / s.p as f64).ln(), s.p));
                u.extend(std::iter::repeat_n((0.95 / s.q as f64).ln(), s.q));
            }
            GarchFamily::Egarch => {
                u.push(sample_var.max(1e-12).ln() * (1.0 - target_persistence));
                u.extend(std::iter::repeat_n(-0.05 / s.p as f64, s.p));
                u.extend(std::iter::repeat_n(0.1 / s.p as f64, s.p));
                u.push(atanh(target_persistence));
                u.extend(std::iter::repeat_n(0.0, s.q - 1));
            }
            GarchFamily::Aparch | GarchFamily::GjrGarch | GarchFamily::Tgarch => {
                let delta = s.family.fixed_delta().unwrap_or(1.5);
                u.push((sample_var.powf(delta / 2.0) * (1.0 - target_persistence)).max(1e-12).ln());
                let mut fr = vec![0.05 / s.p as f64; s.p];
                fr.extend(vec![0.85 / s.q as f64; s.q]);
                u.extend(stick_break_inv(&fr));
                let gamma_start = match s.family {
                    GarchFamily::GjrGarch => logit(0.3),
                    _ => atanh(0.2),
                };
                u.extend(std::iter::repeat_n(gamma_start, s.p));
                if s.family == GarchFamily::Aparch {
                    u.push(logit(1.5 / 4.0));
                }
            }
            GarchFamily::Ngarch => {
                u.push((sample_var * 0.5).max(1e-12).ln());
                u.extend(stick_break_inv(&vec![0.3 / s.p as f64; s.p]));
                u.push(logit(0.5)); // delta = 2
            }
        }
        debug_assert_eq!(u.len(), self.dim());
        u
    }
}

fn bounded_tanh(x: f64) -> f64 {
    (1.0 - 1e-9) * x.tanh()
}

/// Maximum-likelihood estimation with an unconstrained reparameterization,
/// BFGS with numerical gradients, and jittered moment-based multi-starts.
///
/// Deterministic given `optimizer.seed`; the reported log-likelihood is the
/// best over every start and never below any start point's value.
pub fn fit_garch(
    spec: &GarchSpec,
    returns: &ReturnSeries,
    optimizer: &OptimizerConfig,
) -> Result<GarchFit> {
    if returns.len() < 250 {
        log::warn!(
            "{}: fitting on {} observations; estimates below ~250 can be unstable",
            spec.label(),
            returns.len()
        );
    }
    let transform = Transform { spec: *spec };
    let y = returns.values();
    let n = y.len() as f64;
    let sample_mean = y.iter().sum::<f64>() / n;
    let sample_var = y.iter().map(|v| (v - sample_mean).powi(2)).sum::<f64>() / n;

    let objective = |u: &[f64]| -> f64 {
        let params = transform.unpack(u);
        match filter_variance(spec, &params, returns, VarianceInit::SampleVariance) {
            Ok(filt) => -loglik_given_path(spec, &params, returns, &filt.sigma2),
            Err(_) => f64::INFINITY,
        }
    };

    let base = transform.start(sample_mean, sample_var);
    let mut rng = ChaCha8Rng::seed_from_u64(optimizer.seed);
    let mut best: Option<OptimResult> = None;
    for start_idx in 0..optimizer.n_starts.max(1) {
        let start: Vec<f64> = if start_idx == 0 {
            base.clone()
        } else {
            base.iter()
                .map(|v| v + rng.gen_range(-0.5..0.5))
                .collect()
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
    validate_params(spec, &params)?;
    let filter = filter_variance(spec, &params, returns, VarianceInit::SampleVariance)?;
    let ll = loglik_given_path(spec, &params, returns, &filter.sigma2);
    Ok(GarchFit {
        params,
        loglik: ll,
        converged: best.converged,
        filter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gspec(family: GarchFamily) -> GarchSpec {
        GarchSpec::new(family, 1, 1, InnovationDist::Gaussian).unwrap()
    }

    fn series(values: Vec<f64>) -> ReturnSeries {
        ReturnSeries::from_values(values)
    }

    #[test]
    fn degenerate_recursion_is_constant() {
        let spec = gspec(GarchFamily::Garch);
        let params = GarchParams::plain(0.0, 0.1, vec![0.0], vec![0.0]);
        let y = series(vec![1.0, -2.0, 0.5, 3.0, -1.0]);
        let filt = filter_variance(&spec, &params, &y, VarianceInit::Fixed(0.1)).unwrap();
        assert!(filt.sigma2.iter().all(|&s| (s - 0.1).abs() < 1e-15));
        assert_relative_eq!(filt.forecast_sigma2, 0.1);
        // default initialization fixes everything after the first step too
        let filt = filter_variance(&spec, &params, &y, VarianceInit::SampleVariance).unwrap();
        assert!(filt.sigma2[1..].iter().all(|&s| (s - 0.1).abs() < 1e-15));
    }

    #[test]
    fn hand_recursion_step() {
        let spec = gspec(GarchFamily::Garch);
        let params = GarchParams::plain(0.0, 0.1, vec![0.05], vec![0.9]);
        let y = series(vec![2.0, 0.0]);
        let filt = filter_variance(&spec, &params, &y, VarianceInit::Fixed(1.0)).unwrap();
        assert_relative_eq!(filt.sigma2[0], 1.0);
        // 0.1 + 0.05*4 + 0.9*1 = 1.2
        assert_relative_eq!(filt.sigma2[1], 1.2, epsilon = 1e-15);
    }

    #[test]
    fn aparch_delta2_matches_garch_path() {
        let spec_ap = gspec(GarchFamily::Aparch);
        let spec_g = gspec(GarchFamily::Garch);
        let y = series(simulate(&spec_g, &GarchParams::plain(0.0, 0.1, vec![0.07], vec![0.9]), 500, 200, 3).unwrap());
        let params_g = GarchParams::plain(0.0, 0.1, vec![0.05], vec![0.9]);
        let mut params_ap = params_g.clone();
        params_ap.gamma = vec![0.0];
        params_ap.delta = 2.0;
        let f_g = filter_variance(&spec_g, &params_g, &y, VarianceInit::SampleVariance).unwrap();
        let f_ap = filter_variance(&spec_ap, &params_ap, &y, VarianceInit::SampleVariance).unwrap();
        let sup = f_g
            .sigma2
            .iter()
            .zip(&f_ap.sigma2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(sup <= 1e-12, "sup diff {sup}");
    }

    #[test]
    fn egarch_rejects_explosive_beta() {
        let spec = gspec(GarchFamily::Egarch);
        let params = GarchParams {
            mu: 0.0,
            omega: 0.0,
            alpha: vec![-0.1],
            beta: vec![1.1],
            gamma: vec![0.1],
            delta: 2.0,
            rho: 0.0,
            eta: 0.0,
        };
        let y = series(vec![0.1; 50]);
        assert!(filter_variance(&spec, &params, &y, VarianceInit::SampleVariance).is_err());
    }

    #[test]
    fn igarch_unit_sum_enforced() {
        let spec = gspec(GarchFamily::Igarch);
        let good = GarchParams::plain(0.0, 0.01, vec![0.1], vec![0.9]);
        assert!(validate_params(&spec, &good).is_ok());
        let bad = GarchParams::plain(0.0, 0.01, vec![0.1], vec![0.85]);
        assert!(validate_params(&spec, &bad).is_err());
    }

    #[test]
    fn persistence_values() {
        let spec = gspec(GarchFamily::Garch);
        let params = GarchParams::plain(0.0, 0.1, vec![0.05], vec![0.90]);
        assert_relative_eq!(persistence(&spec, &params).unwrap(), 0.95, epsilon = 1e-15);

        // APARCH Gaussian, delta = 2, gamma = 0: kappa = E[z^2] = 1
        let spec_ap = gspec(GarchFamily::Aparch);
        let mut p_ap = GarchParams::plain(0.0, 0.1, vec![0.05], vec![0.90]);
        p_ap.gamma = vec![0.0];
        p_ap.delta = 2.0;
        assert_relative_eq!(persistence(&spec_ap, &p_ap).unwrap(), 0.95, epsilon = 1e-7);

        // delta = 1: kappa = E|z| = sqrt(2/pi)
        p_ap.delta = 1.0;
        p_ap.alpha = vec![0.1];
        p_ap.beta = vec![0.8];
        let expected = 0.1 * (2.0 / std::f64::consts::PI).sqrt() + 0.8;
        assert_relative_eq!(persistence(&spec_ap, &p_ap).unwrap(), expected, epsilon = 1e-9);

        // EGARCH: sum of betas
        let spec_e = gspec(GarchFamily::Egarch);
        let p_e = GarchParams {
            mu: 0.0,
            omega: 0.0,
            alpha: vec![-0.05],
            beta: vec![0.93],
            gamma: vec![0.1],
            delta: 2.0,
            rho: 0.0,
            eta: 0.0,
        };
        assert_relative_eq!(persistence(&spec_e, &p_e).unwrap(), 0.93);
    }

    #[test]
    fn aparch_kappa_closed_forms_student_t() {
        // kappa for Student-t vs closed form; and missing moments rejected
        let dist = InnovationDist::StudentT { nu: 8.0 };
        let k = kappa(&dist, 0.0, 1.0).unwrap();
        assert_relative_eq!(k, 0.765466, epsilon = 1e-5);
        assert!(kappa(&dist, 0.0, 8.5).is_err());

        let spec = GarchSpec::new(GarchFamily::Aparch, 1, 1, dist).unwrap();
        let mut p = GarchParams::plain(0.0, 0.1, vec![0.1], vec![0.8]);
        p.gamma = vec![0.3];
        p.delta = 1.6;
        // closed form: [(1-g)^d + (1+g)^d]/2 * E|z|^d with
        // E|z|^d = ((nu-2))^{d/2} Gamma((d+1)/2)Gamma((nu-d)/2) / (sqrt(pi) Gamma(nu/2))
        use statrs::function::gamma::gamma;
        let (g, d, nu) = (0.3_f64, 1.6_f64, 8.0_f64);
        let eabs = (nu - 2.0).powf(d / 2.0) * gamma((d + 1.0) / 2.0) * gamma((nu - d) / 2.0)
            / (std::f64::consts::PI.sqrt() * gamma(nu / 2.0));
        let expected = 0.1 * (((1.0 - g).powf(d) + (1.0 + g).powf(d)) / 2.0) * eabs + 0.8;
        assert_relative_eq!(persistence(&spec, &p).unwrap(), expected, epsilon = 1e-7);
    }

    #[test]
    fn loglik_standard_normal_values() {
        // the density kernel itself: standard normal at zero
        assert_relative_eq!(
            InnovationDist::Gaussian.logpdf(0.0),
            -0.5 * (2.0 * std::f64::consts::PI).ln(),
            epsilon = 1e-15
        );
        // constant unit-variance model on data with unit sample variance:
        // sigma_t^2 = 1 everywhere, so loglik = -ln(2 pi) - 1
        let spec = gspec(GarchFamily::Garch);
        let params = GarchParams::plain(0.0, 1.0, vec![0.0], vec![0.0]);
        let y = series(vec![1.0, -1.0]);
        let ll = loglik(&spec, &params, &y).unwrap();
        assert_relative_eq!(
            ll,
            -(2.0 * std::f64::consts::PI).ln() - 1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn loglik_location_invariance() {
        let spec = gspec(GarchFamily::Garch).with_mean();
        let mut params = GarchParams::plain(0.3, 0.2, vec![0.08], vec![0.85]);
        let y = series(vec![0.5, -1.0, 2.0, 0.3, -0.7, 1.1, 0.0, -0.2, 0.9, -1.4]);
        let base = loglik(&spec, &params, &y).unwrap();
        params.mu += 5.0;
        let shifted_series = series(y.values().iter().map(|v| v + 5.0).collect());
        let shifted = loglik(&spec, &params, &shifted_series).unwrap();
        assert_relative_eq!(base, shifted, epsilon = 1e-10);
    }

    #[test]
    fn student_t_loglik_gaussian_limit() {
        let spec_t = GarchSpec::new(
            GarchFamily::Garch,
            1,
            1,
            InnovationDist::StudentT { nu: 1e6 },
        )
        .unwrap();
        let spec_n = gspec(GarchFamily::Garch);
        let params = GarchParams::plain(0.0, 0.2, vec![0.05], vec![0.9]);
        let y = series(vec![0.5, -1.0, 2.0, 0.3, -0.7, 1.1, 0.0, -0.2, 0.9, -1.4]);
        let ll_t = loglik(&spec_t, &params, &y).unwrap();
        let ll_n = loglik(&spec_n, &params, &y).unwrap();
        assert!((ll_t - ll_n).abs() < 1e-5, "{} vs {}", ll_t, ll_n);
    }

    #[test]
    fn long_simulation_matches_unconditional_variance() {
        let spec = gspec(GarchFamily::Garch);
        let params = GarchParams::plain(0.0, 0.1, vec![0.05], vec![0.9]);
        let y = simulate(&spec, &params, 1_000_000, 1000, 77).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        let expected = 0.1 / (1.0 - 0.95);
        assert!(
            (var - expected).abs() / expected < 0.05,
            "sample variance {var} vs {expected}"
        );
    }

    #[test]
    fn fit_dominates_trivial_feasible_point() {
        let spec = gspec(GarchFamily::Garch);
        // i.i.d. Gaussian data
        let y = series(simulate(&spec, &GarchParams::plain(0.0, 1.0, vec![0.0], vec![0.0]), 600, 100, 5).unwrap());
        let n = y.len() as f64;
        let var = y.values().iter().map(|v| v * v).sum::<f64>() / n;
        let fit = fit_garch(&spec, &y, &OptimizerConfig::default()).unwrap();
        let trivial = GarchParams::plain(0.0, var, vec![0.0], vec![0.0]);
        let trivial_ll = loglik(&spec, &trivial, &y).unwrap();
        assert!(
            fit.loglik >= trivial_ll - 1e-6,
            "fit {} vs constant-variance {}",
            fit.loglik,
            trivial_ll
        );
    }

    #[test]
    fn igarch_fit_sums_to_one() {
        let spec = gspec(GarchFamily::Garch);
        let params = GarchParams::plain(0.0, 0.1, vec![0.1], vec![0.85]);
        let y = series(simulate(&spec, &params, 1500, 300, 9).unwrap());
        let ispec = gspec(GarchFamily::Igarch);
        let fit = fit_garch(&ispec, &y, &OptimizerConfig::default()).unwrap();
        let total = fit.params.sum_alpha() + fit.params.sum_beta();
        assert!((total - 1.0).abs() < 1e-12, "alpha+beta = {total}");
    }

    #[test]
    fn garch_recovery_single_seed() {
        let spec = gspec(GarchFamily::Garch);
        let truth = GarchParams::plain(0.0, 0.1, vec![0.05], vec![0.90]);
        let y = series(simulate(&spec, &truth, 5000, 500, 42).unwrap());
        let fit = fit_garch(&spec, &y, &OptimizerConfig::default()).unwrap();
        assert!((fit.params.omega - 0.1).abs() <= 0.05, "omega {}", fit.params.omega);
        assert!((fit.params.alpha[0] - 0.05).abs() <= 0.05, "alpha {}", fit.params.alpha[0]);
        assert!((fit.params.beta[0] - 0.90).abs() <= 0.05, "beta {}", fit.params.beta[0]);
    }

    #[test]
    fn scale_equivariance_of_fit() {
        let spec = gspec(GarchFamily::Garch);
        let truth = GarchParams::plain(0.0, 0.1, vec![0.08], vec![0.88]);
        let base = simulate(&spec, &truth, 3000, 300, 21).unwrap();
        let scaled: Vec<f64> = base.iter().map(|v| v * 10.0).collect();
        let fit_a = fit_garch(&spec, &series(base), &OptimizerConfig::default()).unwrap();
        let fit_b = fit_garch(&spec, &series(scaled), &OptimizerConfig::default()).unwrap();
        // alpha/beta invariant, omega scales by c^2
        assert!((fit_a.params.alpha[0] - fit_b.params.alpha[0]).abs() < 0.02);
        assert!((fit_a.params.beta[0] - fit_b.params.beta[0]).abs() < 0.02);
        assert_relative_eq!(
            fit_b.params.omega / fit_a.params.omega,
            100.0,
            max_relative = 0.2
        );
    }

    #[test]
    fn every_family_fits_and_validates() {
        // exercises each family's unconstrained transform end to end
        let sim_spec = gspec(GarchFamily::Garch);
        let sim_params = GarchParams::plain(0.05, 0.1, vec![0.08], vec![0.88]);
        let y = series(simulate(&sim_spec, &sim_params, 600, 200, 31).unwrap());
        let opt = OptimizerConfig {
            n_starts: 2,
            max_iter: 120,
            seed: 31,
        };
        for family in [
            GarchFamily::Garch,
            GarchFamily::Igarch,
            GarchFamily::Egarch,
            GarchFamily::Aparch,
            GarchFamily::Avgarch,
            GarchFamily::GjrGarch,
            GarchFamily::Tgarch,
            GarchFamily::Ngarch,
            GarchFamily::Cgarch,
        ] {
            let spec = GarchSpec::new(family, 1, 1, InnovationDist::Gaussian)
                .unwrap()
                .with_mean();
            let fit = fit_garch(&spec, &y, &opt)
                .unwrap_or_else(|e| panic!("{family:?} failed to fit: {e}"));
            assert!(fit.loglik.is_finite(), "{family:?}");
            validate_params(&spec, &fit.params).unwrap();
            assert!(fit.filter.sigma2.iter().all(|s| *s > 0.0), "{family:?}");
            assert!(fit.filter.forecast_sigma2 > 0.0, "{family:?}");
            // persistence is computable for every fitted model
            let p = persistence(&spec, &fit.params).unwrap();
            assert!(p.is_finite(), "{family:?} persistence {p}");
        }
    }

    #[test]
    fn cgarch_filter_stays_positive() {
        let spec = gspec(GarchFamily::Cgarch);
        let mut params = GarchParams::plain(0.0, 0.02, vec![0.05], vec![0.85]);
        params.rho = 0.97;
        params.eta = 0.05;
        let gspec_sim = gspec(GarchFamily::Garch);
        let y = series(simulate(&gspec_sim, &GarchParams::plain(0.0, 0.1, vec![0.05], vec![0.9]), 800, 100, 13).unwrap());
        let filt = filter_variance(&spec, &params, &y, VarianceInit::SampleVariance).unwrap();
        assert!(filt.sigma2.iter().all(|&s| s > 0.0));
        assert!(filt.xi.unwrap().iter().all(|v| v.is_finite()));
    }
}
