//! Innovation distributions for the ARCH-family models.
//!
//! Innovations are standardized to unit variance, so the Student-t case uses
//! the scaled variate z = t·sqrt((ν-2)/ν) and requires ν > 2.

use crate::error::{Error, Result};
use crate::numeric::special::{
    std_normal_logpdf, std_normal_quantile, student_t_logpdf, student_t_quantile,
};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InnovationDist {
    Gaussian,
    #[serde(rename = "student_t")]
    StudentT { nu: f64 },
}

impl InnovationDist {
    /// Validate the finite-variance requirement for standardized innovations.
    pub fn validate(&self) -> Result<()> {
        if let InnovationDist::StudentT { nu } = self {
            if !nu.is_finite() || *nu <= 2.0 {
                return Err(Error::Constraint(format!(
                    "Student-t innovations need nu > 2 for unit-variance standardization (got {nu})"
                )));
            }
        }
        Ok(())
    }

    /// Log density of the unit-variance standardized innovation at z.
    pub fn logpdf(&self, z: f64) -> f64 {
        match self {
            InnovationDist::Gaussian => std_normal_logpdf(z),
            InnovationDist::StudentT { nu } => {
                // z = t * sqrt((nu-2)/nu)  =>  t = z * sqrt(nu/(nu-2))
                let scale = (nu / (nu - 2.0)).sqrt();
                student_t_logpdf(z * scale, *nu) + scale.ln()
            }
        }
    }

    /// Density of the standardized innovation at z.
    pub fn pdf(&self, z: f64) -> f64 {
        self.logpdf(z).exp()
    }

    /// Quantile of the standardized innovation.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            InnovationDist::Gaussian => std_normal_quantile(p),
            InnovationDist::StudentT { nu } => {
                student_t_quantile(p, *nu) * ((nu - 2.0) / nu).sqrt()
            }
        }
    }

    /// E|z| of the standardized innovation, in closed form.
    ///
    /// Gaussian: sqrt(2/π). Student-t (unit variance):
    /// 2 sqrt(ν-2) Γ((ν+1)/2) / (sqrt(π) (ν-1) Γ(ν/2)).
    pub fn abs_mean(&self) -> f64 {
        match self {
            InnovationDist::Gaussian => (2.0 / std::f64::consts::PI).sqrt(),
            InnovationDist::StudentT { nu } => {
                let log_num = 0.5 * (nu - 2.0).ln() + ln_gamma((nu + 1.0) / 2.0);
                let log_den =
                    0.5 * std::f64::consts::PI.ln() + (nu - 1.0).ln() + ln_gamma(nu / 2.0);
                2.0 * (log_num - log_den).exp()
            }
        }
    }

    /// Highest finite absolute moment order (exclusive upper bound).
    pub fn max_moment_order(&self) -> f64 {
        match self {
            InnovationDist::Gaussian => f64::INFINITY,
            InnovationDist::StudentT { nu } => *nu,
        }
    }

    pub fn label(&self) -> String {
        match self {
            InnovationDist::Gaussian => "norm".to_string(),
            InnovationDist::StudentT { nu } => format!("std({nu})"),
        }
    }
}
