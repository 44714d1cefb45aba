//! Special functions not covered by statrs: trigamma and a Newton-polished
//! Student-t quantile.

use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

/// Trigamma function ψ'(x) for x > 0.
///
/// Recurrence ψ'(x) = ψ'(x+1) + 1/x² up to x >= 6, then the asymptotic
/// expansion. Accurate to ~1e-12 over the range used here.
pub fn trigamma(x: f64) -> f64 {
    assert!(x > 0.0, "trigamma requires x > 0");
    let mut z = x;
    let mut acc = 0.0;
    while z < 10.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // 1/z + 1/(2z^2) + sum B_{2k} / z^{2k+1}
    let series = inv
        + 0.5 * inv2
        + inv2
            * inv
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0
                        - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0)))));
    acc + series
}

/// Standard normal quantile.
pub fn std_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile level outside (0,1)");
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Standard normal log density.
pub fn std_normal_logpdf(z: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
}

/// Quantile of the standard Student-t with `nu` degrees of freedom.
///
/// statrs' generic inversion is polished with a few Newton steps on the
/// exact cdf/pdf so the result holds to near machine precision.
pub fn student_t_quantile(p: f64, nu: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile level outside (0,1)");
    assert!(nu > 0.0, "degrees of freedom must be positive");
    let dist = StudentsT::new(0.0, 1.0, nu).unwrap();
    let mut x = dist.inverse_cdf(p);
    if !x.is_finite() {
        x = std_normal_quantile(p);
    }
    for _ in 0..4 {
        let f = dist.cdf(x) - p;
        let d = dist.pdf(x);
        if d <= 0.0 {
            break;
        }
        let step = f / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() < 1e-14 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Log density of the standard Student-t with `nu` degrees of freedom.
pub fn student_t_logpdf(x: f64, nu: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    ln_gamma((nu + 1.0) / 2.0)
        - ln_gamma(nu / 2.0)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - (nu + 1.0) / 2.0 * (x * x / nu).ln_1p()
}
