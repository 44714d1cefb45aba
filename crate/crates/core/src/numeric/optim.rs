//! Derivative-free and quasi-Newton minimisers used by the model estimators.
//!
//! Both routines are deterministic given their inputs; all multi-start
//! randomness is generated by the callers from explicit seeds.

// index-based loops mirror the matrix subscripts
#![allow(clippy::needless_range_loop)]

/// Outcome of a local minimisation.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Central-difference gradient.
pub fn numerical_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(&xp);
        xp[i] = orig - h;
        let fm = f(&xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// BFGS minimisation with numerical gradients and Armijo backtracking.
///
/// `f` may return non-finite values away from the feasible region; the line
/// search treats those as failed steps and shrinks.
pub fn bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], max_iter: usize) -> OptimResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return OptimResult {
            x,
            fx,
            iterations: 0,
            converged: false,
        };
    }
    let mut g = numerical_gradient(&f, &x);
    // inverse Hessian approximation
    let mut h_inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let grad_norm = g.iter().fold(0.0_f64, |m, gi| m.max(gi.abs()));
        if grad_norm < 1e-7 {
            converged = true;
            break;
        }
        // direction d = -H g
        let mut d = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                d[i] -= h_inv[i][j] * g[j];
            }
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();
        if slope >= 0.0 {
            // reset to steepest descent when curvature information degenerates
            for i in 0..n {
                for j in 0..n {
                    h_inv[i][j] = if i == j { 1.0 } else { 0.0 };
                }
                d[i] = -g[i];
            }
            slope = -g.iter().map(|gi| gi * gi).sum::<f64>();
        }

        // backtracking Armijo line search
        let mut step = 1.0;
        let mut x_new = x.clone();
        let mut f_new = f64::INFINITY;
        let mut ok = false;
        for _ in 0..50 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            break;
        }

        let g_new = numerical_gradient(&f, &x_new);
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(si, yi)| si * yi).sum();

        let f_change = (fx - f_new).abs();
        x = x_new.clone();
        fx = f_new;
        g = g_new;

        if sy > 1e-10 {
            // BFGS update of the inverse Hessian
            let rho = 1.0 / sy;
            let mut hy = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    hy[i] += h_inv[i][j] * y[j];
                }
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(yi, hyi)| yi * hyi).sum();
            for i in 0..n {
                for j in 0..n {
                    h_inv[i][j] += rho * rho * (sy + yhy) * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }

        if f_change < 1e-12 * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
    }

    OptimResult {
        x,
        fx,
        iterations: iter,
        converged,
    }
}

/// Nelder-Mead simplex minimisation (standard coefficients).
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], max_iter: usize) -> OptimResult {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    // initial simplex: x0 and per-coordinate perturbations
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        let step = if v[i].abs() > 1e-8 { 0.05 * v[i].abs() } else { 0.05 };
        v[i] += step;
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iter = 0;
    let mut converged = false;
    while iter < max_iter {
        iter += 1;
        // order ascending by f (non-finite last)
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| match (fvals[a].is_nan(), fvals[b].is_nan()) {
            (true, true) => std::cmp::Ordering::Equal,
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            _ => fvals[a].partial_cmp(&fvals[b]).unwrap(),
        });
        let simplex_sorted: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let f_sorted: Vec<f64> = order.iter().map(|&i| fvals[i]).collect();
        simplex = simplex_sorted;
        fvals = f_sorted;

        let f_best = fvals[0];
        let f_worst = fvals[n];
        if f_worst.is_finite() && (f_worst - f_best).abs() < 1e-12 * (1.0 + f_best.abs()) {
            converged = true;
            break;
        }

        // centroid of all but worst
        let mut centroid = vec![0.0; n];
        for v in simplex.iter().take(n) {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[n][i]))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < fvals[0] {
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (reflect[i] - centroid[i]))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[n] = expand;
                fvals[n] = f_expand;
            } else {
                simplex[n] = reflect;
                fvals[n] = f_reflect;
            }
        } else if f_reflect < fvals[n - 1] {
            simplex[n] = reflect;
            fvals[n] = f_reflect;
        } else {
            // contraction (outside if the reflected point improved on the worst)
            let base = if f_reflect < fvals[n] { &reflect } else { &simplex[n] };
            let contract: Vec<f64> = (0..n)
                .map(|i| centroid[i] + rho * (base[i] - centroid[i]))
                .collect();
            let f_contract = f(&contract);
            if f_contract < fvals[n].min(f_reflect) {
                simplex[n] = contract;
                fvals[n] = f_contract;
            } else {
                // shrink toward the best vertex
                let best = simplex[0].clone();
                for v in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        v[i] = best[i] + sigma * (v[i] - best[i]);
                    }
                }
                for (v, fv) in simplex.iter().zip(fvals.iter_mut()).skip(1) {
                    *fv = f(v);
                }
            }
        }
    }

    let best = fvals
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    OptimResult {
        x: simplex[best].clone(),
        fx: fvals[best],
        iterations: iter,
        converged,
    }
}
