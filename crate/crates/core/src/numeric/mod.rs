//! Shared numerical utilities: quantiles, quadrature, small dense solves.

// index-based loops mirror the linear-algebra subscripts
#![allow(clippy::needless_range_loop)]

pub mod optim;
pub mod special;

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" convention: h = (n-1)p on the sorted sample).
pub fn empirical_quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&p), "quantile level outside [0,1]");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre polynomial; standard construction.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Legendre polynomial P_n(x) and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                weights[i] = w;
                weights[n - 1 - i] = w;
                break;
            }
        }
    }
    (nodes, weights)
}

/// ∫_0^∞ g(z) dz via the substitution z = t/(1-t) and Gauss-Legendre on [0,1].
///
/// Accurate for smooth integrands with at least power-law decay.
pub fn integrate_half_line<F: Fn(f64) -> f64>(g: F, n_nodes: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n_nodes);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        // map [-1,1] -> (0,1)
        let t = 0.5 * (x + 1.0);
        let one_minus = 1.0 - t;
        let z = t / one_minus;
        let jac = 1.0 / (one_minus * one_minus);
        acc += w * 0.5 * g(z) * jac;
    }
    acc
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
///
/// Meant for the small systems that appear in AR least squares (<= 11x11).
/// Returns `None` when the matrix is numerically singular.
pub fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Invert a symmetric positive definite 2x2 matrix [[a, b], [b, c]].
pub fn invert_sym2(a: f64, b: f64, c: f64) -> Option<[[f64; 2]; 2]> {
    let det = a * c - b * b;
    if det <= 0.0 || !det.is_finite() {
        return None;
    }
    Some([[c / det, -b / det], [-b / det, a / det]])
}

/// Symmetric positive definite square root of a 2x2 matrix [[a, b], [b, c]].
pub fn sqrt_sym2(a: f64, b: f64, c: f64) -> Option<[[f64; 2]; 2]> {
    // eigendecomposition of a symmetric 2x2
    let tr = a + c;
    let det = a * c - b * b;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    if l1 <= 0.0 || l2 <= 0.0 {
        return None;
    }
    // sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
    let s = det.sqrt();
    let t = (tr + 2.0 * s).sqrt();
    Some([[(a + s) / t, b / t], [b / t, (c + s) / t]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantile_interpolates() {
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(empirical_quantile(&v, 0.0), 1.0);
        assert_relative_eq!(empirical_quantile(&v, 1.0), 4.0);
        assert_relative_eq!(empirical_quantile(&v, 0.5), 2.5);
        // h = 3*0.25 = 0.75 -> 1 + 0.75*(2-1)
        assert_relative_eq!(empirical_quantile(&v, 0.25), 1.75);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // exact for polynomials up to degree 15
        let int_x2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        assert_relative_eq!(int_x2, 2.0 / 3.0, epsilon = 1e-12);
        let int_x6: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(6)).sum();
        assert_relative_eq!(int_x6, 2.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn half_line_gaussian_moment() {
        // ∫_0^∞ z φ(z) dz = 1/sqrt(2π)
        let g = |z: f64| z * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let result = integrate_half_line(g, 400);
        assert_relative_eq!(result, 1.0 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn linear_solve_roundtrip() {
        let a = vec![
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ];
        let x_true = [1.0, -2.0, 3.0];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i][j] * x_true[j]).sum())
            .collect();
        let x = solve_linear(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert_relative_eq!(xi, ti, epsilon = 1e-10);
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_linear(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn sym2_sqrt_squares_back() {
        let (a, b, c) = (2.0, 0.3, 1.0);
        let s = sqrt_sym2(a, b, c).unwrap();
        let aa = s[0][0] * s[0][0] + s[0][1] * s[1][0];
        let bb = s[0][0] * s[0][1] + s[0][1] * s[1][1];
        let cc = s[1][0] * s[0][1] + s[1][1] * s[1][1];
        assert_relative_eq!(aa, a, epsilon = 1e-12);
        assert_relative_eq!(bb, b, epsilon = 1e-12);
        assert_relative_eq!(cc, c, epsilon = 1e-12);
    }
}
