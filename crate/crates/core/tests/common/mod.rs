//! Deliberately naive reference implementation of the sequential MCS
//! procedure: plain loops, no shared precomputation, recomputing every
//! quantity from the raw loss rows at every step. Only the bootstrap index
//! sets are shared with the engine under test, since identical resampling is
//! part of the procedure's definition.

// naive on purpose: plain index loops everywhere
#![allow(clippy::needless_range_loop)]

use varmcs_core::mcs::{bootstrap_indices, McsStatistic};

pub struct NaiveMcs {
    pub eliminated: Vec<usize>,
    pub survivors: Vec<usize>,
    pub survivor_p_value: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn studentize(m: f64, var: f64) -> f64 {
    if var > 0.0 {
        m / var.sqrt()
    } else if m == 0.0 {
        0.0
    } else if m > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// One EPA test on the current set: observed statistic, p-value, worst model.
fn naive_test(
    losses: &[Vec<f64>],
    current: &[usize],
    indices: &[Vec<u32>],
    statistic: McsStatistic,
) -> (f64, f64, usize) {
    let n = losses[0].len();
    let b = indices.len();
    let k = current.len();

    // pairwise differential series, means, replicate means, variances
    let mut dbar = vec![vec![0.0; k]; k];
    let mut dstar = vec![vec![vec![0.0; b]; k]; k];
    let mut var = vec![vec![0.0; k]; k];
    for a in 0..k {
        for c in 0..k {
            if a == c {
                continue;
            }
            let d: Vec<f64> = (0..n)
                .map(|t| losses[current[a]][t] - losses[current[c]][t])
                .collect();
            dbar[a][c] = mean(&d);
            for (rep, idx) in indices.iter().enumerate() {
                let resampled: Vec<f64> = idx.iter().map(|&t| d[t as usize]).collect();
                dstar[a][c][rep] = mean(&resampled);
            }
            let mut acc = 0.0;
            for rep in 0..b {
                let dev = dstar[a][c][rep] - dbar[a][c];
                acc += dev * dev;
            }
            var[a][c] = acc / b as f64;
        }
    }

    match statistic {
        McsStatistic::TR => {
            let mut observed = 0.0_f64;
            for a in 0..k {
                for c in 0..k {
                    if a != c {
                        observed = observed.max(studentize(dbar[a][c], var[a][c]).abs());
                    }
                }
            }
            let mut exceed = 0usize;
            for rep in 0..b {
                let mut t_star = 0.0_f64;
                for a in 0..k {
                    for c in 0..k {
                        if a != c && var[a][c] > 0.0 {
                            t_star = t_star
                                .max(((dstar[a][c][rep] - dbar[a][c]) / var[a][c].sqrt()).abs());
                        }
                    }
                }
                if t_star >= observed {
                    exceed += 1;
                }
            }
            let p = exceed as f64 / b as f64;
            // elimination rule: arg max over i of sup_j t_ij
            let mut worst = 0usize;
            let mut worst_score = f64::NEG_INFINITY;
            for a in 0..k {
                let mut score = f64::NEG_INFINITY;
                for c in 0..k {
                    if a != c {
                        score = score.max(studentize(dbar[a][c], var[a][c]));
                    }
                }
                if score > worst_score {
                    worst_score = score;
                    worst = a;
                }
            }
            (observed, p, current[worst])
        }
        McsStatistic::Tmax => {
            // average differential series per model
            let km1 = (k - 1) as f64;
            let mut dbar_idot = vec![0.0; k];
            let mut dstar_idot = vec![vec![0.0; b]; k];
            let mut var_idot = vec![0.0; k];
            for a in 0..k {
                let series: Vec<f64> = (0..n)
                    .map(|t| {
                        let mut acc = 0.0;
                        for c in 0..k {
                            if c != a {
                                acc += losses[current[a]][t] - losses[current[c]][t];
                            }
                        }
                        acc / km1
                    })
                    .collect();
                dbar_idot[a] = mean(&series);
                for (rep, idx) in indices.iter().enumerate() {
                    let resampled: Vec<f64> = idx.iter().map(|&t| series[t as usize]).collect();
                    dstar_idot[a][rep] = mean(&resampled);
                }
                let mut acc = 0.0;
                for rep in 0..b {
                    let dev = dstar_idot[a][rep] - dbar_idot[a];
                    acc += dev * dev;
                }
                var_idot[a] = acc / b as f64;
            }
            let mut observed = f64::NEG_INFINITY;
            for a in 0..k {
                observed = observed.max(studentize(dbar_idot[a], var_idot[a]));
            }
            let mut exceed = 0usize;
            for rep in 0..b {
                let mut t_star = f64::NEG_INFINITY;
                for a in 0..k {
                    let t = if var_idot[a] > 0.0 {
                        (dstar_idot[a][rep] - dbar_idot[a]) / var_idot[a].sqrt()
                    } else {
                        0.0
                    };
                    t_star = t_star.max(t);
                }
                if t_star >= observed {
                    exceed += 1;
                }
            }
            let p = exceed as f64 / b as f64;
            let mut worst = 0usize;
            let mut worst_score = f64::NEG_INFINITY;
            for a in 0..k {
                let score = studentize(dbar_idot[a], var_idot[a]);
                if score > worst_score {
                    worst_score = score;
                    worst = a;
                }
            }
            (observed, p, current[worst])
        }
    }
}

pub fn naive_mcs(
    losses: &[Vec<f64>],
    alpha: f64,
    b: usize,
    statistic: McsStatistic,
    block_length: usize,
    seed: u64,
) -> NaiveMcs {
    let m = losses.len();
    let n = losses[0].len();
    let indices = bootstrap_indices(n, b, block_length, seed).expect("valid block length");
    let mut current: Vec<usize> = (0..m).collect();
    let mut eliminated = Vec::new();
    let mut running_max = 0.0_f64;
    let survivor_p_value;
    loop {
        if current.len() == 1 {
            survivor_p_value = 1.0;
            break;
        }
        let (_observed, p, worst) = naive_test(losses, &current, &indices, statistic);
        running_max = running_max.max(p);
        if p > alpha {
            survivor_p_value = running_max.min(1.0);
            break;
        }
        eliminated.push(worst);
        current.retain(|&i| i != worst);
    }
    NaiveMcs {
        eliminated,
        survivors: current,
        survivor_p_value,
    }
}
