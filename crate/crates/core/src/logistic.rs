//! Maximum-likelihood logistic regression by iteratively reweighted least
//! squares (Newton's method with step halving).

use alloc::vec::Vec;

use crate::linalg::PivotedLdl;

pub const GRADIENT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50;
const COLUMN_RANK_TOL: f64 = 1e-10;
const SEPARATION_ETA: f64 = 18.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    /// One coefficient per design column; dependent columns are pinned at zero.
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Infinity norm of the score at the returned coefficients.
    pub gradient_norm: f64,
    pub dropped_columns: Vec<usize>,
    /// Set when fitted probabilities reach 0 or 1 numerically, the signature
    /// of (quasi-)separation and diverging coefficients.
    pub separation: bool,
}

impl LogisticFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(dot(row, &self.coefficients))
    }
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + e^eta)` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + libm::log1p(libm::exp(-eta))
    } else {
        libm::log1p(libm::exp(eta))
    }
}

fn log_likelihood(x: &[f64], y: &[f64], p: usize, beta: &[f64]) -> f64 {
    x.chunks_exact(p)
        .zip(y)
        .map(|(row, &yi)| {
            let eta = dot(row, beta);
            yi * eta - softplus(eta)
        })
        .sum()
}

/// Fits `P(y = 1 | x) = sigmoid(x^T beta)`; `x` is row-major with `p` columns.
pub fn fit_logistic(x: &[f64], y: &[f64], p: usize) -> LogisticFit {
    assert_eq!(x.len(), y.len() * p);

    // Pin columns that are linearly dependent on the others.
    let mut gram = alloc::vec![0.0; p * p];
    for row in x.chunks_exact(p) {
        for a in 0..p {
            for b in 0..p {
                gram[a * p + b] += row[a] * row[b];
            }
        }
    }
    let dropped = PivotedLdl::factor(&gram, p, COLUMN_RANK_TOL).dependent_columns();
    let keep: Vec<usize> = (0..p).filter(|c| !dropped.contains(c)).collect();
    let q = keep.len();
    let xr: Vec<f64> = x.chunks_exact(p).flat_map(|row| keep.iter().map(move |&c| row[c])).collect();

    let mut beta = alloc::vec![0.0; q];
    let mut ll = log_likelihood(&xr, y, q, &beta);
    let mut grad = alloc::vec![0.0; q];
    let mut hess = alloc::vec![0.0; q * q];
    let mut iterations = 0;
    let mut converged = false;
    let mut gnorm;
    loop {
        grad.iter_mut().for_each(|g| *g = 0.0);
        hess.iter_mut().for_each(|h| *h = 0.0);
        for (row, &yi) in xr.chunks_exact(q.max(1)).zip(y) {
            if q == 0 {
                break;
            }
            let mu = sigmoid(dot(row, &beta));
            let w = mu * (1.0 - mu);
            for a in 0..q {
                grad[a] += row[a] * (yi - mu);
                let wa = w * row[a];
                for b in 0..=a {
                    hess[a * q + b] += wa * row[b];
                }
            }
        }
        for a in 0..q {
            for b in a + 1..q {
                hess[a * q + b] = hess[b * q + a];
            }
        }
        gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm <= GRADIENT_TOL {
            converged = true;
            break;
        }
        if iterations >= MAX_ITERATIONS {
            break;
        }
        iterations += 1;
        let step = match PivotedLdl::factor(&hess, q, 1e-14).solve(&grad) {
            Some(s) => s,
            None => break,
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            let trial_ll = log_likelihood(&xr, y, q, &trial);
            if trial_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                beta = trial;
                ll = trial_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let max_eta = xr.chunks_exact(q.max(1)).map(|row| dot(row, &beta).abs()).fold(0.0, f64::max);
    let mut coefficients = alloc::vec![0.0; p];
    for (k, &c) in keep.iter().enumerate() {
        coefficients[c] = beta[k];
    }
    LogisticFit {
        coefficients,
        converged,
        iterations,
        log_likelihood: ll,
        gradient_norm: gnorm,
        dropped_columns: dropped,
        separation: max_eta > SEPARATION_ETA,
    }
}
