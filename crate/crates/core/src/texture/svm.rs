//! Binary soft-margin SVM with an RBF kernel, solved by SMO.
//!
//! The dual problem
//!
//! ```text
//! min_a  1/2 a'Qa - e'a    s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! is solved two variables at a time, always updating the maximal violating
//! pair.

use crate::error::{Error, Result};

pub const DEFAULT_KKT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

const TAU: f64 = 1e-12;

/// `exp(-gamma * ||x - y||^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub gamma: f64,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SvmParams {
    pub fn new(gamma: f64, c: f64) -> Self {
        SvmParams {
            gamma,
            c,
            tol: DEFAULT_KKT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C must be > 0, got {}",
                self.c
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("KKT tolerance must be > 0".into()));
        }
        Ok(())
    }
}

/// Solution of one binary problem.
#[derive(Debug, Clone)]
pub struct BinarySolution {
    /// Dual variables, one per training sample.
    pub alpha: Vec<f64>,
    /// Decision function offset: `f(x) = sum_i alpha_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    /// `max_{I_up} -y G - min_{I_low} -y G` at termination.
    pub kkt_gap: f64,
    pub iterations: usize,
}

/// Precomputed Gram matrix for a training set.
pub struct Gram {
    n: usize,
    k: Vec<f64>,
}

impl Gram {
    pub fn new<X: AsRef<[f64]> + Sync>(x: &[X], gamma: f64) -> Self {
        use rayon::prelude::*;
        let n = x.len();
        let k: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|idx| rbf_kernel(x[idx / n].as_ref(), x[idx % n].as_ref(), gamma))
            .collect();
        Gram { n, k }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Solves the dual for labels `y` in {-1, +1} over samples `idx` of `gram`.
pub fn solve_binary(
    gram: &Gram,
    idx: &[usize],
    y: &[f64],
    params: &SvmParams,
) -> Result<BinarySolution> {
    params.validate()?;
    let n = idx.len();
    assert_eq!(n, y.len());
    let c = params.c;
    let q = |a: usize, b: usize| y[a] * y[b] * gram.get(idx[a], idx[b]);

    let mut alpha = vec![0.0; n];
    // gradient of the dual objective, Q a - e
    let mut grad = vec![-1.0; n];

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let kkt_gap = loop {
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < params.tol {
            break (g_max - g_min).max(0.0);
        }
        if iterations >= params.max_iter {
            return Err(Error::NonConvergence(iterations));
        }

        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let kii = gram.get(idx[i], idx[i]);
        let kjj = gram.get(idx[j], idx[j]);
        let kij = gram.get(idx[i], idx[j]);
        let eta = (kii + kjj - 2.0 * kij).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / eta;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / eta;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (dai, daj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for t in 0..n {
            grad[t] += q(t, i) * dai + q(t, j) * daj;
        }
        iterations += 1;
    };

    // offset from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    };

    Ok(BinarySolution {
        alpha,
        bias: -rho,
        kkt_gap,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let x = [0.3, 0.4, 5.0];
        assert_eq!(rbf_kernel(&x, &x, 2.0), 1.0);
        let y = [1.3, 0.4, 5.0];
        assert!((rbf_kernel(&x, &y, std::f64::consts::LN_2) - 0.5).abs() < 1e-12);
        assert_eq!(rbf_kernel(&x, &y, 0.7), rbf_kernel(&y, &x, 0.7));
    }

    fn decision(sol: &BinarySolution, x: &[Vec<f64>], y: &[f64], gamma: f64, p: &[f64]) -> f64 {
        sol.alpha
            .iter()
            .zip(x)
            .zip(y)
            .map(|((a, xi), yi)| a * yi * rbf_kernel(xi, p, gamma))
            .sum::<f64>()
            + sol.bias
    }

    #[test]
    fn separable_clusters_fit_exactly() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let s = if i < 10 { 0.0 } else { 3.0 };
                vec![s + 0.05 * (i % 5) as f64, s - 0.03 * (i % 3) as f64]
            })
            .collect();
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { -1.0 } else { 1.0 }).collect();
        let params = SvmParams::new(0.5, 10.0);
        let gram = Gram::new(&x, params.gamma);
        let idx: Vec<usize> = (0..20).collect();
        let sol = solve_binary(&gram, &idx, &y, &params).unwrap();
        assert!(sol.kkt_gap <= params.tol);
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-6);
        assert!(sol.alpha.iter().all(|&a| (0.0..=params.c).contains(&a)));
        for (xi, yi) in x.iter().zip(&y) {
            assert!(decision(&sol, &x, &y, params.gamma, xi) * yi > 0.0);
        }
    }

    #[test]
    fn conflicting_duplicates_terminate() {
        let x = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let y = vec![1.0, -1.0];
        let params = SvmParams::new(1.0, 1e4);
        let gram = Gram::new(&x, params.gamma);
        let sol = solve_binary(&gram, &[0, 1], &y, &params).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!(decision(&sol, &x, &y, params.gamma, xi) * yi < 1.0);
        }
        assert!(sol.alpha.iter().all(|&a| (a - params.c).abs() < 1e-9));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.1]).collect();
        let y: Vec<f64> = (0..12)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let mut params = SvmParams::new(1.0, 100.0);
        params.max_iter = 1;
        let gram = Gram::new(&x, params.gamma);
        let idx: Vec<usize> = (0..12).collect();
        assert!(matches!(
            solve_binary(&gram, &idx, &y, &params),
            Err(Error::NonConvergence(1))
        ));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SvmParams::new(0.0, 1.0).validate().is_err());
        assert!(SvmParams::new(1.0, -1.0).validate().is_err());
    }
}
