//! Logistic calibration of SVM decision values.
//!
//! Fits `P(y = 1 | f) = sigmoid(a * f + b)` by maximising the likelihood of
//! the training labels, using the smoothed targets `(N+ + 1) / (N+ + 2)` and
//! `1 / (N- + 2)` so that separable data still has a finite optimum.

pub const CALIBRATION_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigmoid {
    pub a: f64,
    pub b: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl Sigmoid {
    pub fn apply(&self, decision: f64) -> f64 {
        sigmoid(self.a * decision + self.b)
    }

    /// Decision value mapped to probability one half.
    pub fn midpoint(&self) -> Option<f64> {
        (self.a != 0.0).then(|| -self.b / self.a)
    }
}

fn neg_log_likelihood(dec: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    dec.iter()
        .zip(targets)
        .map(|(&f, &t)| {
            let z = a * f + b;
            // -t log s(z) - (1 - t) log(1 - s(z))
            t * softplus(-z) + (1.0 - t) * softplus(z)
        })
        .sum()
}

/// Fits the sigmoid by damped Newton steps on the negative log-likelihood.
///
/// The slope is kept non-negative so posteriors never decrease with the
/// decision value. With no positive labels the slope is fixed at zero.
pub fn fit_sigmoid(dec: &[f64], labels: &[bool]) -> Sigmoid {
    assert_eq!(dec.len(), labels.len());
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = labels.iter().map(|&l| if l { hi } else { lo }).collect();

    let prior = ((n_pos + 1.0) / (n_neg + 1.0)).ln();
    if n_pos == 0.0 || n_neg == 0.0 {
        return Sigmoid { a: 0.0, b: prior };
    }

    let (mut a, mut b) = (0.0, prior);
    let mut f_val = neg_log_likelihood(dec, &targets, a, b);
    const RIDGE: f64 = 1e-12;
    for _ in 0..CALIBRATION_ITERATIONS {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (RIDGE, RIDGE, 0.0, 0.0, 0.0);
        for (&f, &t) in dec.iter().zip(&targets) {
            let p = sigmoid(a * f + b);
            let w = p * (1.0 - p);
            h11 += f * f * w;
            h22 += w;
            h21 += f * w;
            let d = p - t;
            g1 += f * d;
            g2 += d;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0;
        let mut improved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = neg_log_likelihood(dec, &targets, na, nb);
            if nf < f_val + 1e-4 * step * gd {
                a = na;
                b = nb;
                f_val = nf;
                improved = true;
                break;
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
    if a < 0.0 {
        // Anti-correlated decision values carry no usable ordering.
        return Sigmoid { a: 0.0, b: prior };
    }
    Sigmoid { a, b }
}
