//! Stratified k-fold cross-validation and grid search over `(gamma, C)`.

use super::model::{train_subset, LabelledSample, TextureConceptId, N_TEXTURE_CONCEPTS};
use super::svm::{Gram, SvmParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub gamma: f64,
    pub c: f64,
    /// Mean over the concepts present in the data.
    pub mean_accuracy: f64,
    /// One-vs-rest accuracy per concept; `None` for concepts absent from the data.
    pub per_concept: [Option<f64>; N_TEXTURE_CONCEPTS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub best: GridPoint,
    /// Every grid point, gamma-major in ascending order.
    pub grid: Vec<GridPoint>,
}

/// Assigns samples of each class round-robin to `folds` folds.
pub fn stratified_folds(data: &[LabelledSample], folds: usize) -> Vec<usize> {
    let mut next = [0usize; N_TEXTURE_CONCEPTS];
    data.iter()
        .map(|(_, c)| {
            let k = &mut next[c.index()];
            let f = *k % folds;
            *k += 1;
            f
        })
        .collect()
}

/// Runs `folds`-fold cross-validation at every grid point.
///
/// Each held-out sample contributes to the binary accuracy of all eleven
/// one-vs-rest machines. Ties on mean accuracy go to the smallest
/// `(gamma, C)`.
pub fn cross_validate(
    data: &[LabelledSample],
    gamma_grid: &[f64],
    c_grid: &[f64],
    folds: usize,
) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if gamma_grid.is_empty() || c_grid.is_empty() {
        return Err(Error::Empty("parameter grid"));
    }
    let mut counts = [0usize; N_TEXTURE_CONCEPTS];
    for (_, c) in data {
        counts[c.index()] += 1;
    }
    for (k, &n) in counts.iter().enumerate() {
        if n > 0 && n < folds {
            return Err(Error::DegenerateData(format!(
                "class `{}` has {n} samples, fewer than {folds} folds",
                TextureConceptId::ALL[k]
            )));
        }
    }
    let present: Vec<usize> = (0..N_TEXTURE_CONCEPTS).filter(|&k| counts[k] > 0).collect();
    if present.len() < 2 {
        return Err(Error::DegenerateData(
            "need at least two texture classes".into(),
        ));
    }

    let mut gammas = gamma_grid.to_vec();
    let mut cs = c_grid.to_vec();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    cs.sort_by(f64::total_cmp);
    cs.dedup();

    let fold_of = stratified_folds(data, folds);
    let x: Vec<&[f64]> = data.iter().map(|(v, _)| v.as_slice()).collect();
    let mut grid = Vec::with_capacity(gammas.len() * cs.len());
    for &gamma in &gammas {
        let gram = Gram::new(&x, gamma);
        for &c in &cs {
            let params = SvmParams::new(gamma, c);
            params.validate()?;
            let mut correct = [0usize; N_TEXTURE_CONCEPTS];
            for fold in 0..folds {
                let train: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != fold).collect();
                let (model, _) = train_subset(data, &gram, &train, &params)?;
                for (i, (xv, label)) in data.iter().enumerate() {
                    if fold_of[i] != fold {
                        continue;
                    }
                    let d = model.decision_values(xv);
                    for (k, dk) in d.iter().enumerate() {
                        if (*dk > 0.0) == (label.index() == k) {
                            correct[k] += 1;
                        }
                    }
                }
            }
            let n = data.len() as f64;
            let per_concept: [Option<f64>; N_TEXTURE_CONCEPTS] =
                std::array::from_fn(|k| (counts[k] > 0).then(|| correct[k] as f64 / n));
            let mean_accuracy =
                present.iter().map(|&k| correct[k] as f64 / n).sum::<f64>() / present.len() as f64;
            grid.push(GridPoint {
                gamma,
                c,
                mean_accuracy,
                per_concept,
            });
        }
    }
    let mut best = &grid[0];
    for p in &grid[1..] {
        if p.mean_accuracy > best.mean_accuracy {
            best = p;
        }
    }
    Ok(CvReport {
        best: best.clone(),
        grid,
    })
}

/// `1 / median` of the squared distances between distinct samples.
pub fn median_gamma(data: &[LabelledSample]) -> Result<f64> {
    let mut d2: Vec<f64> = Vec::with_capacity(data.len() * data.len().saturating_sub(1) / 2);
    for (i, (a, _)) in data.iter().enumerate() {
        for (b, _) in &data[i + 1..] {
            d2.push(a.e.iter().zip(&b.e).map(|(x, y)| (x - y) * (x - y)).sum());
        }
    }
    if d2.is_empty() {
        return Err(Error::DegenerateData("need at least two samples".into()));
    }
    d2.sort_by(f64::total_cmp);
    let med = d2[d2.len() / 2];
    if med <= 0.0 {
        return Err(Error::DegenerateData(
            "median squared distance is zero".into(),
        ));
    }
    Ok(1.0 / med)
}
