//! Mean-centred PCA through the covariance eigendecomposition.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{split_tags, train_count, Dataset, Normalizer, Split};
use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k × d`, one unit-norm principal axis per row.
    pub components: Vec<Vec<f64>>,
    pub k: usize,
    /// Covariance eigenvalues of the kept axes, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Maps raw scores of the fitting data onto `[−1, 1]`.
    pub scale: Normalizer,
}

impl PcaModel {
    /// Raw component scores.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((ci, xi), mi)| ci * (xi - mi)).sum())
            .collect()
    }

    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (c, &s) in self.components.iter().zip(scores) {
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi += s * ci;
            }
        }
        x
    }

    /// Scores rescaled with the fitting data's per-component ranges.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.scale.apply(&self.project(x))
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

pub fn fit_pca(rows: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!("k must lie in 1..={d}, got {k}")));
    }
    if n <= k {
        return Err(Error::InvalidArgument(format!("need more than {k} samples, got {n}")));
    }
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centred = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let cov = (centred.transpose() * &centred) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order.iter().filter(|&&i| top > 0.0 && eig.eigenvalues[i] > RANK_TOL * top).count();
    if k > rank {
        return Err(Error::RankDeficient { requested: k, rank });
    }

    let components: Vec<Vec<f64>> = order[..k]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            // Fix the sign: largest-magnitude entry positive.
            let pivot = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    let explained_variance = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut model = PcaModel {
        mean,
        components,
        k,
        explained_variance,
        scale: Normalizer { min: vec![], max: vec![] },
    };
    let scores: Vec<Vec<f64>> = rows.iter().map(|r| model.project(r)).collect();
    model.scale = Normalizer::fit(&scores).expect("n > k ≥ 1 rows");
    Ok(model)
}

/// Splits (unless the input already carries test rows), fits PCA on the
/// training split only and maps every row to `k` rescaled components.
pub fn pca_pipeline(dataset: &Dataset, k: usize, train_fraction: f64, seed: u64) -> Result<(Dataset, PcaModel)> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("train fraction must lie in (0, 1], got {train_fraction}")));
    }
    let n = dataset.n_samples();
    let split = if dataset.count(Split::Test) > 0 {
        dataset.split.clone()
    } else {
        split_tags(n, train_count(n, train_fraction), seed)
    };
    let train_rows: Vec<Vec<f64>> = dataset
        .features
        .iter()
        .zip(&split)
        .filter(|(_, &s)| s == Split::Train)
        .map(|(r, _)| r.clone())
        .collect();
    let model = fit_pca(&train_rows, k)?;
    let mut meta = dataset.meta.clone();
    meta.params.insert("pca_k".into(), k.into());
    meta.params.insert("pca_seed".into(), seed.into());
    meta.params.insert("pca_train_fraction".into(), train_fraction.into());
    meta.params.insert("pca_explained_variance".into(), serde_json::to_value(&model.explained_variance)?);
    meta.normalization = Some(model.scale.clone());
    let reduced = Dataset::new(model.apply_all(&dataset.features), dataset.labels.clone(), split, meta)?;
    Ok((reduced, model))
}
