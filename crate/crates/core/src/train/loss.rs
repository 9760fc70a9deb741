//! Scalar losses on a batch of readout probabilities, with analytic `dL/dp`.

use serde::{Deserialize, Serialize};

use crate::classify::{class_stats, Class};
use crate::error::{Error, Result};

/// Regularizer in numerator and denominator of the Fisher ratio.
pub const FISHER_EPS: f64 = 1e-9;

const CE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// Within-class scatter over between-class separation.
    #[default]
    Fisher,
    /// Binary cross-entropy with class 1 as the `p0 = 1` target.
    CrossEntropy,
}

impl LossKind {
    pub fn value(self, p: &[f64], labels: &[Class]) -> Result<f64> {
        match self {
            LossKind::Fisher => fisher_lda_loss(p, labels),
            LossKind::CrossEntropy => cross_entropy_loss(p, labels),
        }
    }

    pub fn value_and_grad(self, p: &[f64], labels: &[Class]) -> Result<(f64, Vec<f64>)> {
        match self {
            LossKind::Fisher => fisher_lda_loss_grad(p, labels),
            LossKind::CrossEntropy => cross_entropy_loss_grad(p, labels),
        }
    }
}

struct Moments {
    mu: [f64; 2],
    n: [usize; 2],
    var: [f64; 2],
}

fn moments(p: &[f64], labels: &[Class]) -> Result<Moments> {
    if p.len() != labels.len() {
        return Err(Error::InvalidArgument(format!("{} p-values but {} labels", p.len(), labels.len())));
    }
    let [(mu1, n1), (mu2, n2)] = class_stats(p, labels);
    if n1 == 0 || n2 == 0 {
        return Err(Error::DegenerateLoss("batch holds a single class".into()));
    }
    let mu = [mu1, mu2];
    let n = [n1, n2];
    let mut ss = [0.0; 2];
    for (&v, &c) in p.iter().zip(labels) {
        let k = idx(c);
        ss[k] += (v - mu[k]).powi(2);
    }
    let var = [0, 1].map(|k| if n[k] > 1 { ss[k] / (n[k] - 1) as f64 } else { 0.0 });
    Ok(Moments { mu, n, var })
}

fn idx(c: Class) -> usize {
    match c {
        Class::One => 0,
        Class::Two => 1,
    }
}

/// `(σ₁² + σ₂² + ε) / ((μ₁ − μ₂)² + ε)` with sample variances.
pub fn fisher_lda_loss(p: &[f64], labels: &[Class]) -> Result<f64> {
    let m = moments(p, labels)?;
    let d = m.mu[0] - m.mu[1];
    Ok((m.var[0] + m.var[1] + FISHER_EPS) / (d * d + FISHER_EPS))
}

pub fn fisher_lda_loss_grad(p: &[f64], labels: &[Class]) -> Result<(f64, Vec<f64>)> {
    let m = moments(p, labels)?;
    let d = m.mu[0] - m.mu[1];
    let num = m.var[0] + m.var[1] + FISHER_EPS;
    let den = d * d + FISHER_EPS;
    let grad = p
        .iter()
        .zip(labels)
        .map(|(&v, &c)| {
            let k = idx(c);
            let dnum = if m.n[k] > 1 { 2.0 * (v - m.mu[k]) / (m.n[k] - 1) as f64 } else { 0.0 };
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let dden = sign * 2.0 * d / m.n[k] as f64;
            (dnum * den - num * dden) / (den * den)
        })
        .collect();
    Ok((num / den, grad))
}

pub fn cross_entropy_loss(p: &[f64], labels: &[Class]) -> Result<f64> {
    Ok(cross_entropy_loss_grad(p, labels)?.0)
}

pub fn cross_entropy_loss_grad(p: &[f64], labels: &[Class]) -> Result<(f64, Vec<f64>)> {
    moments(p, labels)?;
    let n = p.len() as f64;
    let mut loss = 0.0;
    let grad = p
        .iter()
        .zip(labels)
        .map(|(&v, &c)| {
            let q = v.clamp(CE_CLAMP, 1.0 - CE_CLAMP);
            match c {
                Class::One => {
                    loss -= q.ln();
                    -1.0 / (q * n)
                }
                Class::Two => {
                    loss -= (1.0 - q).ln();
                    1.0 / ((1.0 - q) * n)
                }
            }
        })
        .collect();
    Ok((loss / n, grad))
}
