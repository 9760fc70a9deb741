//! Two-dimensional toy sets following the usual circles/moons construction.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{split_tags, train_count, Dataset, DatasetMeta, DEFAULT_TRAIN_FRACTION};
use crate::classify::Class;
use crate::error::{ensure_finite, Error, Result};

pub const CIRCLES_FACTOR: f64 = 0.6;
pub const CIRCLES_NOISE: f64 = 0.05;
pub const MOONS_NOISE: f64 = 0.1;

/// Post-processing of generated coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    /// Min-max onto `[−1, 1]` from training ranges.
    #[default]
    MinMax,
    /// Generator coordinates as drawn.
    Raw,
}

fn check_common(n: usize, noise_sd: f64) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 samples, got {n}")));
    }
    ensure_finite("noise_sd", noise_sd)?;
    if noise_sd < 0.0 {
        return Err(Error::InvalidArgument(format!("noise_sd must be ≥ 0, got {noise_sd}")));
    }
    Ok(())
}

/// `k` evenly spaced angles over `[start, start + span)` or `[start, start + span]`.
fn linspace(k: usize, span: f64, endpoint: bool) -> impl Iterator<Item = f64> {
    let denom = if endpoint { k.saturating_sub(1).max(1) } else { k } as f64;
    (0..k).map(move |i| span * i as f64 / denom)
}

fn finish(
    mut features: Vec<Vec<f64>>,
    labels: Vec<Class>,
    noise_sd: f64,
    seed: u64,
    scaling: Scaling,
    meta: DatasetMeta,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if noise_sd > 0.0 {
        let normal = Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for r in &mut features {
            for v in r.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }
    let n = features.len();
    // Split stream is independent of the noise stream.
    let split = split_tags(n, train_count(n, DEFAULT_TRAIN_FRACTION), seed ^ 0x5eed_5917);
    let ds = Dataset::new(features, labels, split, meta.param("scaling", serde_json::to_value(scaling)?))?;
    Ok(match scaling {
        Scaling::MinMax => ds.normalized(),
        Scaling::Raw => ds,
    })
}

/// Outer unit circle is class 2, inner circle of radius `factor` is class 1.
/// Angles are evenly spaced; isotropic Gaussian noise; 80 % train; min-max scaled.
pub fn gen_circles(n: usize, factor: f64, noise_sd: f64, seed: u64) -> Result<Dataset> {
    gen_circles_with(n, factor, noise_sd, seed, Scaling::MinMax)
}

pub fn gen_circles_with(n: usize, factor: f64, noise_sd: f64, seed: u64, scaling: Scaling) -> Result<Dataset> {
    check_common(n, noise_sd)?;
    ensure_finite("factor", factor)?;
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::InvalidArgument(format!("factor must lie in (0, 1), got {factor}")));
    }
    let n_out = n / 2;
    let n_in = n - n_out;
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for a in linspace(n_out, TAU, false) {
        features.push(vec![a.cos(), a.sin()]);
        labels.push(Class::Two);
    }
    for a in linspace(n_in, TAU, false) {
        features.push(vec![factor * a.cos(), factor * a.sin()]);
        labels.push(Class::One);
    }
    let meta = DatasetMeta::new("circles", Some(seed))
        .param("n", n)
        .param("factor", factor)
        .param("noise_sd", noise_sd)
        .param("train_fraction", DEFAULT_TRAIN_FRACTION);
    finish(features, labels, noise_sd, seed, scaling, meta)
}

/// Upper half circle is class 1, the shifted lower half circle class 2.
pub fn gen_moons(n: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    gen_moons_with(n, noise_sd, seed, Scaling::MinMax)
}

pub fn gen_moons_with(n: usize, noise_sd: f64, seed: u64, scaling: Scaling) -> Result<Dataset> {
    check_common(n, noise_sd)?;
    let n_out = n / 2;
    let n_in = n - n_out;
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for a in linspace(n_out, PI, true) {
        features.push(vec![a.cos(), a.sin()]);
        labels.push(Class::One);
    }
    for a in linspace(n_in, PI, true) {
        features.push(vec![1.0 - a.cos(), 0.5 - a.sin()]);
        labels.push(Class::Two);
    }
    let meta = DatasetMeta::new("moons", Some(seed))
        .param("n", n)
        .param("noise_sd", noise_sd)
        .param("train_fraction", DEFAULT_TRAIN_FRACTION);
    finish(features, labels, noise_sd, seed, scaling, meta)
}
