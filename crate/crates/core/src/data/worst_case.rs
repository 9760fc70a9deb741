//! Point sets that a single compressed gate `p0 = (cos ωx + 1)/2` shatters.
//!
//! Label `y = 1` is class 1 and needs `cos(ωx) < 0` (`p0 < ½`); label `y = 0`
//! is class 2 and needs `cos(ωx) > 0`. Candidate frequency formulas are tried
//! in a fixed order and the first one that signs every point correctly is
//! returned together with its [`OmegaConvention`].

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetMeta, Split};
use crate::classify::Class;
use crate::error::{Error, Result};
use crate::model::forward_compressed;

/// Largest `N` (so `N + 1` points) accepted before `f64` resolution runs out.
pub const MAX_WORST_CASE_N: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorstCaseVariant {
    /// `X_i = 2^i`, `i = 0..=N`.
    PowersOfTwo,
    /// `x_i = 2^{−i}`, `i = 1..=N+1`.
    InversePowers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaConvention {
    /// All labels zero: `ω = 0`.
    Zero,
    /// `ω = 2π Σ_{i=0}^{N} y_i 2^{−i}`.
    Direct,
    /// `ω = π Σ_{i=0}^{N} y_i 2^{−i}` (index shifted by one).
    HalfShift,
    /// Binary expansion `ω/2π = 0.b₁b₂…` with `b₁ = 0`, `y_k = b_{k+1} ⊕ b_{k+2}`,
    /// closed by the guard bits `10`. Then `frac(2^k ω/2π)` lands in quadrant 2 or 3
    /// exactly when `y_k = 1`.
    XorBits,
    /// `ω = π(1 + Σ_i y_i 2^i)`, the textbook frequency for `sign sin(ωx)`.
    SineStandard,
    /// `ω = 2π(W + ¼)` with integer `W` whose bits satisfy `b₀ = y₁`,
    /// `b_{i−1} = y_i ⊕ b_{i−2}`.
    QuadrantOffset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub omega: f64,
    pub variant: WorstCaseVariant,
    pub convention: OmegaConvention,
    pub points: Vec<f64>,
    /// Every label equal: the set has one class only.
    pub single_class: bool,
}

fn class_of(y: u8) -> Class {
    if y == 1 {
        Class::One
    } else {
        Class::Two
    }
}

/// True when `ω` signs every point as its label requires.
pub(crate) fn realizes(omega: f64, points: &[f64], labels: &[u8]) -> bool {
    points.iter().zip(labels).all(|(&x, &y)| match forward_compressed(omega, x) {
        Ok(p0) if y == 1 => p0 < 0.5,
        Ok(p0) => p0 > 0.5,
        Err(_) => false,
    })
}

fn xor_bits_omega(labels: &[u8]) -> f64 {
    // b[j] holds bit b_{j+1} of ω/2π.
    let mut b = vec![0u8; labels.len() + 1];
    for (k, &y) in labels.iter().enumerate() {
        b[k + 1] = b[k] ^ y;
    }
    b.extend([1, 0]);
    let w: f64 = b.iter().enumerate().map(|(j, &bit)| bit as f64 * 0.5f64.powi(j as i32 + 1)).sum();
    TAU * w
}

fn quadrant_offset_omega(labels: &[u8]) -> f64 {
    // labels[i−1] is y_i; bit b_{i−1} of W.
    let mut b = Vec::with_capacity(labels.len());
    for (i, &y) in labels.iter().enumerate() {
        let prev = if i == 0 { 0 } else { b[i - 1] };
        b.push(y ^ prev);
    }
    let w: f64 = b.iter().enumerate().map(|(j, &bit)| bit as f64 * 2f64.powi(j as i32)).sum();
    TAU * (w + 0.25)
}

fn candidates(variant: WorstCaseVariant, labels: &[u8]) -> Vec<(OmegaConvention, f64)> {
    let binary_sum = |scale: f64| -> f64 {
        labels.iter().enumerate().map(|(i, &y)| y as f64 * 0.5f64.powi(i as i32)).sum::<f64>() * scale
    };
    match variant {
        WorstCaseVariant::PowersOfTwo => vec![
            (OmegaConvention::Direct, binary_sum(TAU)),
            (OmegaConvention::HalfShift, binary_sum(PI)),
            (OmegaConvention::XorBits, xor_bits_omega(labels)),
        ],
        WorstCaseVariant::InversePowers => {
            let s: f64 = labels.iter().enumerate().map(|(i, &y)| y as f64 * 2f64.powi(i as i32 + 1)).sum();
            vec![
                (OmegaConvention::SineStandard, PI * (1.0 + s)),
                (OmegaConvention::QuadrantOffset, quadrant_offset_omega(labels)),
            ]
        }
    }
}

/// Builds the `N + 1`-point set for `variant` and a frequency realizing
/// `labels` (values 0/1, length `N + 1`). All points are training samples.
pub fn gen_worst_case(n: usize, labels: &[u8], variant: WorstCaseVariant) -> Result<(Dataset, WorstCase)> {
    if n > MAX_WORST_CASE_N {
        return Err(Error::Precision(format!(
            "N = {n} exceeds {MAX_WORST_CASE_N}; frequencies are no longer resolvable in f64"
        )));
    }
    if labels.len() != n + 1 {
        return Err(Error::InvalidArgument(format!("need {} labels for N = {n}, got {}", n + 1, labels.len())));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::InvalidArgument(format!("labels must be 0 or 1, got {bad}")));
    }
    let points: Vec<f64> = match variant {
        WorstCaseVariant::PowersOfTwo => (0..=n).map(|i| 2f64.powi(i as i32)).collect(),
        WorstCaseVariant::InversePowers => (1..=n + 1).map(|i| 0.5f64.powi(i as i32)).collect(),
    };

    let (convention, omega) = if labels.iter().all(|&y| y == 0) {
        (OmegaConvention::Zero, 0.0)
    } else {
        candidates(variant, labels)
            .into_iter()
            .find(|&(_, w)| realizes(w, &points, labels))
            .ok_or_else(|| {
                Error::Precision(format!("no candidate frequency realizes the labeling at N = {n} ({variant:?})"))
            })?
    };
    let single_class = labels.iter().all(|&y| y == labels[0]);

    let meta = DatasetMeta::new("worst-case", None)
        .param("N", n)
        .param("variant", serde_json::to_value(variant)?)
        .param("convention", serde_json::to_value(convention)?)
        .param("omega", omega)
        .param("single_class", single_class)
        .param("labels", labels.to_vec());
    let ds = Dataset::new(
        points.iter().map(|&x| vec![x]).collect(),
        labels.iter().map(|&y| class_of(y)).collect(),
        vec![Split::Train; points.len()],
        meta,
    )?;
    Ok((ds, WorstCase { omega, variant, convention, points, single_class }))
}
