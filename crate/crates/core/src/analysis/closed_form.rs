//! One-layer original circuit as a biased sinusoid.
//!
//! Encoding `mzi(x, 0)` followed by the trainable `mzi(θ₂, θ₁)` on `|1⟩` gives
//! `p0 − p1 = −cos θ₂ · cos x − cos θ₁ sin θ₂ · sin x`. Class 1 iff `p0 ≥ τ`,
//! so with `t = 1 − 2τ` the decision is `sign[a + b cos x + c sin x]`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// `(a, b, c)` for external phase `theta1`, internal phase `theta2` and offset `t`.
pub fn one_layer_coeffs(theta1: f64, theta2: f64, t: f64) -> Result<(f64, f64, f64)> {
    ensure_finite("theta1", theta1)?;
    ensure_finite("theta2", theta2)?;
    ensure_finite("t", t)?;
    Ok((t, -theta2.cos(), -theta1.cos() * theta2.sin()))
}

/// Offset `t = 1 − 2τ` matching an LDA threshold on `p0`.
pub fn offset_from_threshold(tau: f64) -> f64 {
    1.0 - 2.0 * tau
}

/// Where `a + b cos x + c sin x` is positive, as a 2π-periodic set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntervalClassifier {
    /// Same sign everywhere.
    Constant { positive: bool },
    /// Positive on `(center − half_width, center + half_width)` mod 2π.
    Arc { center: f64, half_width: f64 },
}

impl IntervalClassifier {
    /// `a + b cos x + c sin x > 0` (endpoints count as negative).
    pub fn is_positive(&self, x: f64) -> bool {
        match *self {
            IntervalClassifier::Constant { positive } => positive,
            IntervalClassifier::Arc { center, half_width } => wrap(x - center).abs() < half_width,
        }
    }

    /// Transition points `(α, β)` with `α = φ + w`, `β = φ + 2π − w`; the
    /// positive arc runs from `β − 2π` to `α`.
    pub fn transitions(&self) -> Option<(f64, f64)> {
        match *self {
            IntervalClassifier::Constant { .. } => None,
            IntervalClassifier::Arc { center, half_width } => Some((center + half_width, center + TAU - half_width)),
        }
    }
}

/// Angle reduced to `(−π, π]`.
pub(crate) fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

pub fn interval_from_coeffs(a: f64, b: f64, c: f64) -> Result<IntervalClassifier> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    ensure_finite("c", c)?;
    let r = b.hypot(c);
    if a == 0.0 && r == 0.0 {
        return Err(Error::UndefinedClassifier);
    }
    if a.abs() > r {
        return Ok(IntervalClassifier::Constant { positive: a > 0.0 });
    }
    Ok(IntervalClassifier::Arc { center: c.atan2(b), half_width: (-a / r).acos() })
}
