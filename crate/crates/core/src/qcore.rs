//! Dual-rail single-qubit gate algebra.
//!
//! A photon in mode 0 is `|0⟩`, in mode 1 is `|1⟩`. Circuits always start in
//! `|1⟩`. Every gate is a Mach-Zehnder interferometer with internal phase
//! `theta` and external phase `phi`, in the column-phase convention:
//!
//! ```text
//! U(θ, φ) = ½ ┌ (−1 + e^{iθ}) e^{iφ}    i(1 + e^{iθ}) ┐
//!             └ i(1 + e^{iθ}) e^{iφ}     1 − e^{iθ}   ┘
//! ```
//!
//! The external phase multiplies the first column only, so it acts on the
//! input-mode-0 amplitude. With `|1⟩` as input, the external phase of the first
//! gate in a circuit never reaches the output.
//!
//! Global phases are kept. Compare states with [`QubitState::approx_eq_up_to_phase`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

pub type Complex = Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

/// Pure-algebra tolerance.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub amp0: Complex,
    pub amp1: Complex,
}

impl QubitState {
    pub const ZERO: QubitState = QubitState { amp0: ONE, amp1: ZERO };
    pub const ONE: QubitState = QubitState { amp0: ZERO, amp1: ONE };

    /// Builds a state, rejecting non-finite or non-normalized amplitudes.
    pub fn new(amp0: Complex, amp1: Complex) -> Result<Self> {
        for (name, v) in [("amp0", amp0), ("amp1", amp1)] {
            ensure_finite(name, v.re)?;
            ensure_finite(name, v.im)?;
        }
        let s = QubitState { amp0, amp1 };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidArgument(format!(
                "state not normalized: |amp0|² + |amp1|² = {norm}"
            )));
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    /// Multiplies both amplitudes by `e^{iα}`.
    pub fn with_global_phase(&self, alpha: f64) -> Self {
        let g = Complex::from_polar(1.0, alpha);
        QubitState { amp0: g * self.amp0, amp1: g * self.amp1 }
    }

    /// Projective Z-basis measurement: `(p0, p1)`.
    pub fn probabilities(&self) -> (f64, f64) {
        (self.amp0.norm_sqr(), self.amp1.norm_sqr())
    }

    /// Equality up to a global phase, via the overlap `|⟨a|b⟩| ≈ 1`.
    pub fn approx_eq_up_to_phase(&self, other: &QubitState, tol: f64) -> bool {
        let overlap = self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1;
        (overlap.norm() - 1.0).abs() <= tol
            && (self.norm_sqr() - 1.0).abs() <= tol
            && (other.norm_sqr() - 1.0).abs() <= tol
    }
}

/// Projective Z-basis measurement of `s`.
pub fn probabilities(s: &QubitState) -> (f64, f64) {
    s.probabilities()
}

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unitary2 {
    pub m00: Complex,
    pub m01: Complex,
    pub m10: Complex,
    pub m11: Complex,
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 { m00: ONE, m01: ZERO, m10: ZERO, m11: ONE };

    /// Column-phase MZI. Rejects non-finite phases.
    pub fn mzi(theta: f64, phi: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_finite("phi", phi)?;
        Ok(Self::mzi_unchecked(theta, phi))
    }

    /// Column-phase MZI without input validation; used on hot paths whose
    /// phases were validated upstream.
    #[inline]
    pub(crate) fn mzi_unchecked(theta: f64, phi: f64) -> Self {
        let e_theta = Complex::from_polar(1.0, theta);
        let e_phi = Complex::from_polar(1.0, phi);
        let half = 0.5;
        let plus = (ONE + e_theta) * half;
        let minus = (e_theta - ONE) * half;
        Unitary2 {
            m00: minus * e_phi,
            m01: I * plus,
            m10: I * plus * e_phi,
            m11: -minus,
        }
    }

    /// Row-phase MZI, where the external phase multiplies the first output row:
    /// `i e^{iθ/2} [[e^{iφ} sin(θ/2), e^{iφ} cos(θ/2)], [cos(θ/2), −sin(θ/2)]]`.
    ///
    /// Shares its phase-free core with [`Unitary2::mzi`]. A chain of row-phase
    /// gates with external phases `(φ₁, …, φ_K)` yields the same Z-basis
    /// probabilities as the column-phase chain with `(0, φ₁, …, φ_{K−1})`: each
    /// row phase is picked up by the input column of the next gate, and the last
    /// one is a mode-local phase that measurement cannot see. Unlike the
    /// column-phase gate, the first gate's external phase is *not* inert here.
    pub fn mzi_row_phase(theta: f64, phi: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_finite("phi", phi)?;
        let pre = I * Complex::from_polar(1.0, theta / 2.0);
        let (s, c) = (theta / 2.0).sin_cos();
        let e_phi = Complex::from_polar(1.0, phi);
        Ok(Unitary2 {
            m00: pre * e_phi * s,
            m01: pre * e_phi * c,
            m10: pre * c,
            m11: -pre * s,
        })
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Unitary2 {
            m00: self.m00.conj(),
            m01: self.m10.conj(),
            m10: self.m01.conj(),
            m11: self.m11.conj(),
        }
    }

    /// Matrix product `self · other` (apply `other` first).
    #[inline]
    pub fn compose(&self, other: &Unitary2) -> Self {
        Unitary2 {
            m00: self.m00 * other.m00 + self.m01 * other.m10,
            m01: self.m00 * other.m01 + self.m01 * other.m11,
            m10: self.m10 * other.m00 + self.m11 * other.m10,
            m11: self.m10 * other.m01 + self.m11 * other.m11,
        }
    }

    #[inline]
    pub fn apply(&self, s: &QubitState) -> QubitState {
        QubitState {
            amp0: self.m00 * s.amp0 + self.m01 * s.amp1,
            amp1: self.m10 * s.amp0 + self.m11 * s.amp1,
        }
    }

    /// Max entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.dagger().compose(self);
        [p.m00 - ONE, p.m01, p.m10, p.m11 - ONE]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        [
            self.m00 - other.m00,
            self.m01 - other.m01,
            self.m10 - other.m10,
            self.m11 - other.m11,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }
}

/// Column-phase MZI gate.
pub fn mzi(theta: f64, phi: f64) -> Result<Unitary2> {
    Unitary2::mzi(theta, phi)
}

pub fn apply(u: &Unitary2, s: &QubitState) -> QubitState {
    u.apply(s)
}

/// `a · b`: `b` acts first.
pub fn compose(a: &Unitary2, b: &Unitary2) -> Unitary2 {
    a.compose(b)
}
