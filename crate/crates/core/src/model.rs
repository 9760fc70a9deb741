//! Data re-uploading circuits in the original and compressed schemes.
//!
//! **Original.** Each layer uploads the full feature vector through `⌈n/2⌉`
//! encoding MZIs. Every encoding MZI is followed by its own trainable MZI:
//!
//! ```text
//! |1⟩ → E₀ T₀ E₁ T₁ … E_{G−1} T_{G−1} → (next layer) … → measure
//! ```
//!
//! Feature pair `(x_{2j}, x_{2j+1})` drives `E_j = mzi(θ = x_{2j+1}·s, φ = x_{2j}·s)`.
//! An unpaired last feature drives `mzi(θ = x_{n−1}·s, φ = 0)`. Trainable gate
//! `T_j` of layer `l` reads `(θ, φ)` from parameters `2(l·G + j)` and `2(l·G + j) + 1`.
//!
//! **Compressed.** Encoding and rotation share a gate. Each layer holds one gate
//! per feature, `mzi(θ = ω_k·x_j + β_k, φ = 0)`, with `(ω_k, β_k)` at parameters
//! `2k` and `2k + 1`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::exec::Exec;
use crate::qcore::{Complex, QubitState, Unitary2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Original,
    Compressed,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Original => f.write_str("original"),
            Scheme::Compressed => f.write_str("compressed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub scheme: Scheme,
    pub n_features: usize,
    pub n_layers: usize,
    /// Feature-to-phase multiplier for the original scheme's encoding gates.
    #[serde(default = "default_encode_scale")]
    pub encode_scale: f64,
}

fn default_encode_scale() -> f64 {
    FRAC_PI_2
}

impl CircuitSpec {
    pub fn new(scheme: Scheme, n_features: usize, n_layers: usize) -> Result<Self> {
        let spec = CircuitSpec { scheme, n_features, n_layers, encode_scale: FRAC_PI_2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_encode_scale(mut self, scale: f64) -> Result<Self> {
        self.encode_scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::InvalidArgument("n_features must be ≥ 1".into()));
        }
        if self.n_layers == 0 {
            return Err(Error::InvalidArgument("n_layers must be ≥ 1".into()));
        }
        if !(self.encode_scale.is_finite() && self.encode_scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "encode_scale must be positive and finite, got {}",
                self.encode_scale
            )));
        }
        Ok(())
    }

    /// Encoding MZIs per layer in the original scheme: `⌈n/2⌉`.
    pub fn encoding_slots(&self) -> usize {
        self.n_features.div_ceil(2)
    }

    /// Physical gates per layer.
    pub fn gates_per_layer(&self) -> usize {
        match self.scheme {
            Scheme::Original => 2 * self.encoding_slots(),
            Scheme::Compressed => self.n_features,
        }
    }

    pub fn n_gates(&self) -> usize {
        self.gates_per_layer() * self.n_layers
    }

    /// Length of the trainable parameter vector.
    pub fn n_params(&self) -> usize {
        match self.scheme {
            Scheme::Original => 2 * self.n_layers * self.encoding_slots(),
            Scheme::Compressed => 2 * self.n_layers * self.n_features,
        }
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters for {} scheme with n={} L={}, got {}",
                self.n_params(),
                self.scheme,
                self.n_features,
                self.n_layers,
                params.len()
            )));
        }
        params.iter().try_for_each(|&p| ensure_finite("parameter", p))
    }

    fn check_features(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::InvalidArgument(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        x.iter().try_for_each(|&v| ensure_finite("feature", v))
    }
}

/// Trainable phase vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl std::ops::Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// Which phase of a gate a parameter feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSlot {
    Theta,
    Phi,
}

/// `phase(gate, slot) += coeff · params[param]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamLink {
    pub param: usize,
    pub gate: usize,
    pub slot: PhaseSlot,
    pub coeff: f64,
}

/// A circuit bound to one input: gate phases in application order plus the
/// parameter-to-phase links.
#[derive(Debug, Clone)]
pub struct BoundCircuit {
    pub phases: Vec<(f64, f64)>,
    pub links: Vec<ParamLink>,
}

/// Encoding phases `(θ, φ)` for one upload of `x`.
pub fn encoding_phases(x: &[f64], scale: f64) -> Result<Vec<(f64, f64)>> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty feature vector".into()));
    }
    ensure_finite("encode_scale", scale)?;
    x.iter().try_for_each(|&v| ensure_finite("feature", v))?;
    Ok(x
        .chunks(2)
        .map(|pair| match *pair {
            [a, b] => (b * scale, a * scale),
            [a] => (a * scale, 0.0),
            _ => unreachable!(),
        })
        .collect())
}

/// The `⌈n/2⌉` encoding MZIs for one upload of `x`.
pub fn encoding_gates(x: &[f64], scale: f64) -> Result<Vec<Unitary2>> {
    encoding_phases(x, scale)?
        .into_iter()
        .map(|(t, p)| Unitary2::mzi(t, p))
        .collect()
}

impl BoundCircuit {
    pub fn new(spec: &CircuitSpec, params: &[f64], x: &[f64]) -> Result<Self> {
        spec.validate()?;
        spec.check_params(params)?;
        spec.check_features(x)?;
        Ok(Self::build_unchecked(spec, params, x))
    }

    pub(crate) fn build_unchecked(spec: &CircuitSpec, params: &[f64], x: &[f64]) -> Self {
        let mut phases = Vec::with_capacity(spec.n_gates());
        let mut links = Vec::with_capacity(2 * params.len());
        match spec.scheme {
            Scheme::Original => {
                let enc: Vec<(f64, f64)> = x
                    .chunks(2)
                    .map(|pair| match *pair {
                        [a, b] => (b * spec.encode_scale, a * spec.encode_scale),
                        [a] => (a * spec.encode_scale, 0.0),
                        _ => unreachable!(),
                    })
                    .collect();
                let slots = enc.len();
                for layer in 0..spec.n_layers {
                    for (j, &e) in enc.iter().enumerate() {
                        phases.push(e);
                        let base = 2 * (layer * slots + j);
                        let gate = phases.len();
                        phases.push((params[base], params[base + 1]));
                        links.push(ParamLink { param: base, gate, slot: PhaseSlot::Theta, coeff: 1.0 });
                        links.push(ParamLink { param: base + 1, gate, slot: PhaseSlot::Phi, coeff: 1.0 });
                    }
                }
            }
            Scheme::Compressed => {
                let n = spec.n_features;
                for layer in 0..spec.n_layers {
                    for (j, &xj) in x.iter().enumerate() {
                        let base = 2 * (layer * n + j);
                        let gate = phases.len();
                        phases.push((params[base] * xj + params[base + 1], 0.0));
                        links.push(ParamLink { param: base, gate, slot: PhaseSlot::Theta, coeff: xj });
                        links.push(ParamLink { param: base + 1, gate, slot: PhaseSlot::Theta, coeff: 1.0 });
                    }
                }
            }
        }
        BoundCircuit { phases, links }
    }

    pub fn gates(&self) -> impl Iterator<Item = Unitary2> + '_ {
        self.phases.iter().map(|&(t, p)| Unitary2::mzi_unchecked(t, p))
    }

    /// Output state for input `|1⟩`.
    pub fn run(&self) -> QubitState {
        self.gates().fold(QubitState::ONE, |s, g| g.apply(&s))
    }

    pub fn p0(&self) -> f64 {
        self.run().probabilities().0
    }

    /// Product of all gates, last gate leftmost.
    pub fn unitary(&self) -> Unitary2 {
        self.gates().fold(Unitary2::IDENTITY, |acc, g| g.compose(&acc))
    }

    /// `∂p0/∂params` by the two-term shift rule on every gate phase, chained
    /// through the linear parameter links.
    ///
    /// Each phase enters its gate through `e^{i·phase}` only, so `p0` is a
    /// first-order trigonometric polynomial in it and
    /// `∂p0/∂phase = ½[p0(phase + π/2) − p0(phase − π/2)]` holds exactly.
    /// Shifted evaluations reuse cached prefix states and suffix rows, so the
    /// whole gradient costs O(gates) rather than O(gates²).
    pub fn p0_gradient(&self, n_params: usize) -> (f64, Vec<f64>) {
        let k = self.phases.len();
        let gates: Vec<Unitary2> = self.gates().collect();

        // before[g]: state entering gate g.
        let mut before = Vec::with_capacity(k + 1);
        before.push(QubitState::ONE);
        for g in &gates {
            let s = g.apply(before.last().unwrap());
            before.push(s);
        }
        let p0 = before[k].probabilities().0;

        // after[g]: row vector ⟨0| G_{K−1} … G_{g+1}.
        let mut after = vec![(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)); k];
        for g in (0..k.saturating_sub(1)).rev() {
            let (r0, r1) = after[g + 1];
            let m = &gates[g + 1];
            after[g] = (r0 * m.m00 + r1 * m.m10, r0 * m.m01 + r1 * m.m11);
        }

        let eval = |g: usize, theta: f64, phi: f64| {
            let s = Unitary2::mzi_unchecked(theta, phi).apply(&before[g]);
            let (r0, r1) = after[g];
            (r0 * s.amp0 + r1 * s.amp1).norm_sqr()
        };

        let mut grad = vec![0.0; n_params];
        for link in &self.links {
            let (theta, phi) = self.phases[link.gate];
            let d = match link.slot {
                PhaseSlot::Theta => {
                    eval(link.gate, theta + FRAC_PI_2, phi) - eval(link.gate, theta - FRAC_PI_2, phi)
                }
                PhaseSlot::Phi => {
                    eval(link.gate, theta, phi + FRAC_PI_2) - eval(link.gate, theta, phi - FRAC_PI_2)
                }
            };
            grad[link.param] += link.coeff * 0.5 * d;
        }
        (p0, grad)
    }
}

/// Original-scheme forward pass: `(p0, output state)`.
pub fn forward_original(spec: &CircuitSpec, params: &[f64], x: &[f64]) -> Result<(f64, QubitState)> {
    if spec.scheme != Scheme::Original {
        return Err(Error::InvalidArgument("forward_original needs an original-scheme spec".into()));
    }
    let state = BoundCircuit::new(spec, params, x)?.run();
    Ok((state.probabilities().0, state))
}

/// Single compressed gate `mzi(ω·x, 0)` acting on `|1⟩`.
pub fn forward_compressed(omega: f64, x: f64) -> Result<f64> {
    ensure_finite("omega", omega)?;
    ensure_finite("x", x)?;
    Ok(Unitary2::mzi(omega * x, 0.0)?.apply(&QubitState::ONE).probabilities().0)
}

pub fn forward_compressed_multilayer(spec: &CircuitSpec, params: &[f64], x: &[f64]) -> Result<f64> {
    if spec.scheme != Scheme::Compressed {
        return Err(Error::InvalidArgument(
            "forward_compressed_multilayer needs a compressed-scheme spec".into(),
        ));
    }
    Ok(BoundCircuit::new(spec, params, x)?.p0())
}

/// `p0` for either scheme.
pub fn forward(spec: &CircuitSpec, params: &[f64], x: &[f64]) -> Result<f64> {
    Ok(BoundCircuit::new(spec, params, x)?.p0())
}

/// Whole circuit collapsed to one 2×2 unitary.
pub fn effective_unitary(spec: &CircuitSpec, params: &[f64], x: &[f64]) -> Result<Unitary2> {
    Ok(BoundCircuit::new(spec, params, x)?.unitary())
}

/// `p0` for each row of a row-major feature matrix.
pub fn batch_p0(spec: &CircuitSpec, params: &[f64], rows: &[Vec<f64>], exec: Exec) -> Result<Vec<f64>> {
    spec.validate()?;
    spec.check_params(params)?;
    rows.iter().try_for_each(|x| spec.check_features(x))?;
    Ok(exec.map_slice(rows, |x| BoundCircuit::build_unchecked(spec, params, x).p0()))
}

/// `(p0, ∂p0/∂params)` for each row.
pub fn batch_p0_gradients(
    spec: &CircuitSpec,
    params: &[f64],
    rows: &[Vec<f64>],
    exec: Exec,
) -> Result<Vec<(f64, Vec<f64>)>> {
    spec.validate()?;
    spec.check_params(params)?;
    rows.iter().try_for_each(|x| spec.check_features(x))?;
    let n = spec.n_params();
    Ok(exec.map_slice(rows, |x| BoundCircuit::build_unchecked(spec, params, x).p0_gradient(n)))
}
