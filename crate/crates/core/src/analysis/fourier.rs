//! Discrete Fourier coefficients of `p0(x)` for one-feature circuits.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundCircuit, CircuitSpec, Scheme};

pub const FOURIER_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    /// `c_k = (1/N) Σ_n p0(x_n) e^{−2πikn/N}` for `k = 0..=orders`.
    pub coefficients: Vec<Complex64>,
    pub sample_count: usize,
    pub layer_count: usize,
    /// Length of the sampled `x` window.
    pub period: f64,
    /// Every DFT bin, in FFT order.
    pub full: Vec<Complex64>,
    /// Mean of `p0²` over the samples.
    pub mean_square: f64,
}

impl FourierSpectrum {
    /// `|Σ_k |c_k|² − mean(p0²)|`.
    pub fn parseval_residual(&self) -> f64 {
        (self.full.iter().map(|c| c.norm_sqr()).sum::<f64>() - self.mean_square).abs()
    }

    /// Largest `|c_k|` over orders `k > order` (both signs).
    pub fn max_above(&self, order: usize) -> f64 {
        let n = self.full.len();
        (order + 1..=n / 2).map(|k| self.full[k].norm().max(self.full[(n - k) % n].norm())).fold(0.0, f64::max)
    }
}

/// Samples `p0` at 1024 points over one encoding period (`2π / encode_scale`
/// for the original scheme, `2π` for the compressed one) and returns the
/// normalized DFT up to `orders`.
pub fn fourier_spectrum(spec: &CircuitSpec, params: &[f64], orders: usize) -> Result<FourierSpectrum> {
    spec.validate()?;
    if spec.n_features != 1 {
        return Err(Error::UnsupportedDimension(format!(
            "Fourier analysis needs one feature, got {}",
            spec.n_features
        )));
    }
    let n = FOURIER_SAMPLES;
    if orders > n / 2 {
        return Err(Error::InvalidArgument(format!("orders must be ≤ {}, got {orders}", n / 2)));
    }
    let period = match spec.scheme {
        Scheme::Original => TAU / spec.encode_scale,
        Scheme::Compressed => TAU,
    };
    let samples = (0..n)
        .map(|i| Ok(BoundCircuit::new(spec, params, &[period * i as f64 / n as f64])?.p0()))
        .collect::<Result<Vec<f64>>>()?;
    let mean_square = samples.iter().map(|p| p * p).sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = samples.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let full: Vec<Complex64> = buf.into_iter().map(|c| c / n as f64).collect();
    Ok(FourierSpectrum {
        coefficients: full[..=orders].to_vec(),
        sample_count: n,
        layer_count: spec.n_layers,
        period,
        full,
        mean_square,
    })
}
