//! Gradients of the training loss: exact shift rule and finite differences.

use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use crate::classify::Class;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{batch_p0, batch_p0_gradients, CircuitSpec};

/// Loss of a circuit on a fixed labelled batch, as a function of the parameters.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub spec: &'a CircuitSpec,
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [Class],
    pub loss: LossKind,
    pub exec: Exec,
}

impl<'a> Objective<'a> {
    pub fn new(
        spec: &'a CircuitSpec,
        rows: &'a [Vec<f64>],
        labels: &'a [Class],
        loss: LossKind,
        exec: Exec,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        if !(labels.contains(&Class::One) && labels.contains(&Class::Two)) {
            return Err(Error::DegenerateFit("training batch must contain both classes".into()));
        }
        Ok(Objective { spec, rows, labels, loss, exec })
    }

    pub fn p_values(&self, params: &[f64]) -> Result<Vec<f64>> {
        batch_p0(self.spec, params, self.rows, self.exec)
    }

    pub fn value(&self, params: &[f64]) -> Result<f64> {
        self.loss.value(&self.p_values(params)?, self.labels)
    }
}

/// Loss and its gradient through the shift rule on every sample, chained with
/// the analytic `dL/dp`. `perturb` may replace the readouts (e.g. by shot-noise
/// estimates) before the loss sees them.
pub fn grad_param_shift_with(
    obj: &Objective<'_>,
    params: &[f64],
    perturb: Option<&mut dyn FnMut(&mut [f64]) -> Result<()>>,
) -> Result<(f64, Vec<f64>)> {
    let per_sample = batch_p0_gradients(obj.spec, params, obj.rows, obj.exec)?;
    let mut p: Vec<f64> = per_sample.iter().map(|(p0, _)| *p0).collect();
    if let Some(f) = perturb {
        f(&mut p)?;
    }
    let (value, dl_dp) = obj.loss.value_and_grad(&p, obj.labels)?;
    let mut grad = vec![0.0; params.len()];
    // Indexed reduction keeps the sum order fixed.
    for ((_, dp), w) in per_sample.iter().zip(&dl_dp) {
        for (g, d) in grad.iter_mut().zip(dp) {
            *g += w * d;
        }
    }
    Ok((value, grad))
}

pub fn grad_param_shift(obj: &Objective<'_>, params: &[f64]) -> Result<(f64, Vec<f64>)> {
    grad_param_shift_with(obj, params, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FdMode {
    Forward,
    Backward,
    Central,
}

/// Finite-difference gradient of `f` at `params`. One-sided modes reuse
/// `base = f(params)` when supplied.
pub fn grad_finite_diff<F>(f: F, params: &[f64], mode: FdMode, h: f64, base: Option<f64>) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let f0 = match (mode, base) {
        (FdMode::Central, _) => 0.0,
        (_, Some(b)) => b,
        (_, None) => f(params)?,
    };
    let mut x = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let xi = params[i];
        let g = match mode {
            FdMode::Forward => {
                x[i] = xi + h;
                (f(&x)? - f0) / h
            }
            FdMode::Backward => {
                x[i] = xi - h;
                (f0 - f(&x)?) / h
            }
            FdMode::Central => {
                x[i] = xi + h;
                let up = f(&x)?;
                x[i] = xi - h;
                (up - f(&x)?) / (2.0 * h)
            }
        };
        x[i] = xi;
        grad.push(g);
    }
    Ok(grad)
}
