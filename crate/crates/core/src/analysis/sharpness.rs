//! Largest Hessian eigenvalue of a loss at a minimum.

use serde::{Deserialize, Serialize};

use crate::data::{gen_worst_case, WorstCaseVariant};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{CircuitSpec, ParamVector, Scheme};
use crate::train::{grad_finite_diff, initial_params, train_from, FdMode, Objective, TrainConfig};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const POWER_TOL: f64 = 1e-6;
pub const POWER_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub largest_hessian_eigenvalue: f64,
    pub hessian_dim: usize,
    pub fd_step: f64,
    pub params_at_min: ParamVector,
    pub loss_at_min: f64,
    /// Central-difference gradient norm at `params_at_min`.
    pub gradient_norm: f64,
    pub hessian: Vec<Vec<f64>>,
}

/// Symmetrized central-difference Hessian.
pub fn hessian_fd<F>(f: F, params: &[f64], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let d = params.len();
    let f0 = f(params)?;
    let mut x = params.to_vec();
    let mut at = |moves: &[(usize, f64)]| -> Result<f64> {
        for &(i, s) in moves {
            x[i] += s * h;
        }
        let v = f(&x);
        for &(i, _) in moves {
            x[i] = params[i];
        }
        v
    };
    let mut hess = vec![vec![0.0; d]; d];
    for i in 0..d {
        hess[i][i] = (at(&[(i, 1.0)])? - 2.0 * f0 + at(&[(i, -1.0)])?) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, 1.0), (j, 1.0)])? - at(&[(i, 1.0), (j, -1.0)])? - at(&[(i, -1.0), (j, 1.0)])?
                + at(&[(i, -1.0), (j, -1.0)])?)
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    for (i, row) in hess.iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure { row: i, col: j });
        }
    }
    Ok(hess)
}

/// Largest algebraic eigenvalue of a symmetric matrix. Closed form up to 3×3,
/// shifted power iteration above.
pub fn largest_eigenvalue(h: &[Vec<f64>]) -> Result<f64> {
    let d = h.len();
    if d == 0 || h.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("Hessian must be a non-empty square matrix".into()));
    }
    let sym = |i: usize, j: usize| 0.5 * (h[i][j] + h[j][i]);
    match d {
        1 => Ok(h[0][0]),
        2 => {
            let (a, b, c) = (sym(0, 0), sym(0, 1), sym(1, 1));
            Ok(0.5 * (a + c) + (0.5 * (a - c)).hypot(b))
        }
        3 => {
            // Trigonometric solution of the characteristic cubic.
            let p1 = sym(0, 1).powi(2) + sym(0, 2).powi(2) + sym(1, 2).powi(2);
            let q = (sym(0, 0) + sym(1, 1) + sym(2, 2)) / 3.0;
            let p2 = (sym(0, 0) - q).powi(2) + (sym(1, 1) - q).powi(2) + (sym(2, 2) - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            if p == 0.0 {
                return Ok(q);
            }
            let b = |i: usize, j: usize| (sym(i, j) - if i == j { q } else { 0.0 }) / p;
            let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
            let phi = (0.5 * det).clamp(-1.0, 1.0).acos() / 3.0;
            Ok(q + 2.0 * p * phi.cos())
        }
        _ => power_iteration(h),
    }
}

fn power_iteration(h: &[Vec<f64>]) -> Result<f64> {
    let d = h.len();
    // Shift by a Gershgorin bound so the top of the spectrum dominates in magnitude.
    let shift = h.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    if shift == 0.0 {
        return Ok(0.0);
    }
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.01 * i as f64).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| 0.5 * (h[i][j] + h[j][i]) * v[j]).sum::<f64>() + shift * v[i]).collect();
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let nw = norm(&w);
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - lambda).abs() <= POWER_TOL * next.abs().max(1e-300) {
            return Ok(next - shift);
        }
        lambda = next;
    }
    Ok(lambda - shift)
}

/// Hessian spectrum top at `params`, reported with the step used.
pub fn sharpness<F>(f: F, params: &[f64], fd_step: f64) -> Result<SharpnessReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let hessian = hessian_fd(&f, params, fd_step)?;
    let largest = largest_eigenvalue(&hessian)?;
    if !largest.is_finite() {
        return Err(Error::NumericalFailure { row: 0, col: 0 });
    }
    let grad = grad_finite_diff(&f, params, FdMode::Central, fd_step, None)?;
    Ok(SharpnessReport {
        largest_hessian_eigenvalue: largest,
        hessian_dim: params.len(),
        fd_step,
        params_at_min: ParamVector(params.to_vec()),
        loss_at_min: f(params)?,
        gradient_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        hessian,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessComparison {
    pub n: usize,
    pub labels: Vec<u8>,
    /// Frequency realizing the labeling with one compressed gate.
    pub omega: f64,
    pub original: SharpnessReport,
    pub compressed: SharpnessReport,
    /// `compressed / original` largest eigenvalues.
    pub ratio: f64,
}

/// Labeling `1, 0, 1, 0, …` of the `N + 1` dyadic points.
pub fn comparison_labels(n: usize) -> Vec<u8> {
    (0..=n).map(|i| ((i + 1) % 2) as u8).collect()
}

/// Trains both schemes on the dyadic worst-case set `X_i = 2^i` and compares
/// Hessian tops at the minima found.
///
/// The compressed model is one gate `mzi(ωx + β, 0)` started at the exact
/// frequency; since its loss varies on the scale `1/X_max` in `ω`, both its
/// learning rate and difference step shrink by `X_max`. The original model
/// (two layers, unit encoding scale) keeps the lowest-loss run over `seeds`.
pub fn sharpness_comparison(n: usize, seeds: &[u64], max_iters: usize) -> Result<SharpnessComparison> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let labels = comparison_labels(n);
    let (ds, wc) = gen_worst_case(n, &labels, WorstCaseVariant::PowersOfTwo)?;
    let x_max = 2f64.powi(n as i32);
    let rows = &ds.features;
    let exec = Exec::Sequential;
    let base = TrainConfig { max_iters, record_every: max_iters, ..TrainConfig::default() };

    let comp_spec = CircuitSpec::new(Scheme::Compressed, 1, 1)?;
    let comp_cfg = TrainConfig { learning_rate: 1e-2 / x_max, ..base.clone() };
    let comp = train_from(&comp_spec, &ds, &comp_cfg, vec![wc.omega, 0.0], exec)?;
    let comp_obj = Objective::new(&comp_spec, rows, &ds.labels, comp_cfg.loss, exec)?;
    let compressed = sharpness(|p: &[f64]| comp_obj.value(p), &comp.final_params, DEFAULT_FD_STEP / x_max)?;

    let orig_spec = CircuitSpec::new(Scheme::Original, 1, 2)?.with_encode_scale(1.0)?;
    let runs: Vec<_> = Exec::default().map_slice(seeds, |&s| {
        let cfg = TrainConfig { seed: s, ..base.clone() };
        train_from(&orig_spec, &ds, &cfg, initial_params(orig_spec.n_params(), s), exec)
    });
    let mut best = None;
    for r in runs {
        let r = r?;
        if best.as_ref().is_none_or(|b: &crate::train::TrainReport| r.final_loss < b.final_loss) {
            best = Some(r);
        }
    }
    let orig = best.unwrap();
    let orig_obj = Objective::new(&orig_spec, rows, &ds.labels, base.loss, exec)?;
    let original = sharpness(|p: &[f64]| orig_obj.value(p), &orig.final_params, DEFAULT_FD_STEP)?;

    let ratio = compressed.largest_hessian_eigenvalue / original.largest_hessian_eigenvalue;
    Ok(SharpnessComparison { n, labels, omega: wc.omega, original, compressed, ratio })
}

#[cfg(test)]
mod tests {
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    use super::*;

    fn oracle_max(h: &[Vec<f64>]) -> f64 {
        let d = h.len();
        let m = DMatrix::from_fn(d, d, |i, j| h[i][j]);
        SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn quadratic_bowl() {
        let lambda = 3.7;
        let r = sharpness(|p: &[f64]| Ok(0.5 * lambda * p[0] * p[0]), &[0.0], DEFAULT_FD_STEP).unwrap();
        assert!((r.largest_hessian_eigenvalue - lambda).abs() / lambda < 1e-4);
        assert_eq!(r.hessian_dim, 1);
        assert_eq!(r.fd_step, DEFAULT_FD_STEP);
        assert!(r.gradient_norm < 1e-10);
    }

    #[test]
    fn sin_squared_at_zero() {
        let r = sharpness(|p: &[f64]| Ok(p[0].sin().powi(2)), &[0.0], DEFAULT_FD_STEP).unwrap();
        assert!((r.largest_hessian_eigenvalue - 2.0).abs() < 1e-3);
    }

    #[test]
    fn anisotropic_quadratic_in_five_dims() {
        // ½ xᵀAx with a known spectrum; power iteration path.
        let diag = [0.5, 1.0, 2.0, 9.0, 4.0];
        let f = |p: &[f64]| Ok(0.5 * p.iter().zip(diag).map(|(x, d)| d * x * x).sum::<f64>() + 0.3 * p[0] * p[3]);
        let r = sharpness(f, &[0.1, -0.2, 0.3, 0.0, 0.05], DEFAULT_FD_STEP).unwrap();
        let want = oracle_max(&r.hessian);
        assert!((r.largest_hessian_eigenvalue - want).abs() / want < 1e-5);
        assert!((r.hessian[0][3] - 0.3).abs() < 1e-5);
    }

    #[test]
    fn non_finite_entry_reports_index() {
        let f = |p: &[f64]| Ok(if p[1] > 0.0 { f64::NAN } else { p[0] * p[0] });
        match hessian_fd(f, &[0.0, 0.0], 1e-3) {
            Err(Error::NumericalFailure { row, col }) => assert_eq!((row, col), (0, 1)),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn closed_forms_match_eigen_oracle(entries in proptest::collection::vec(-5.0f64..5.0, 6), d in 1usize..=3) {
            let mut h = vec![vec![0.0; d]; d];
            let mut k = 0;
            for i in 0..d {
                for j in 0..=i {
                    h[i][j] = entries[k];
                    h[j][i] = entries[k];
                    k += 1;
                }
            }
            let want = oracle_max(&h);
            prop_assert!((largest_eigenvalue(&h).unwrap() - want).abs() < 1e-9 * want.abs().max(1.0));
        }

        #[test]
        fn power_iteration_matches_eigen_oracle(entries in proptest::collection::vec(-5.0f64..5.0, 21)) {
            let d = 6;
            let mut h = vec![vec![0.0; d]; d];
            let mut k = 0;
            for i in 0..d {
                for j in 0..=i {
                    h[i][j] = entries[k];
                    h[j][i] = entries[k];
                    k += 1;
                }
            }
            let want = oracle_max(&h);
            prop_assert!((largest_eigenvalue(&h).unwrap() - want).abs() < 1e-3 * want.abs().max(1.0));
        }
    }
}
