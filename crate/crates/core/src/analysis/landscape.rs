//! Loss surface on the plane spanned by the two leading directions of an
//! optimizer trajectory.

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::ParamVector;
use crate::train::TrainReport;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;
/// Grid half-width relative to the trajectory extent.
pub const EXTENT_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub iteration: usize,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    /// Two orthonormal directions in parameter space.
    pub pc_axes: [Vec<f64>; 2],
    /// Grid origin: the report's final parameters.
    pub center: ParamVector,
    /// Singular values of the trajectory offsets along each axis.
    pub singular_values: [f64; 2],
    /// Axes were (partly) drawn at random because the trajectory has rank < 2.
    pub random_axes: bool,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `grid[i][j]` is the loss at `center + alpha[i]·u₁ + beta[j]·u₂`.
    pub grid: Vec<Vec<f64>>,
    pub path: Vec<PathPoint>,
}

impl LandscapeGrid {
    /// Grid index closest to the last path point.
    pub fn final_cell(&self) -> (usize, usize) {
        let last = self.path.last().expect("path is non-empty");
        (nearest(&self.alpha, last.alpha), nearest(&self.beta, last.beta))
    }

    /// Index of the smallest sampled loss.
    pub fn argmin(&self) -> (usize, usize) {
        let g = self.alpha.len();
        let mut best = (0, 0);
        for i in 0..g {
            for j in 0..g {
                if self.grid[i][j] < self.grid[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Long format: `i,j,alpha,beta,loss`.
    pub fn write_grid_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(["i", "j", "alpha", "beta", "loss"])?;
        for (i, row) in self.grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{:?}", self.alpha[i]),
                    format!("{:?}", self.beta[j]),
                    format!("{v:?}"),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_path_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(["iteration", "alpha", "beta"])?;
        for p in &self.path {
            w.write_record([p.iteration.to_string(), format!("{:?}", p.alpha), format!("{:?}", p.beta)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn nearest(axis: &[f64], v: f64) -> usize {
    (0..axis.len()).min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs())).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

/// Largest-magnitude entry made positive.
fn fix_sign(v: &mut [f64]) {
    let k = (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Random unit vector orthogonal to `against`.
fn random_orthonormal(d: usize, against: &[&[f64]], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        for a in against {
            let c = dot(&v, a);
            v.iter_mut().zip(a.iter()).for_each(|(x, y)| *x -= c * y);
        }
        if normalize(&mut v) > 1e-8 {
            return v;
        }
    }
}

/// Principal plane of the recorded trajectory through `report.final_params`,
/// sampled on a `grid_size × grid_size` grid (`grid_size` odd so that the
/// centre node is the final point). `seed` drives the fallback axes.
pub fn landscape_projection<F>(report: &TrainReport, loss_fn: F, grid_size: usize, seed: u64, exec: Exec) -> Result<LandscapeGrid>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let traj = &report.param_trajectory;
    if traj.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 trajectory points, got {}", traj.len())));
    }
    if grid_size < 3 || grid_size.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("grid size must be odd and ≥ 3, got {grid_size}")));
    }
    let center = &report.final_params;
    let d = center.len();
    if d < 2 {
        return Err(Error::InvalidArgument("landscape needs at least 2 parameters".into()));
    }
    let offsets = DMatrix::from_fn(traj.len(), d, |k, j| traj[k][j] - center[j]);
    let svd = offsets.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = |k: usize| order.get(k).map_or(0.0, |&i| svd.singular_values[i]);
    let top = sv(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for k in 0..2 {
        if top > 0.0 && sv(k) > RANK_TOL * top {
            let mut u: Vec<f64> = v_t.row(order[k]).iter().copied().collect();
            fix_sign(&mut u);
            axes.push(u);
        }
    }
    let random_axes = axes.len() < 2;
    while axes.len() < 2 {
        let against: Vec<&[f64]> = axes.iter().map(|a| a.as_slice()).collect();
        let u = random_orthonormal(d, &against, &mut rng);
        axes.push(u);
    }

    let path: Vec<PathPoint> = traj
        .iter()
        .zip(&report.trajectory_iterations)
        .map(|(p, &it)| {
            let off: Vec<f64> = p.iter().zip(center.iter()).map(|(a, b)| a - b).collect();
            PathPoint { iteration: it, alpha: dot(&off, &axes[0]), beta: dot(&off, &axes[1]) }
        })
        .collect();
    let extent = |f: fn(&PathPoint) -> f64| {
        let r = path.iter().map(|p| f(p).abs()).fold(0.0, f64::max);
        if r > 0.0 {
            EXTENT_FACTOR * r
        } else {
            EXTENT_FACTOR
        }
    };
    let (ra, rb) = (extent(|p| p.alpha), extent(|p| p.beta));
    let m = (grid_size - 1) as f64;
    let coords = |r: f64| -> Vec<f64> { (0..grid_size).map(|i| r * (2.0 * i as f64 - m) / m).collect() };
    let (alpha, beta) = (coords(ra), coords(rb));

    let flat = exec.map_range(grid_size * grid_size, |k| {
        let (a, b) = (alpha[k / grid_size], beta[k % grid_size]);
        let p: Vec<f64> = (0..d).map(|j| center[j] + a * axes[0][j] + b * axes[1][j]).collect();
        loss_fn(&p)
    });
    let flat = flat.into_iter().collect::<Result<Vec<f64>>>()?;
    let grid = flat.chunks(grid_size).map(|c| c.to_vec()).collect();

    let [u1, u2]: [Vec<f64>; 2] = axes.try_into().expect("two axes");
    Ok(LandscapeGrid {
        pc_axes: [u1, u2],
        center: center.clone(),
        singular_values: [sv(0), sv(1)],
        random_axes,
        alpha,
        beta,
        grid,
        path,
    })
}
