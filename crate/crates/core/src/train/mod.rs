//! Full-batch Adam training of a circuit against a discriminant loss.

mod adam;
mod grad;
mod loss;

use std::f64::consts::TAU;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use grad::{grad_finite_diff, grad_param_shift, grad_param_shift_with, FdMode, Objective};
pub use loss::{
    cross_entropy_loss, cross_entropy_loss_grad, fisher_lda_loss, fisher_lda_loss_grad, LossKind, FISHER_EPS,
};

use crate::classify::{accuracy, fit_lda_with, LdaModel, Priors};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{batch_p0, CircuitSpec, ParamVector};
use crate::noise::{sample_probability, stream_rng, CountModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    ParamShift,
    FdForward,
    FdBackward,
    FdCentral,
    /// Backward differences, with central differences every `fd_central_every` iterations.
    FdMixed,
}

/// Shot noise applied to training readouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingNoise {
    pub total_counts: u64,
    #[serde(default)]
    pub model: CountModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_iters: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub gradient_mode: GradientMode,
    pub fd_step: f64,
    pub fd_central_every: usize,
    pub convergence_tol: f64,
    pub convergence_window: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub priors: Priors,
    /// Parameter snapshots are kept every this many iterations.
    pub record_every: usize,
    pub training_noise: Option<TrainingNoise>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iters: 10_000,
            learning_rate: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            gradient_mode: GradientMode::ParamShift,
            fd_step: 1e-3,
            fd_central_every: 10,
            convergence_tol: 1e-7,
            convergence_window: 50,
            seed: 0,
            loss: LossKind::Fisher,
            priors: Priors::Empirical,
            record_every: 10,
            training_noise: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.max_iters == 0 {
            return bad("max_iters must be ≥ 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if !(self.adam_eps.is_finite() && self.adam_eps > 0.0) {
            return bad(format!("adam_eps must be positive, got {}", self.adam_eps));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return bad(format!("fd_step must be positive, got {}", self.fd_step));
        }
        if self.fd_central_every == 0 || self.record_every == 0 || self.convergence_window == 0 {
            return bad("fd_central_every, record_every and convergence_window must be ≥ 1".into());
        }
        if self.convergence_tol.is_nan() || self.convergence_tol < 0.0 {
            return bad(format!("convergence_tol must be ≥ 0, got {}", self.convergence_tol));
        }
        if let Some(n) = &self.training_noise {
            if n.total_counts == 0 {
                return bad("training_noise.total_counts must be ≥ 1".into());
            }
            if self.gradient_mode != GradientMode::ParamShift {
                return bad("training noise needs gradient_mode = param-shift".into());
            }
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub spec: CircuitSpec,
    pub config: TrainConfig,
    /// Loss at the parameters of every iteration, before the update.
    pub loss_trajectory: Vec<f64>,
    pub param_trajectory: Vec<ParamVector>,
    /// Iteration index of each entry in `param_trajectory`.
    pub trajectory_iterations: Vec<usize>,
    pub initial_params: ParamVector,
    /// Lowest-loss parameters seen.
    pub final_params: ParamVector,
    pub final_loss: f64,
    pub final_threshold: LdaModel,
    /// The final class means coincided; `final_threshold` is a fallback.
    pub threshold_tied: bool,
    pub initial_train_accuracy: f64,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

impl TrainReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
    }

    pub fn write_loss_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(["iteration", "loss"])?;
        for (i, l) in self.loss_trajectory.iter().enumerate() {
            w.write_record([i.to_string(), format!("{l:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_params_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        let mut header = vec!["iteration".to_string()];
        header.extend((0..self.final_params.len()).map(|i| format!("xi{i}")));
        w.write_record(&header)?;
        for (it, p) in self.trajectory_iterations.iter().zip(&self.param_trajectory) {
            let mut rec = vec![it.to_string()];
            rec.extend(p.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parameters drawn uniformly from `[0, 2π)`.
pub fn initial_params(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// Fits the threshold, falling back to the common mean when the class means tie.
pub(crate) fn fit_threshold(p: &[f64], labels: &[crate::classify::Class], priors: Priors) -> Result<(LdaModel, bool)> {
    match fit_lda_with(p, labels, priors) {
        Ok(m) => Ok((m, false)),
        Err(Error::TiedMeans { threshold }) => Ok((
            LdaModel { threshold, orientation: 1, class_means: (threshold, threshold), pooled_variance: 0.0 },
            true,
        )),
        Err(e) => Err(e),
    }
}

/// Trains from `config.seed`'s uniform initialization.
pub fn train(spec: &CircuitSpec, dataset: &Dataset, config: &TrainConfig) -> Result<TrainReport> {
    let init = initial_params(spec.n_params(), config.seed);
    train_from(spec, dataset, config, init, Exec::default())
}

/// Trains from explicit starting parameters.
pub fn train_from(
    spec: &CircuitSpec,
    dataset: &Dataset,
    config: &TrainConfig,
    init: Vec<f64>,
    exec: Exec,
) -> Result<TrainReport> {
    config.validate()?;
    spec.validate()?;
    dataset.check_trainable()?;
    if init.len() != spec.n_params() {
        return Err(Error::InvalidArgument(format!(
            "expected {} initial parameters, got {}",
            spec.n_params(),
            init.len()
        )));
    }
    let train_set = dataset.train();
    let obj = Objective::new(spec, &train_set.rows, &train_set.labels, config.loss, exec)?;
    let adam = config.adam();

    let p_init = obj.p_values(&init)?;
    let (lda0, _) = fit_threshold(&p_init, &train_set.labels, config.priors)?;
    let initial_train_accuracy = accuracy(&lda0.predict_all(&p_init), &train_set.labels)?;

    let mut params = init.clone();
    let mut state = AdamState::new(params.len());
    let mut loss_trajectory = Vec::new();
    let mut running_min: Vec<f64> = Vec::new();
    let mut param_trajectory = Vec::new();
    let mut trajectory_iterations = Vec::new();
    let mut best = (f64::INFINITY, params.clone());
    let mut converged = false;

    for it in 0..config.max_iters {
        let (value, grad) = loss_and_grad(&obj, &params, config, it)?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::DegenerateLoss(format!("non-finite loss or gradient at iteration {it}")));
        }
        loss_trajectory.push(value);
        if value < best.0 {
            best = (value, params.clone());
        }
        running_min.push(best.0);
        if it % config.record_every == 0 {
            param_trajectory.push(ParamVector(params.clone()));
            trajectory_iterations.push(it);
        }
        if it >= config.convergence_window && running_min[it - config.convergence_window] - best.0 < config.convergence_tol {
            converged = true;
            break;
        }
        (params, state) = adam_step(&params, &state, &grad, &adam)?;
    }
    let iterations_run = loss_trajectory.len();
    let last = iterations_run - 1;
    if trajectory_iterations.last() != Some(&last) {
        param_trajectory.push(ParamVector(params.clone()));
        trajectory_iterations.push(last);
    }

    let (final_loss, final_params) = best;
    let p_train = obj.p_values(&final_params)?;
    let (final_threshold, threshold_tied) = fit_threshold(&p_train, &train_set.labels, config.priors)?;
    let train_accuracy = accuracy(&final_threshold.predict_all(&p_train), &train_set.labels)?;
    let test_set = dataset.test();
    let test_accuracy = if test_set.is_empty() {
        None
    } else {
        let p_test = batch_p0(spec, &final_params, &test_set.rows, exec)?;
        Some(accuracy(&final_threshold.predict_all(&p_test), &test_set.labels)?)
    };

    Ok(TrainReport {
        spec: *spec,
        config: config.clone(),
        loss_trajectory,
        param_trajectory,
        trajectory_iterations,
        initial_params: ParamVector(init),
        final_params: ParamVector(final_params),
        final_loss,
        final_threshold,
        threshold_tied,
        initial_train_accuracy,
        train_accuracy,
        test_accuracy,
        iterations_run,
        converged,
    })
}

fn loss_and_grad(obj: &Objective<'_>, params: &[f64], config: &TrainConfig, it: usize) -> Result<(f64, Vec<f64>)> {
    let f = |p: &[f64]| obj.value(p);
    let h = config.fd_step;
    match config.gradient_mode {
        GradientMode::ParamShift => match &config.training_noise {
            None => grad_param_shift(obj, params),
            Some(noise) => {
                let mut rng = stream_rng(config.seed, it as u64);
                let mut perturb = |p: &mut [f64]| -> Result<()> {
                    for v in p.iter_mut() {
                        *v = sample_probability(v.clamp(0.0, 1.0), noise.total_counts, noise.model, &mut rng)?;
                    }
                    Ok(())
                };
                grad_param_shift_with(obj, params, Some(&mut perturb))
            }
        },
        GradientMode::FdCentral => Ok((f(params)?, grad_finite_diff(f, params, FdMode::Central, h, None)?)),
        mode => {
            let base = f(params)?;
            let fd = match mode {
                GradientMode::FdForward => FdMode::Forward,
                GradientMode::FdMixed if it.is_multiple_of(config.fd_central_every) => FdMode::Central,
                _ => FdMode::Backward,
            };
            Ok((base, grad_finite_diff(f, params, fd, h, Some(base))?))
        }
    }
}

/// Several independent restarts of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seeds: Vec<u64>,
    pub reports: Vec<TrainReport>,
    /// Index of the restart with the lowest final training loss.
    pub selected: usize,
    pub selected_test_accuracy: Option<f64>,
    pub best_test_accuracy: Option<f64>,
    pub mean_test_accuracy: Option<f64>,
    pub mean_train_accuracy: f64,
}

/// Runs one training per seed (in parallel across seeds when enabled).
pub fn train_restarts(spec: &CircuitSpec, dataset: &Dataset, config: &TrainConfig, seeds: &[u64]) -> Result<RestartSummary> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds given".into()));
    }
    let reports = Exec::default()
        .map_slice(seeds, |&seed| {
            let cfg = TrainConfig { seed, ..config.clone() };
            train_from(spec, dataset, &cfg, initial_params(spec.n_params(), seed), Exec::Sequential)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let selected = (0..reports.len())
        .min_by(|&a, &b| reports[a].final_loss.total_cmp(&reports[b].final_loss))
        .expect("non-empty");
    let tests: Vec<f64> = reports.iter().filter_map(|r| r.test_accuracy).collect();
    let (best_test_accuracy, mean_test_accuracy) = if tests.len() == reports.len() {
        (
            tests.iter().copied().reduce(f64::max),
            Some(tests.iter().sum::<f64>() / tests.len() as f64),
        )
    } else {
        (None, None)
    };
    Ok(RestartSummary {
        seeds: seeds.to_vec(),
        selected,
        selected_test_accuracy: reports[selected].test_accuracy,
        best_test_accuracy,
        mean_test_accuracy,
        mean_train_accuracy: reports.iter().map(|r| r.train_accuracy).sum::<f64>() / reports.len() as f64,
        reports,
    })
}
