//! Finite photon statistics on the readout probability.
//!
//! A readout `p` is estimated from detector counts as `N₀ / (N₀ + N₁)`. In
//! the default Poisson mode each detector fires independently with mean
//! `N·p` and `N·(1 − p)`, and an empty shot is redrawn (only coincidences are
//! recorded). The binomial mode fixes the total at `N`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::classify::{accuracy, LdaModel};
use crate::data::Subset;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{batch_p0, CircuitSpec};

pub const DEFAULT_TOTAL_COUNTS: u64 = 10_000;
pub const DEFAULT_REPETITIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountModel {
    #[default]
    Poisson,
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_counts")]
    pub total_counts: u64,
    #[serde(default = "default_reps")]
    pub mc_repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: CountModel,
}

fn default_counts() -> u64 {
    DEFAULT_TOTAL_COUNTS
}

fn default_reps() -> usize {
    DEFAULT_REPETITIONS
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            total_counts: DEFAULT_TOTAL_COUNTS,
            mc_repetitions: DEFAULT_REPETITIONS,
            seed: 0,
            model: CountModel::Poisson,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_counts == 0 {
            return Err(Error::InvalidArgument("total_counts must be ≥ 1".into()));
        }
        if self.mc_repetitions == 0 {
            return Err(Error::InvalidArgument("mc_repetitions must be ≥ 1".into()));
        }
        Ok(())
    }
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64> {
    if mean <= 0.0 {
        return Ok(0.0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng))
}

/// One shot-noise estimate of `p`.
pub fn sample_probability<R: Rng + ?Sized>(p: f64, counts: u64, model: CountModel, rng: &mut R) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    if counts == 0 {
        return Err(Error::InvalidArgument("counts must be ≥ 1".into()));
    }
    match model {
        CountModel::Poisson => {
            let n = counts as f64;
            loop {
                let n0 = poisson_draw(n * p, rng)?;
                let n1 = poisson_draw(n * (1.0 - p), rng)?;
                if n0 + n1 > 0.0 {
                    return Ok(n0 / (n0 + n1));
                }
            }
        }
        CountModel::Binomial => {
            let d = Binomial::new(counts, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(d.sample(rng) as f64 / counts as f64)
        }
    }
}

/// Generator for repetition `rep`: one ChaCha stream per repetition, so results
/// do not depend on scheduling.
pub(crate) fn stream_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub mean_accuracy: f64,
    /// Sample standard deviation across repetitions (0 for one repetition).
    pub accuracy_sd: f64,
    pub noiseless_accuracy: f64,
    pub total_counts: u64,
    pub repetitions: usize,
    pub model: CountModel,
    /// Set when only one repetition ran, so the spread is undefined.
    pub single_repetition: bool,
    pub per_repetition: Vec<f64>,
}

impl NoiseReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(["repetition", "accuracy"])?;
        for (i, a) in self.per_repetition.iter().enumerate() {
            w.write_record([i.to_string(), format!("{a:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Monte Carlo accuracy of a fixed model when every readout of `subset` is
/// replaced by a shot-noise estimate.
pub fn mc_accuracy(
    spec: &CircuitSpec,
    params: &[f64],
    lda: &LdaModel,
    subset: &Subset,
    config: &NoiseConfig,
    exec: Exec,
) -> Result<NoiseReport> {
    config.validate()?;
    if subset.is_empty() {
        return Err(Error::InvalidArgument("no samples to evaluate".into()));
    }
    let p = batch_p0(spec, params, &subset.rows, exec)?;
    let noiseless_accuracy = accuracy(&lda.predict_all(&p), &subset.labels)?;
    let per_repetition = exec
        .map_range(config.mc_repetitions, |rep| -> Result<f64> {
            let mut rng = stream_rng(config.seed, rep as u64);
            let mut hits = 0usize;
            for (&pi, &label) in p.iter().zip(&subset.labels) {
                let ph = sample_probability(pi.clamp(0.0, 1.0), config.total_counts, config.model, &mut rng)?;
                hits += usize::from(lda.predict(ph) == label);
            }
            Ok(hits as f64 / p.len() as f64)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let (mean_accuracy, accuracy_sd) = mean_sd(&per_repetition);
    Ok(NoiseReport {
        mean_accuracy,
        accuracy_sd,
        noiseless_accuracy,
        total_counts: config.total_counts,
        repetitions: config.mc_repetitions,
        model: config.model,
        single_repetition: config.mc_repetitions == 1,
        per_repetition,
    })
}
