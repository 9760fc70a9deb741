//! Labelled datasets: generators, normalization, PCA and CSV I/O.
//!
//! On-disk layout is a CSV with header `x0,…,x{d−1},label,split` (labels `1`/`2`,
//! split `train`/`test`) plus a `<name>.meta.json` sidecar holding [`DatasetMeta`].

mod pca;
mod synthetic;
mod tetromino;
mod worst_case;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use pca::{fit_pca, pca_pipeline, PcaModel};
pub use synthetic::{
    gen_circles, gen_circles_with, gen_moons, gen_moons_with, Scaling, CIRCLES_FACTOR, CIRCLES_NOISE, MOONS_NOISE,
};
pub use tetromino::{gen_tetromino, tetromino_patterns, TETROMINO_NOISE_BOUND};
pub use worst_case::{gen_worst_case, OmegaConvention, WorstCase, WorstCaseVariant, MAX_WORST_CASE_N};

use crate::classify::Class;
use crate::error::{Error, Result};

/// Fraction of generated samples assigned to the training split.
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Per-dimension min-max map onto `[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a Vec<f64>>) -> Option<Self> {
        let mut it = rows.into_iter();
        let first = it.next()?;
        let (mut min, mut max) = (first.clone(), first.clone());
        for r in it {
            for (j, &v) in r.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Some(Normalizer { min, max })
    }

    /// A constant dimension maps to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    2.0 * (v - self.min[j]) / span - 1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(j, &v)| self.min[j] + (v + 1.0) * 0.5 * (self.max[j] - self.min[j]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator: String,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalizer>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl DatasetMeta {
    pub fn new(generator: &str, seed: Option<u64>) -> Self {
        DatasetMeta { generator: generator.to_string(), seed, ..Default::default() }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Rows and labels of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Class>,
}

impl Subset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&Class::One) && self.labels.contains(&Class::Two)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Class>,
    pub split: Vec<Split>,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// Checks shape consistency and finiteness. Class balance is checked by
    /// [`Dataset::check_trainable`], since some analysis sets are single-class
    /// on purpose.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Class>, split: Vec<Split>, meta: DatasetMeta) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("dataset has no samples".into()));
        }
        if labels.len() != features.len() || split.len() != features.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows, {} labels, {} split tags",
                features.len(),
                labels.len(),
                split.len()
            )));
        }
        let d = features[0].len();
        if d == 0 {
            return Err(Error::InvalidArgument("samples have no features".into()));
        }
        for (i, r) in features.iter().enumerate() {
            if r.len() != d {
                return Err(Error::InvalidArgument(format!("row {i} has {} features, expected {d}", r.len())));
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("row {i} holds non-finite value {v}")));
            }
        }
        Ok(Dataset { features, labels, split, meta })
    }

    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn subset(&self, which: Split) -> Subset {
        let (rows, labels) = self
            .features
            .iter()
            .zip(&self.labels)
            .zip(&self.split)
            .filter(|(_, &s)| s == which)
            .map(|((r, &l), _)| (r.clone(), l))
            .unzip();
        Subset { rows, labels }
    }

    pub fn train(&self) -> Subset {
        self.subset(Split::Train)
    }

    pub fn test(&self) -> Subset {
        self.subset(Split::Test)
    }

    pub fn count(&self, which: Split) -> usize {
        self.split.iter().filter(|&&s| s == which).count()
    }

    pub fn check_trainable(&self) -> Result<()> {
        if !self.train().has_both_classes() {
            return Err(Error::DegenerateFit("training split must contain both classes".into()));
        }
        Ok(())
    }

    /// Min-max normalizes every row onto `[−1, 1]` using training-split ranges.
    pub fn normalized(mut self) -> Self {
        let norm = Normalizer::fit(
            self.features.iter().zip(&self.split).filter(|(_, &s)| s == Split::Train).map(|(r, _)| r),
        )
        .expect("non-empty training split");
        for r in &mut self.features {
            *r = norm.apply(r);
        }
        self.meta.normalization = Some(norm);
        self
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        let mut header: Vec<String> = (0..self.n_features()).map(|j| format!("x{j}")).collect();
        header.push("label".into());
        header.push("split".into());
        w.write_record(&header)?;
        for ((r, l), s) in self.features.iter().zip(&self.labels).zip(&self.split) {
            let mut rec: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            rec.push(l.to_string());
            rec.push(s.as_str().into());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_meta(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &self.meta)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`.
    pub fn save(&self, dir: &Path, name: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(&dir.join(format!("{name}.csv")))?;
        self.write_meta(&dir.join(format!("{name}.meta.json")))
    }
}

/// How the label column maps onto classes.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LabelMap {
    /// Accept `1` and `2` only.
    #[default]
    Numeric,
    /// First string is class 1, second class 2.
    Named(String, String),
}

impl LabelMap {
    fn resolve(&self, raw: &str) -> Option<Class> {
        match self {
            LabelMap::Numeric => match raw.trim().parse::<f64>().ok()? {
                1.0 => Some(Class::One),
                2.0 => Some(Class::Two),
                _ => None,
            },
            LabelMap::Named(a, b) => {
                let t = raw.trim();
                if t == a {
                    Some(Class::One)
                } else if t == b {
                    Some(Class::Two)
                } else {
                    None
                }
            }
        }
    }
}

/// Reads a numeric CSV with a header. `label_column` names the label; an
/// optional `split` column tags rows as `train`/`test` (default: all train).
/// Every other column is a feature.
pub fn load_csv(path: &Path, label_column: &str, labels: &LabelMap) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let label_idx = headers.iter().position(|h| h.trim() == label_column).ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        row: 1,
        column: 0,
        message: format!("no column named {label_column:?}"),
    })?;
    let split_idx = headers.iter().position(|h| h.trim() == "split");
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != label_idx && Some(c) != split_idx).collect();

    let (mut features, mut classes, mut split) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2; // 1-based, header is row 1
        let mut x = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let raw = rec.get(c).unwrap_or("");
            let v: f64 = raw.trim().parse().map_err(|_| Error::Format {
                path: path.to_path_buf(),
                row,
                column: c + 1,
                message: format!("not a number: {raw:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    row,
                    column: c + 1,
                    message: format!("non-finite value {raw:?}"),
                });
            }
            x.push(v);
        }
        let raw_label = rec.get(label_idx).unwrap_or("");
        let class = labels.resolve(raw_label).ok_or_else(|| Error::Label {
            path: path.to_path_buf(),
            row,
            value: raw_label.to_string(),
        })?;
        let tag = match split_idx.map(|s| rec.get(s).unwrap_or("").trim()) {
            None | Some("train") => Split::Train,
            Some("test") => Split::Test,
            Some(other) => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    row,
                    column: split_idx.unwrap() + 1,
                    message: format!("split must be train or test, got {other:?}"),
                })
            }
        };
        features.push(x);
        classes.push(class);
        split.push(tag);
    }
    let meta = DatasetMeta::new("csv", None)
        .param("path", path.display().to_string())
        .param("label_column", label_column);
    Dataset::new(features, classes, split, meta)
}

/// Seeded permutation: the first `n_train` shuffled indices are training samples.
pub fn split_tags(n: usize, n_train: usize, seed: u64) -> Vec<Split> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut tags = vec![Split::Test; n];
    for &i in &idx[..n_train.min(n)] {
        tags[i] = Split::Train;
    }
    tags
}

pub(crate) fn train_count(n: usize, fraction: f64) -> usize {
    ((n as f64) * fraction).round() as usize
}
