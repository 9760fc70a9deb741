//! Shattering checks for one-dimensional hypothesis families.
//!
//! `PeriodicInterval(ℓ)` is decided exactly: a labeling of points on the
//! circle is a union of at most `ℓ` arcs iff its cyclic runs of 1s number at
//! most `ℓ`. The other families are searched numerically; a failed search is
//! reported as inconclusive, never as a proof of non-shattering.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{BoundCircuit, CircuitSpec, Scheme};

pub const MAX_SHATTER_POINTS: usize = 12;

/// Readout gap a circuit witness must clear.
const MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HypothesisFamily {
    /// Indicators of unions of at most `layers` arcs of the 2π-periodic circle.
    PeriodicInterval { layers: usize },
    /// `x ↦ [cos(ωx) < 0]` for `ω ∈ (0, omega_max]`.
    Sinusoid { omega_max: f64 },
    /// Thresholded readout `p0` of a one-feature circuit, either orientation.
    OriginalCircuit { spec: CircuitSpec },
    CompressedCircuit { spec: CircuitSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShatterStatus {
    Shattered,
    NotShattered,
    /// Some labelings found no witness within the search budget.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterResult {
    pub points: Vec<f64>,
    pub family: HypothesisFamily,
    pub status: ShatterStatus,
    pub shattered: bool,
    /// Labeling (character `i` is the label of point `i`) to witness parameters.
    /// Arc families give `[start₀, end₀, start₁, end₁, …]`; sinusoids `[ω]`;
    /// circuits their parameter vector followed by the threshold.
    pub witness_params: BTreeMap<String, Vec<f64>>,
    pub failing_labeling: Option<Vec<u8>>,
    pub undecided: Vec<Vec<u8>>,
}

pub fn labeling_key(labels: &[u8]) -> String {
    labels.iter().map(|&y| char::from(b'0' + y)).collect()
}

fn labeling(bits: usize, m: usize) -> Vec<u8> {
    (0..m).map(|i| ((bits >> i) & 1) as u8).collect()
}

/// Exact arc placement: `Some(endpoints)` when at most `layers` arcs suffice.
pub(crate) fn arc_witness(points: &[f64], labels: &[u8], layers: usize) -> Option<Vec<f64>> {
    let m = points.len();
    let mut order: Vec<(f64, u8)> = points.iter().map(|x| x.rem_euclid(TAU)).zip(labels.iter().copied()).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in order.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
            return None;
        }
    }
    let ones = order.iter().filter(|p| p.1 == 1).count();
    if ones == 0 {
        return Some(vec![]);
    }
    if ones == m {
        return Some(vec![0.0, TAU]);
    }
    // Rotate so the sequence starts right after a 0.
    let start = (0..m).find(|&i| order[i].1 == 1 && order[(i + m - 1) % m].1 == 0).unwrap();
    let angle = |k: usize| order[k % m].0 + TAU * (k / m) as f64;
    let mut arcs = Vec::new();
    let mut k = start;
    while k < start + m {
        if order[k % m].1 == 1 {
            let first = k;
            while order[(k + 1) % m].1 == 1 {
                k += 1;
            }
            let lo = 0.5 * (angle(first + m - 1) - TAU + angle(first));
            let hi = 0.5 * (angle(k) + angle(k + 1));
            arcs.push((lo, hi));
        }
        k += 1;
    }
    (arcs.len() <= layers).then(|| arcs.into_iter().flat_map(|(a, b)| [a, b]).collect())
}

fn sinusoid_witness(points: &[f64], labels: &[u8], omega_max: f64, budget: usize) -> Option<Vec<f64>> {
    (1..=budget).map(|i| omega_max * i as f64 / budget as f64).find_map(|w| {
        points
            .iter()
            .zip(labels)
            .all(|(&x, &y)| {
                let c = (w * x).cos();
                if y == 1 {
                    c < 0.0
                } else {
                    c > 0.0
                }
            })
            .then(|| vec![w])
    })
}

/// Largest gap by which one threshold separates the labels, over both orientations,
/// and the threshold achieving it.
fn readout_margin(p: &[f64], labels: &[u8]) -> (f64, f64) {
    let (mut lo1, mut hi1, mut lo0, mut hi0) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (&v, &y) in p.iter().zip(labels) {
        if y == 1 {
            lo1 = lo1.min(v);
            hi1 = hi1.max(v);
        } else {
            lo0 = lo0.min(v);
            hi0 = hi0.max(v);
        }
    }
    if lo1.is_infinite() || lo0.is_infinite() {
        return (f64::INFINITY, if lo1.is_infinite() { 1.5 } else { -0.5 });
    }
    let up = lo1 - hi0;
    let down = lo0 - hi1;
    if up >= down {
        (up, 0.5 * (lo1 + hi0))
    } else {
        (down, 0.5 * (lo0 + hi1))
    }
}

fn circuit_witness(spec: &CircuitSpec, points: &[f64], labels: &[u8], budget: usize, seed: u64) -> Option<Vec<f64>> {
    let dim = spec.n_params();
    let eval = |params: &[f64]| -> (f64, f64) {
        let p: Vec<f64> =
            points.iter().map(|&x| BoundCircuit::build_unchecked(spec, params, &[x]).p0()).collect();
        readout_margin(&p, labels)
    };
    let done = |params: &[f64], (margin, tau): (f64, f64)| {
        (margin > MARGIN_TOL).then(|| {
            let mut w = params.to_vec();
            w.push(tau);
            w
        })
    };
    let mut used = 0usize;
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();

    // Coarse stage: full 64-point grid when it fits, random samples otherwise.
    const GRID: usize = 64;
    let coarse = budget / 2;
    if GRID.checked_pow(dim as u32).is_some_and(|g| g <= coarse) {
        for idx in 0..GRID.pow(dim as u32) {
            let params: Vec<f64> = (0..dim).map(|d| TAU * ((idx / GRID.pow(d as u32)) % GRID) as f64 / GRID as f64).collect();
            let r = eval(&params);
            used += 1;
            if let Some(w) = done(&params, r) {
                return Some(w);
            }
            starts.push((r.0, params));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..coarse {
            let params: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..TAU)).collect();
            let r = eval(&params);
            used += 1;
            if let Some(w) = done(&params, r) {
                return Some(w);
            }
            starts.push((r.0, params));
        }
    }

    // Refine the best starts by coordinate search with a shrinking step.
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    starts.truncate(8);
    for (mut best, mut params) in starts {
        let mut step = 0.5;
        while step > 1e-6 && used < budget {
            let mut improved = false;
            for d in 0..dim {
                for dir in [1.0, -1.0] {
                    let mut trial = params.clone();
                    trial[d] += dir * step;
                    let r = eval(&trial);
                    used += 1;
                    if let Some(w) = done(&trial, r) {
                        return Some(w);
                    }
                    if r.0 > best {
                        best = r.0;
                        params = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    None
}

/// Checks every labeling of `points`. `search_budget` bounds the number of
/// candidate evaluations per labeling for the searched families.
pub fn shatter_check(
    family: &HypothesisFamily,
    points: &[f64],
    search_budget: usize,
    exec: Exec,
) -> Result<ShatterResult> {
    let m = points.len();
    if m == 0 || m > MAX_SHATTER_POINTS {
        return Err(Error::InvalidArgument(format!("need 1..={MAX_SHATTER_POINTS} points, got {m}")));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("points must be finite".into()));
    }
    match family {
        HypothesisFamily::PeriodicInterval { layers } if *layers == 0 => {
            return Err(Error::InvalidArgument("layers must be ≥ 1".into()))
        }
        HypothesisFamily::Sinusoid { omega_max } if !(omega_max.is_finite() && *omega_max > 0.0) => {
            return Err(Error::InvalidArgument("omega_max must be positive".into()))
        }
        HypothesisFamily::OriginalCircuit { spec } | HypothesisFamily::CompressedCircuit { spec } => {
            spec.validate()?;
            let want = match family {
                HypothesisFamily::OriginalCircuit { .. } => Scheme::Original,
                _ => Scheme::Compressed,
            };
            if spec.scheme != want {
                return Err(Error::InvalidArgument(format!("family expects a {want:?} circuit")));
            }
            if spec.n_features != 1 {
                return Err(Error::UnsupportedDimension(format!(
                    "shattering needs a one-feature circuit, got {} features",
                    spec.n_features
                )));
            }
        }
        _ => {}
    }

    let witnesses: Vec<Option<Vec<f64>>> = exec.map_range(1 << m, |bits| {
        let labels = labeling(bits, m);
        match family {
            HypothesisFamily::PeriodicInterval { layers } => arc_witness(points, &labels, *layers),
            HypothesisFamily::Sinusoid { omega_max } => sinusoid_witness(points, &labels, *omega_max, search_budget),
            HypothesisFamily::OriginalCircuit { spec } | HypothesisFamily::CompressedCircuit { spec } => circuit_witness(spec, points, &labels, search_budget, bits as u64),
        }
    });

    let mut witness_params = BTreeMap::new();
    let mut missing = Vec::new();
    for (bits, w) in witnesses.into_iter().enumerate() {
        let labels = labeling(bits, m);
        match w {
            Some(w) => {
                witness_params.insert(labeling_key(&labels), w);
            }
            None => missing.push(labels),
        }
    }
    let exact = matches!(family, HypothesisFamily::PeriodicInterval { .. });
    let (status, failing_labeling, undecided) = if missing.is_empty() {
        (ShatterStatus::Shattered, None, vec![])
    } else if exact {
        let alternating: Vec<u8> = (0..m).map(|i| (i % 2) as u8).collect();
        let fail = if missing.contains(&alternating) { alternating } else { missing[0].clone() };
        (ShatterStatus::NotShattered, Some(fail), vec![])
    } else {
        (ShatterStatus::Inconclusive, None, missing)
    };
    if status != ShatterStatus::Shattered {
        witness_params.clear();
    }
    Ok(ShatterResult {
        points: points.to_vec(),
        family: *family,
        status,
        shattered: status == ShatterStatus::Shattered,
        witness_params,
        failing_labeling,
        undecided,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcRow {
    pub layers: usize,
    /// Size of the generic point set certified as shattered.
    pub shattered_size: usize,
    /// Size of the point set whose alternating labeling is certified unreachable.
    pub alternating_size: usize,
    pub certified: bool,
}

/// `m` generic points spread over one period.
pub fn generic_points(m: usize) -> Vec<f64> {
    (0..m).map(|i| (TAU * i as f64 + 0.1) / m as f64).collect()
}

/// For each `ℓ ≤ layers_max`, certifies that `2ℓ + 1` points are shattered by
/// unions of `ℓ` arcs and that the alternating labeling of `2ℓ + 2` points is not.
pub fn vc_profile(layers_max: usize, exec: Exec) -> Result<Vec<VcRow>> {
    if layers_max == 0 || layers_max > 4 {
        return Err(Error::InvalidArgument(format!("layers_max must lie in 1..=4, got {layers_max}")));
    }
    (1..=layers_max)
        .map(|l| {
            let family = HypothesisFamily::PeriodicInterval { layers: l };
            let yes = shatter_check(&family, &generic_points(2 * l + 1), 0, exec)?;
            let no = shatter_check(&family, &generic_points(2 * l + 2), 0, exec)?;
            let alternating: Vec<u8> = (0..2 * l + 2).map(|i| (i % 2) as u8).collect();
            Ok(VcRow {
                layers: l,
                shattered_size: 2 * l + 1,
                alternating_size: 2 * l + 2,
                certified: yes.shattered
                    && no.status == ShatterStatus::NotShattered
                    && no.failing_labeling.as_deref() == Some(alternating.as_slice()),
            })
        })
        .collect()
}
