//! One-dimensional LDA on readout probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label, serialized as `1` or `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Class {
    One,
    Two,
}

impl From<Class> for u8 {
    fn from(c: Class) -> u8 {
        match c {
            Class::One => 1,
            Class::Two => 2,
        }
    }
}

impl TryFrom<u8> for Class {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Class::One),
            2 => Ok(Class::Two),
            other => Err(format!("class label must be 1 or 2, got {other}")),
        }
    }
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// Class priors used for the threshold correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priors {
    #[default]
    Empirical,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub threshold: f64,
    /// `+1` when class 1 lies above the threshold, `−1` otherwise.
    pub orientation: i8,
    pub class_means: (f64, f64),
    pub pooled_variance: f64,
}

impl LdaModel {
    /// Class 1 iff `orientation · (p − τ) ≥ 0`; ties go to class 1.
    pub fn predict(&self, p: f64) -> Class {
        if f64::from(self.orientation) * (p - self.threshold) >= 0.0 {
            Class::One
        } else {
            Class::Two
        }
    }

    pub fn predict_all(&self, p: &[f64]) -> Vec<Class> {
        p.iter().map(|&v| self.predict(v)).collect()
    }
}

/// Per-class mean and count.
pub(crate) fn class_stats(p: &[f64], labels: &[Class]) -> [(f64, usize); 2] {
    let mut sums = [(0.0, 0usize); 2];
    for (&v, &c) in p.iter().zip(labels) {
        let slot = &mut sums[(u8::from(c) - 1) as usize];
        slot.0 += v;
        slot.1 += 1;
    }
    sums.map(|(s, n)| (if n > 0 { s / n as f64 } else { f64::NAN }, n))
}

/// Fits an equal-variance Gaussian threshold with empirical priors.
pub fn fit_lda(p_values: &[f64], labels: &[Class]) -> Result<LdaModel> {
    fit_lda_with(p_values, labels, Priors::Empirical)
}

/// `τ = (μ₁ + μ₂)/2 + σ² ln(π₂/π₁) / (μ₁ − μ₂)`, where `σ²` is the pooled
/// within-class variance (divisor `n − 2`).
pub fn fit_lda_with(p_values: &[f64], labels: &[Class], priors: Priors) -> Result<LdaModel> {
    if p_values.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} p-values but {} labels",
            p_values.len(),
            labels.len()
        )));
    }
    if let Some(bad) = p_values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!("p-value {bad} outside [0, 1]")));
    }
    let [(mu1, n1), (mu2, n2)] = class_stats(p_values, labels);
    if n1 == 0 || n2 == 0 {
        return Err(Error::DegenerateFit("both classes must be present".into()));
    }
    let ss: f64 = p_values
        .iter()
        .zip(labels)
        .map(|(&v, &c)| {
            let mu = if c == Class::One { mu1 } else { mu2 };
            (v - mu).powi(2)
        })
        .sum();
    let dof = p_values.len().saturating_sub(2);
    let pooled_variance = if dof == 0 { 0.0 } else { ss / dof as f64 };

    if mu1 == mu2 {
        return Err(Error::TiedMeans { threshold: mu1 });
    }
    let log_prior_ratio = match priors {
        Priors::Empirical => (n2 as f64 / n1 as f64).ln(),
        Priors::Uniform => 0.0,
    };
    let threshold = 0.5 * (mu1 + mu2) + pooled_variance * log_prior_ratio / (mu1 - mu2);
    Ok(LdaModel {
        threshold,
        orientation: if mu1 > mu2 { 1 } else { -1 },
        class_means: (mu1, mu2),
        pooled_variance,
    })
}

pub fn predict(model: &LdaModel, p: f64) -> Class {
    model.predict(p)
}

/// Fraction of exact matches.
pub fn accuracy(predictions: &[Class], labels: &[Class]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty set".into()));
    }
    let hits = predictions.iter().zip(labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use Class::{One, Two};

    #[test]
    fn symmetric_clusters_split_midway() {
        let m = fit_lda(&[0.1, 0.2, 0.8, 0.9], &[Two, Two, One, One]).unwrap();
        assert_abs_diff_eq!(m.threshold, 0.5, epsilon = 1e-15);
        assert_eq!(m.orientation, 1);

        let m = fit_lda(&[0.6, 0.8, 0.2, 0.4], &[One, One, Two, Two]).unwrap();
        assert_abs_diff_eq!(m.threshold, 0.5, epsilon = 1e-15);
    }

    /// 10 points of class 1 at 0.8 ± 0.1 and 90 of class 2 at 0.2 ± 0.1,
    /// built so the pooled variance is exactly 0.01.
    fn unbalanced() -> (Vec<f64>, Vec<Class>) {
        let mut p = Vec::new();
        let mut l = Vec::new();
        for i in 0..10 {
            p.push(0.8 + if i % 2 == 0 { 0.1 } else { -0.1 });
            l.push(One);
        }
        for i in 0..90 {
            p.push(0.2 + if i % 2 == 0 { 0.1 } else { -0.1 });
            l.push(Two);
        }
        // ss = 100 · 0.01 = 1; rescale deviations so ss / 98 = 0.01.
        let scale = (0.98f64).sqrt();
        for (v, c) in p.iter_mut().zip(&l) {
            let mu = if *c == One { 0.8 } else { 0.2 };
            *v = mu + (*v - mu) * scale;
        }
        (p, l)
    }

    #[test]
    fn unbalanced_priors_shift_threshold() {
        let (p, l) = unbalanced();
        let m = fit_lda(&p, &l).unwrap();
        assert_abs_diff_eq!(m.pooled_variance, 0.01, epsilon = 1e-12);
        let expected = 0.5 + 0.01 * 9f64.ln() / 0.6;
        assert_abs_diff_eq!(m.threshold, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(m.threshold, 0.5366, epsilon = 1e-4);

        let u = fit_lda_with(&p, &l, Priors::Uniform).unwrap();
        assert_abs_diff_eq!(u.threshold, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unbalanced_threshold_matches_bayes_boundary_scan() {
        // Cross-check: the threshold is where the prior-weighted Gaussian
        // likelihoods cross, found by a dense scan.
        let (p, l) = unbalanced();
        let m = fit_lda(&p, &l).unwrap();
        let (pi1, pi2) = (0.1f64, 0.9f64);
        let s2 = 0.01;
        let score = |t: f64| {
            let g1 = pi1 * (-(t - 0.8f64).powi(2) / (2.0 * s2)).exp();
            let g2 = pi2 * (-(t - 0.2f64).powi(2) / (2.0 * s2)).exp();
            (g1 - g2).abs()
        };
        let best = (0..=100_000)
            .map(|i| 0.3 + 0.4 * i as f64 / 100_000.0)
            .min_by(|a, b| score(*a).total_cmp(&score(*b)))
            .unwrap();
        assert_abs_diff_eq!(m.threshold, best, epsilon = 1e-5);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_lda(&[0.1, 0.2], &[One, One]), Err(Error::DegenerateFit(_))));
        match fit_lda(&[0.3, 0.5, 0.3, 0.5], &[One, One, Two, Two]) {
            Err(Error::TiedMeans { threshold }) => assert_abs_diff_eq!(threshold, 0.4, epsilon = 1e-15),
            other => panic!("expected tie, got {other:?}"),
        }
        assert!(fit_lda(&[1.5, 0.2], &[One, Two]).is_err());
        assert!(fit_lda(&[0.5], &[One, Two]).is_err());
    }

    #[test]
    fn predict_examples() {
        let up = LdaModel { threshold: 0.5, orientation: 1, class_means: (0.7, 0.3), pooled_variance: 0.0 };
        assert_eq!(predict(&up, 0.9), One);
        assert_eq!(predict(&up, 0.5), One);
        assert_eq!(predict(&up, 0.1), Two);
        let down = LdaModel { orientation: -1, ..up };
        assert_eq!(predict(&down, 0.9), Two);
        assert_eq!(predict(&down, 0.5), One);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[One, Two], &[One, Two]).unwrap(), 1.0);
        assert_eq!(accuracy(&[Two, One], &[One, Two]).unwrap(), 0.0);
        assert_eq!(accuracy(&[One, One, Two, Two], &[One, One, Two, One]).unwrap(), 0.75);
        assert!(accuracy(&[One], &[One, Two]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn label_serde() {
        assert_eq!(serde_json::to_string(&One).unwrap(), "1");
        assert_eq!(serde_json::from_str::<Class>("2").unwrap(), Two);
        assert!(serde_json::from_str::<Class>("3").is_err());
    }

    fn labelled() -> impl Strategy<Value = (Vec<f64>, Vec<Class>)> {
        proptest::collection::vec((0.0..=1.0f64, any::<bool>()), 2..60).prop_filter_map(
            "both classes",
            |v| {
                let p: Vec<f64> = v.iter().map(|x| x.0).collect();
                let l: Vec<Class> = v.iter().map(|x| if x.1 { One } else { Two }).collect();
                (l.contains(&One) && l.contains(&Two)).then_some((p, l))
            },
        )
    }

    proptest! {
        #[test]
        fn predict_monotone(t in 0.0..1.0f64, o in prop::bool::ANY, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let m = LdaModel { threshold: t, orientation: if o { 1 } else { -1 }, class_means: (0.0, 0.0), pooled_variance: 0.0 };
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            // Along increasing p the prediction flips at most once.
            if o {
                prop_assert!(!(m.predict(lo) == One && m.predict(hi) == Two));
            } else {
                prop_assert!(!(m.predict(lo) == Two && m.predict(hi) == One));
            }
        }

        #[test]
        fn order_invariant((p, l) in labelled(), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut idx: Vec<usize> = (0..p.len()).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let p2: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
            let l2: Vec<Class> = idx.iter().map(|&i| l[i]).collect();
            match (fit_lda(&p, &l), fit_lda(&p2, &l2)) {
                (Ok(a), Ok(b)) => {
                    // Summation order only perturbs the last bits of the statistics;
                    // the threshold amplifies that by 1/(μ₁ − μ₂).
                    prop_assert!((a.class_means.0 - b.class_means.0).abs() < 1e-12);
                    prop_assert!((a.class_means.1 - b.class_means.1).abs() < 1e-12);
                    prop_assert!((a.pooled_variance - b.pooled_variance).abs() < 1e-12);
                    if (a.class_means.0 - a.class_means.1).abs() > 1e-6 {
                        prop_assert!((a.threshold - b.threshold).abs() < 1e-9 * (1.0 + a.threshold.abs()));
                        prop_assert_eq!(a.orientation, b.orientation);
                    }
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "order changed fit outcome"),
            }
        }

        #[test]
        fn separable_data_fits_perfectly(lo in proptest::collection::vec(0.1..0.3f64, 1..30),
                                         hi in proptest::collection::vec(0.6..0.8f64, 1..30)) {
            // Balanced clusters narrower than half their offset: the midpoint of
            // the means always falls in the gap.
            let n = lo.len().min(hi.len());
            let mut p: Vec<f64> = lo[..n].to_vec();
            p.extend_from_slice(&hi[..n]);
            let l: Vec<Class> = (0..2 * n).map(|i| if i < n { Two } else { One }).collect();
            let m = fit_lda(&p, &l).unwrap();
            prop_assert_eq!(accuracy(&m.predict_all(&p), &l).unwrap(), 1.0);
        }
    }
}
