//! Synthetic categorical data with planted label-correlated literals, used
//! by the mining benchmark.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, AttributeSchema, CategoricalDataset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_rows: usize,
    pub n_attributes: usize,
    pub n_categories: usize,
    pub n_labels: usize,
    /// Share of attributes that carry signal.
    pub signal_fraction: f64,
    /// Probability that a signal attribute takes its label's category
    /// instead of a uniform draw.
    pub signal_strength: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_rows: 500,
            n_attributes: 10,
            n_categories: 3,
            n_labels: 2,
            signal_fraction: 0.2,
            signal_strength: 0.6,
            seed: 0,
        }
    }
}

/// Labels are uniform. Attribute `a` is uniform over its categories unless it
/// is one of the first `⌈signal_fraction · p⌉`, in which case with
/// probability `signal_strength` it copies `label mod n_categories`.
pub fn generate(config: &SynthConfig) -> CategoricalDataset {
    assert!(config.n_categories >= 2 && config.n_labels >= 2 && config.n_attributes >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_signal = (config.signal_fraction * config.n_attributes as f64).ceil() as usize;
    let mut x = Vec::with_capacity(config.n_rows * config.n_attributes);
    let mut y = Vec::with_capacity(config.n_rows);
    for i in 0..config.n_rows {
        // Cycle through labels first so every class is present.
        let label = if i < config.n_labels {
            i
        } else {
            rng.random_range(0..config.n_labels)
        };
        y.push(label as u32);
        for a in 0..config.n_attributes {
            let planted = a < n_signal && rng.random_bool(config.signal_strength.clamp(0.0, 1.0));
            let c = if planted {
                label % config.n_categories
            } else {
                rng.random_range(0..config.n_categories)
            };
            x.push(c as u32);
        }
    }
    let schemas = (0..config.n_attributes)
        .map(|a| AttributeSchema {
            name: format!("x{a}"),
            categories: (0..config.n_categories).map(|c| format!("c{c}")).collect(),
            kind: AttributeKind::Categorical,
        })
        .collect();
    let label_names = (0..config.n_labels).map(|k| format!("y{k}")).collect();
    CategoricalDataset::new(schemas, "label", label_names, x, y)
        .expect("generator respects the schema")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let config = SynthConfig {
            n_rows: 200,
            n_attributes: 7,
            ..SynthConfig::default()
        };
        let a = generate(&config);
        assert_eq!(a.n_rows(), 200);
        assert_eq!(a.n_attributes(), 7);
        assert_eq!(a.n_categories(), 21);
        assert_eq!(a, generate(&config));
    }

    #[test]
    fn signal_attributes_track_the_label() {
        let config = SynthConfig {
            n_rows: 2_000,
            n_attributes: 10,
            signal_fraction: 0.1,
            signal_strength: 0.9,
            ..SynthConfig::default()
        };
        let ds = generate(&config);
        let agree = |a: usize| {
            (0..ds.n_rows())
                .filter(|&i| ds.value(i, a) == ds.labels()[i])
                .count() as f64
                / ds.n_rows() as f64
        };
        // 0.9 + 0.1 / 3 for the signal attribute, about 1/3 otherwise.
        assert!(agree(0) > 0.85);
        assert!(agree(5) < 0.45);
    }
}
