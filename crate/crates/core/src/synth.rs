//! Synthetic test and shifted training distributions.
//!
//! The test distribution mixes a structured Naive Bayes joint with a random
//! one, `P_test = (1-β) P_fix + β P_rand`; training distributions mix the
//! test distribution with a fresh random joint, `P_train = (1-γ) P_test + γ P_shift`.

use serde::{Deserialize, Serialize};

use crate::categorical::{Dataset, DomainSpec, JointMassFunction, MassFunction};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub domain: DomainSpec,
    pub beta: f64,
    pub class_probs: MassFunction,
    /// Mass given to the modal value of every per-class feature distribution.
    pub peak: f64,
    /// Seed of the random component of the test distribution.
    pub seed: u64,
}

impl GeneratorConfig {
    /// β = 0.3, class probabilities (0.4, 0.35, 0.25), peak 0.85 on the
    /// three-class, (2, 3, 3, 4)-valued benchmark domain.
    pub fn benchmark(seed: u64) -> Self {
        Self {
            domain: DomainSpec::benchmark(),
            beta: 0.3,
            class_probs: MassFunction::new(vec![0.4, 0.35, 0.25]).expect("valid class probabilities"),
            peak: 0.85,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta {} outside [0, 1]", self.beta)));
        }
        if self.class_probs.len() != self.domain.num_classes() {
            return Err(Error::ShapeMismatch(format!(
                "{} class probabilities for {} classes",
                self.class_probs.len(),
                self.domain.num_classes()
            )));
        }
        for &k in self.domain.feature_cards() {
            if !(self.peak > 1.0 / k as f64 && self.peak <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "peak {} must lie in (1/{k}, 1]",
                    self.peak
                )));
            }
        }
        Ok(())
    }
}

/// Modal value of feature `i` (cardinality `card`) for class `c`.
pub fn peak_value(class: usize, card: usize) -> usize {
    class % card
}

/// Naive Bayes joint with the configured class marginal; for each class and
/// feature the value `class mod |F_i|` gets `peak` and the rest is spread
/// uniformly.
pub fn make_fixed(config: &GeneratorConfig) -> Result<JointMassFunction> {
    config.validate()?;
    let d = &config.domain;
    let conditionals: Vec<Vec<Vec<f64>>> = (0..d.num_classes())
        .map(|c| {
            d.feature_cards()
                .iter()
                .map(|&k| {
                    let rest = (1.0 - config.peak) / (k - 1) as f64;
                    (0..k)
                        .map(|v| if v == peak_value(c, k) { config.peak } else { rest })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut probs = Vec::with_capacity(d.joint_size());
    for (c, cond) in conditionals.iter().enumerate() {
        for f in d.feature_vectors() {
            let v = f
                .iter()
                .enumerate()
                .fold(config.class_probs.get(c), |acc, (i, &x)| acc * cond[i][x]);
            probs.push(v);
        }
    }
    JointMassFunction::from_weights(d.clone(), &probs)
}

/// Independent uniform(0, 1) weight per cell, normalized.
pub fn make_random(domain: &DomainSpec, seed: u64) -> Result<JointMassFunction> {
    let mut rng = SeededRng::new(seed);
    let weights: Vec<f64> = (0..domain.joint_size()).map(|_| rng.uniform()).collect();
    JointMassFunction::from_weights(domain.clone(), &weights)
}

pub fn make_test(config: &GeneratorConfig) -> Result<JointMassFunction> {
    let fixed = make_fixed(config)?;
    let random = make_random(&config.domain, config.seed)?;
    fixed.mix(&random, config.beta)
}

/// Training distribution and its total-variation distance to `test`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedDistribution {
    pub joint: JointMassFunction,
    pub shift_tv: f64,
}

pub fn make_train(test: &JointMassFunction, gamma: f64, seed: u64) -> Result<ShiftedDistribution> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma {gamma} outside [0, 1]")));
    }
    let shift = make_random(test.domain(), seed)?;
    let joint = test.mix(&shift, gamma)?;
    let shift_tv = joint.total_variation(test)?;
    Ok(ShiftedDistribution { joint, shift_tv })
}

pub fn sample_dataset(joint: &JointMassFunction, n: usize, seed: u64) -> Dataset {
    joint.sample(n, seed)
}
