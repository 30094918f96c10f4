//! Uncertainty metrics: maximum probability, entropy, and the bootstrap
//! ensemble estimates of aleatoric, total and epistemic uncertainty.
//! Entropies are in bits.

use serde::{Deserialize, Serialize};

use crate::categorical::{Dataset, MassFunction};
use crate::error::{Error, Result};
use crate::nbc::{self, NbcModel};
use crate::rng::SeededRng;

/// Shannon entropy in bits with `0 log 0 = 0`, clipped to `[0, log2 k]`.
pub fn entropy_bits(dist: &MassFunction) -> f64 {
    entropy_of(dist.probs())
}

fn entropy_of(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.clamp(0.0, (probs.len() as f64).log2())
}

/// `1 - max_c p(c|f)`.
pub fn max_prob_uncertainty(model: &NbcModel, features: &[usize]) -> Result<f64> {
    let post = model.posterior(features)?;
    let k = post.len() as f64;
    let max = post.probs().iter().copied().fold(0.0, f64::max);
    Ok((1.0 - max).clamp(0.0, 1.0 - 1.0 / k))
}

/// Entropy of the class posterior.
pub fn entropy_uncertainty(model: &NbcModel, features: &[usize]) -> Result<f64> {
    Ok(entropy_bits(&model.posterior(features)?))
}

/// Bootstrap ensemble of classifiers sharing one domain and smoothing value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    members: Vec<NbcModel>,
    source_seed: u64,
}

/// Seed of the bootstrap resample for ensemble member `index`.
pub fn member_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Fits `m` classifiers, each on a with-replacement resample of `dataset` of
/// the same size. Member `i` draws its resample from `member_seed(seed, i)`.
pub fn fit_ensemble(dataset: &Dataset, alpha: f64, m: usize, seed: u64) -> Result<Ensemble> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ensemble alpha {alpha} must be > 0"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "ensemble needs at least 2 members, got {m}"
        )));
    }
    let n = dataset.len();
    let members = (0..m)
        .map(|i| {
            let mut rng = SeededRng::new(member_seed(seed, i));
            let picks: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
            nbc::fit(&dataset.select(&picks), alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        members,
        source_seed: seed,
    })
}

/// The ensemble-based quantities at one feature vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleUncertainty {
    pub aleatoric: f64,
    pub total: f64,
    pub epistemic: Epistemic,
}

/// Epistemic uncertainty under both sign conventions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epistemic {
    /// `aleatoric - total`; never positive up to rounding.
    pub literal: f64,
    /// `total - aleatoric`; the mutual-information form, never negative.
    pub standard: f64,
}

impl Ensemble {
    pub fn from_members(members: Vec<NbcModel>, source_seed: u64) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "ensemble needs at least 2 members, got {}",
                members.len()
            )));
        }
        let first = &members[0];
        if members
            .iter()
            .any(|m| m.domain() != first.domain() || m.alpha() != first.alpha())
        {
            return Err(Error::ShapeMismatch(
                "ensemble members must share domain and alpha".into(),
            ));
        }
        Ok(Self {
            members,
            source_seed,
        })
    }

    pub fn members(&self) -> &[NbcModel] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }

    fn posteriors(&self, features: &[usize]) -> Result<Vec<MassFunction>> {
        self.members.iter().map(|m| m.posterior(features)).collect()
    }

    /// Aleatoric, total and epistemic uncertainty from one pass over the members.
    pub fn uncertainty(&self, features: &[usize]) -> Result<EnsembleUncertainty> {
        let posts = self.posteriors(features)?;
        let m = posts.len() as f64;
        let aleatoric = posts.iter().map(entropy_bits).sum::<f64>() / m;
        let k = posts[0].len();
        let mut avg = vec![0.0; k];
        for p in &posts {
            for (a, &v) in avg.iter_mut().zip(p.probs()) {
                *a += v;
            }
        }
        for a in &mut avg {
            *a /= m;
        }
        let total = entropy_of(&avg);
        Ok(EnsembleUncertainty {
            aleatoric,
            total,
            epistemic: Epistemic {
                literal: aleatoric - total,
                standard: total - aleatoric,
            },
        })
    }

    pub fn aleatoric(&self, features: &[usize]) -> Result<f64> {
        Ok(self.uncertainty(features)?.aleatoric)
    }

    pub fn total(&self, features: &[usize]) -> Result<f64> {
        Ok(self.uncertainty(features)?.total)
    }

    pub fn epistemic(&self, features: &[usize]) -> Result<Epistemic> {
        Ok(self.uncertainty(features)?.epistemic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::categorical::{DomainSpec, JointMassFunction, LabeledInstance};
    use proptest::prelude::*;

    /// One-feature, two-class model whose posterior at feature value 0 is `post`.
    fn model_with_posterior(post: [f64; 2]) -> NbcModel {
        let d = DomainSpec::new(2, vec![2]).unwrap();
        let marginal = MassFunction::new(vec![0.5, 0.5]).unwrap();
        let conds = vec![
            vec![MassFunction::new(vec![post[0] / 2.0, 1.0 - post[0] / 2.0]).unwrap()],
            vec![MassFunction::new(vec![post[1] / 2.0, 1.0 - post[1] / 2.0]).unwrap()],
        ];
        NbcModel::from_parts(d, 1.0, marginal, conds).unwrap()
    }

    fn three_class_model(post: [f64; 3]) -> NbcModel {
        let d = DomainSpec::new(3, vec![2]).unwrap();
        let marginal = MassFunction::uniform(3).unwrap();
        let conds = post
            .iter()
            .map(|&p| vec![MassFunction::new(vec![p / 2.0, 1.0 - p / 2.0]).unwrap()])
            .collect();
        NbcModel::from_parts(d, 1.0, marginal, conds).unwrap()
    }

    #[test]
    fn max_prob_examples() {
        assert_eq!(max_prob_uncertainty(&three_class_model([1.0, 0.0, 0.0]), &[0]).unwrap(), 0.0);
        let u = max_prob_uncertainty(&three_class_model([1.0, 1.0, 1.0]), &[0]).unwrap();
        assert!((u - 2.0 / 3.0).abs() < 1e-15);
        let u = max_prob_uncertainty(&three_class_model([0.7, 0.2, 0.1]), &[0]).unwrap();
        assert!((u - 0.3).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let h = entropy_uncertainty(&three_class_model([1.0, 1.0, 1.0]), &[0]).unwrap();
        assert!((h - 3f64.log2()).abs() < 1e-12);
        assert!((h - 1.58496).abs() < 1e-5);
        assert_eq!(entropy_uncertainty(&three_class_model([1.0, 0.0, 0.0]), &[0]).unwrap(), 0.0);
        let h = entropy_uncertainty(&three_class_model([0.5, 0.5, 0.0]), &[0]).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_marginal_propagates() {
        let d = DomainSpec::new(2, vec![2]).unwrap();
        let point = MassFunction::new(vec![0.0, 1.0]).unwrap();
        let m = NbcModel::from_parts(
            d,
            0.0,
            MassFunction::uniform(2).unwrap(),
            vec![vec![point.clone()], vec![point]],
        )
        .unwrap();
        assert!(matches!(max_prob_uncertainty(&m, &[0]), Err(Error::ZeroMarginal(_))));
        assert!(entropy_uncertainty(&m, &[0]).is_err());
    }

    fn ensemble(posts: &[[f64; 2]]) -> Ensemble {
        Ensemble::from_members(posts.iter().map(|&p| model_with_posterior(p)).collect(), 0).unwrap()
    }

    #[test]
    fn ensemble_examples() {
        let same = ensemble(&[[0.3, 0.7], [0.3, 0.7], [0.3, 0.7]]);
        let single = entropy_uncertainty(&model_with_posterior([0.3, 0.7]), &[0]).unwrap();
        let u = same.uncertainty(&[0]).unwrap();
        assert!((u.aleatoric - single).abs() < 1e-15);
        assert!((u.total - single).abs() < 1e-15);
        assert!(u.epistemic.literal.abs() < 1e-15 && u.epistemic.standard.abs() < 1e-15);

        let split = ensemble(&[[1.0, 0.0], [0.0, 1.0]]);
        let u = split.uncertainty(&[0]).unwrap();
        assert_eq!(u.aleatoric, 0.0);
        assert_eq!(u.total, 1.0);
        assert_eq!(u.epistemic.literal, -1.0);
        assert_eq!(u.epistemic.standard, 1.0);

        let mixed = ensemble(&[[0.5, 0.5], [1.0, 0.0]]);
        assert_eq!(mixed.aleatoric(&[0]).unwrap(), 0.5);
    }

    #[test]
    fn ensemble_construction_checks() {
        let d = DomainSpec::new(2, vec![2]).unwrap();
        let data = JointMassFunction::uniform(d).sample(10, 1);
        assert!(fit_ensemble(&data, 0.0, 10, 1).is_err());
        assert!(fit_ensemble(&data, 1.0, 1, 1).is_err());
        assert!(fit_ensemble(&data.select(&[]), 1.0, 10, 1).is_err());
        let e = fit_ensemble(&data, 1.0, 10, 1).unwrap();
        assert_eq!(e.len(), 10);
        assert_eq!(e, fit_ensemble(&data, 1.0, 10, 1).unwrap());
        assert_ne!(e, fit_ensemble(&data, 1.0, 10, 2).unwrap());
    }

    #[test]
    fn constant_dataset_gives_identical_members() {
        let d = DomainSpec::new(3, vec![2, 3]).unwrap();
        let inst = LabeledInstance { class: 2, features: vec![1, 0] };
        let data = Dataset::new(d, vec![inst; 12]).unwrap();
        let e = fit_ensemble(&data, 0.5, 5, 99).unwrap();
        assert!(e.members().iter().all(|m| m == &e.members()[0]));
    }

    fn random_ensemble() -> impl Strategy<Value = (Ensemble, Vec<usize>)> {
        (2usize..=4, prop::collection::vec(2usize..=4, 1..=3), 5usize..40, any::<u64>(), 0.01f64..3.0, any::<u64>())
            .prop_map(|(k, cards, n, seed, alpha, fseed)| {
                let d = DomainSpec::new(k, cards).unwrap();
                let weights: Vec<f64> = {
                    let mut r = SeededRng::new(seed ^ 0xabc);
                    (0..d.joint_size()).map(|_| r.uniform()).collect()
                };
                let truth = JointMassFunction::from_weights(d.clone(), &weights).unwrap();
                let data = truth.sample(n, seed);
                let e = fit_ensemble(&data, alpha, 10, seed).unwrap();
                let f = d.feature_vector((fseed % d.feature_space_size() as u64) as usize);
                (e, f)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn jensen_and_bounds((e, f) in random_ensemble()) {
            let u = e.uncertainty(&f).unwrap();
            let k = e.members()[0].domain().num_classes() as f64;
            prop_assert!(u.aleatoric <= u.total + 1e-12);
            prop_assert!(u.epistemic.literal <= 1e-12);
            prop_assert!(u.epistemic.standard >= -1e-12);
            for v in [u.aleatoric, u.total] {
                prop_assert!((0.0..=k.log2()).contains(&v));
            }
            for m in e.members() {
                let um = max_prob_uncertainty(m, &f).unwrap();
                prop_assert!((0.0..=1.0 - 1.0 / k).contains(&um));
                let uh = entropy_uncertainty(m, &f).unwrap();
                prop_assert!((0.0..=k.log2()).contains(&uh));
            }
        }
    }
}
