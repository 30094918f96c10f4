//! Random model generators and slice-level contamination oracles shared by
//! the integration tests.
#![allow(dead_code)]

use nbrobust::rng::SeededRng;
use nbrobust::{Dataset, DomainSpec, MassFunction, NbcModel};

pub struct ModelShape {
    pub max_classes: usize,
    pub max_features: usize,
    pub max_card: usize,
}

fn random_mass(rng: &mut SeededRng, len: usize) -> MassFunction {
    let w: Vec<f64> = (0..len).map(|_| rng.uniform() + 1e-3).collect();
    MassFunction::normalize(&w).unwrap()
}

/// Random positive NBC. Roughly one model in eight copies class 0's
/// parameters into class 1 so that exact ties occur.
pub fn random_model(seed: u64, shape: &ModelShape) -> NbcModel {
    let mut rng = SeededRng::new(seed);
    let k = 2 + rng.below(shape.max_classes - 1);
    let n = 1 + rng.below(shape.max_features);
    let cards: Vec<usize> = (0..n).map(|_| 2 + rng.below(shape.max_card - 1)).collect();
    let domain = DomainSpec::new(k, cards.clone()).unwrap();
    let mut marg = random_mass(&mut rng, k);
    let mut conds: Vec<Vec<MassFunction>> = (0..k)
        .map(|_| cards.iter().map(|&c| random_mass(&mut rng, c)).collect())
        .collect();
    if rng.below(8) == 0 {
        let mut p = marg.probs().to_vec();
        p[1] = p[0];
        marg = MassFunction::normalize(&p).unwrap();
        conds[1] = conds[0].clone();
    }
    NbcModel::from_parts(domain, 0.0, marg, conds).unwrap()
}

/// Model fitted by smoothing a small random sample, as the pipeline does.
pub fn fitted_model(seed: u64, shape: &ModelShape) -> (NbcModel, Dataset) {
    let truth = random_model(seed, shape).to_joint();
    let mut rng = SeededRng::new(seed ^ 0xa5a5);
    let n = 5 + rng.below(60);
    let alpha = [0.01, 0.1, 1.0, 5.0][rng.below(4)];
    let data = truth.sample(n, seed.wrapping_add(17));
    (nbrobust::fit(&data, alpha).unwrap(), data)
}

/// `p'(c, f)` for every vertex of the local contamination set at level `eps`,
/// restricted to the slice `f`.
///
/// A vertex moves the class marginal to `(1-ε)p + ε δ_x0` and each local
/// conditional `p(·|c)` to `(1-ε)p(·|c) + ε δ_x`. On the slice only whether
/// `x` equals `f_i` matters, so vertices that agree there are emitted once.
pub fn local_vertex_slices(model: &NbcModel, f: &[usize], eps: f64) -> Vec<Vec<f64>> {
    let k = model.domain().num_classes();
    let n = f.len();
    let keep = 1.0 - eps;
    let cards = model.domain().feature_cards();
    let mut out = Vec::new();
    for x0 in 0..k {
        for mask in 0u64..(1u64 << (k * n)) {
            // Bit set: the vertex for (c, i) sits on a value other than f_i.
            let valid = (0..k * n).all(|b| mask >> b & 1 == 0 || cards[b % n] > 1);
            if !valid {
                continue;
            }
            let slice = (0..k)
                .map(|c| {
                    let pc = keep * model.class_marginal().get(c) + if c == x0 { eps } else { 0.0 };
                    (0..n).fold(pc, |acc, i| {
                        let p = keep * model.conditional(c, i).get(f[i]);
                        let hit = mask >> (c * n + i) & 1 == 0;
                        acc * if hit { p + eps } else { p }
                    })
                })
                .collect();
            out.push(slice);
        }
    }
    out
}

/// `p'(c, f)` for every vertex of the global contamination set on slice `f`:
/// all cells off the slice collapse to a single vertex.
pub fn global_vertex_slices(model: &NbcModel, f: &[usize], eps: f64) -> Vec<Vec<f64>> {
    let base: Vec<f64> = model.class_joints(f).iter().map(|j| (1.0 - eps) * j).collect();
    let mut out = vec![base.clone()];
    for c in 0..base.len() {
        let mut s = base.clone();
        s[c] += eps;
        out.push(s);
    }
    out
}

/// Robustness of `predicted` over a finite family of slices: positive mass
/// for the prediction everywhere and every rival strictly below it.
pub fn robust_over(slices: &[Vec<f64>], predicted: usize) -> bool {
    slices.iter().all(|s| {
        s[predicted] > 0.0 && s.iter().enumerate().all(|(c, &v)| c == predicted || v / s[predicted] < 1.0)
    })
}
