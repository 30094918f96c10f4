//! ε-contamination robustness of individual predictions.
//!
//! A prediction `ĉ` at features `f` is robust with respect to a set of joint
//! mass functions when every member of the set has `ĉ` as its unique argmax
//! at `f`. The robustness metric is the smallest contamination level `ε` at
//! which that stops being true.
//!
//! * Global: contaminate the whole joint, `(1-ε)p + εp*`. The threshold has
//!   the closed form `d / (1 + d)` with `d = p(ĉ,f) - max_{c≠ĉ} p(c,f)`.
//! * Local: contaminate every local mass function of a Naive Bayes model
//!   separately. The threshold is the root of
//!   `φ(ε) = max_{c≠ĉ} (p(c) + t) Π_i (p(f_i|c) + t) = p(ĉ,f)` with
//!   `t = ε/(1-ε)`; `φ` is strictly increasing and the root lies in `[0, 1/2]`.
//!
//! Both perturbations are polytopes whose extreme points are contamination
//! by point masses, so [`is_robust_finite`] over
//! [`contamination_vertices_global`] / [`contamination_vertices_local`] gives
//! an exact brute-force check of the thresholds.

use serde::{Deserialize, Serialize};

use crate::categorical::{JointMassFunction, MassFunction};
use crate::error::{Error, Result};
use crate::nbc::{argmax_set, NbcModel};

pub const DEFAULT_BISECTION_TOL: f64 = 1e-9;
pub const MAX_BISECTION_ITERATIONS: usize = 200;
pub const MAX_GLOBAL_VERTICES: usize = 100_000;
pub const MAX_LOCAL_VERTICES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobustnessKind {
    Global,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustnessValue {
    pub epsilon: f64,
    pub kind: RobustnessKind,
    /// Always true for the closed form; bisection status for the local metric.
    pub converged: bool,
}

/// Anything that can report `p(c, f)` for every class at a feature vector.
pub trait ClassJoints {
    fn class_joints(&self, features: &[usize]) -> Vec<f64>;
}

impl ClassJoints for NbcModel {
    fn class_joints(&self, features: &[usize]) -> Vec<f64> {
        NbcModel::class_joints(self, features)
    }
}

impl ClassJoints for JointMassFunction {
    fn class_joints(&self, features: &[usize]) -> Vec<f64> {
        self.class_slice(features)
    }
}

/// Top joint value and the best rival, or `None` when the prediction is tied
/// or every joint is zero.
fn top_and_runner_up(joints: &[f64]) -> Option<(usize, f64, f64)> {
    let pred = argmax_set(joints);
    let top = joints[pred.class];
    if !pred.is_unique() || top <= 0.0 {
        return None;
    }
    let runner = joints
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != pred.class)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    Some((pred.class, top, runner))
}

/// Closed-form global threshold from the class joints at one feature vector.
pub fn global_epsilon(joints: &[f64]) -> f64 {
    match top_and_runner_up(joints) {
        Some((_, top, runner)) => {
            let gap = top - runner;
            gap / (1.0 + gap)
        }
        None => 0.0,
    }
}

pub fn global_robustness<S: ClassJoints + ?Sized>(source: &S, features: &[usize]) -> RobustnessValue {
    RobustnessValue {
        epsilon: global_epsilon(&source.class_joints(features)),
        kind: RobustnessKind::Global,
        converged: true,
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "contamination level {epsilon} outside [0, 1)"
        )));
    }
    Ok(())
}

/// `(p(c) + t) Π_i (p(f_i|c) + t)` with `t = ε/(1-ε)`.
pub fn local_phi(model: &NbcModel, features: &[usize], class: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(phi_term(model, features, class, epsilon / (1.0 - epsilon)))
}

fn phi_term(model: &NbcModel, features: &[usize], class: usize, t: f64) -> f64 {
    features
        .iter()
        .enumerate()
        .fold(model.class_marginal().get(class) + t, |acc, (i, &v)| {
            acc * (model.conditional(class, i).get(v) + t)
        })
}

/// `φ(ε)`: the largest rival term, excluding `predicted`.
pub fn local_phi_max(model: &NbcModel, features: &[usize], predicted: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let t = epsilon / (1.0 - epsilon);
    Ok((0..model.domain().num_classes())
        .filter(|&c| c != predicted)
        .map(|c| phi_term(model, features, c, t))
        .fold(0.0, f64::max))
}

/// Final bracket of a bisection: `g(lo) < target <= g(hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisection for the crossing of a non-decreasing function with `target`.
/// Requires `g(lo) < target <= g(hi)` on entry and keeps it as an invariant.
pub fn bisect_increasing<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<Bracket> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be > 0")));
    }
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo < target && target <= ghi) {
        return Err(Error::InvalidParameter(format!(
            "no sign change on [{lo}, {hi}]: g = {glo}, {ghi}, target {target}"
        )));
    }
    let mut iterations = 0;
    while hi - lo >= tol {
        if iterations == max_iterations {
            return Err(Error::NoConvergence { iterations, lo, hi });
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.is_nan() {
            return Err(Error::NoConvergence { iterations, lo, hi });
        }
        if gm < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Bracket { lo, hi, iterations })
}

/// Local threshold with its bisection bracket (`None` for a tied or all-zero
/// prediction, where the threshold is 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalRobustness {
    pub value: RobustnessValue,
    pub bracket: Option<Bracket>,
    pub predicted: usize,
    /// `p(ĉ, f)`
    pub target: f64,
}

pub fn local_robustness_detailed(model: &NbcModel, features: &[usize], tol: f64) -> Result<LocalRobustness> {
    model.domain().check_features(features)?;
    let joints = model.class_joints(features);
    let Some((predicted, top, _)) = top_and_runner_up(&joints) else {
        return Ok(LocalRobustness {
            value: RobustnessValue {
                epsilon: 0.0,
                kind: RobustnessKind::Local,
                converged: true,
            },
            bracket: None,
            predicted: argmax_set(&joints).class,
            target: joints.iter().copied().fold(0.0, f64::max),
        });
    };
    let phi = |eps: f64| {
        let t = eps / (1.0 - eps);
        (0..joints.len())
            .filter(|&c| c != predicted)
            .map(|c| phi_term(model, features, c, t))
            .fold(0.0, f64::max)
    };
    let bracket = bisect_increasing(phi, top, 0.0, 0.5, tol, MAX_BISECTION_ITERATIONS)?;
    Ok(LocalRobustness {
        value: RobustnessValue {
            epsilon: bracket.midpoint(),
            kind: RobustnessKind::Local,
            converged: true,
        },
        bracket: Some(bracket),
        predicted,
        target: top,
    })
}

pub fn local_robustness(model: &NbcModel, features: &[usize], tol: f64) -> Result<RobustnessValue> {
    Ok(local_robustness_detailed(model, features, tol)?.value)
}

/// Two-stage robustness check over a finite set of joints: the predicted
/// class must keep positive mass everywhere, and then every rival-to-predicted
/// ratio must stay strictly below one.
pub fn is_robust_finite(candidates: &[JointMassFunction], features: &[usize], predicted: usize) -> Result<bool> {
    let first = candidates.first().ok_or(Error::EmptyCandidates)?;
    let domain = first.domain();
    domain.check_features(features)?;
    domain.check_class(predicted)?;
    if candidates.iter().any(|p| p.domain() != domain) {
        return Err(Error::ShapeMismatch("candidates span different domains".into()));
    }
    let slices: Vec<Vec<f64>> = candidates.iter().map(|p| p.class_slice(features)).collect();
    let min_hat = slices.iter().map(|s| s[predicted]).fold(f64::INFINITY, f64::min);
    if !(min_hat > 0.0) {
        return Ok(false);
    }
    for s in &slices {
        let hat = s[predicted];
        for (c, &v) in s.iter().enumerate() {
            if c != predicted && !(v / hat < 1.0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVertexSet {
    pub epsilon: f64,
    pub kind: RobustnessKind,
    pub vertices: Vec<JointMassFunction>,
}

/// Extreme points `(1-ε)p + ε δ_(c,f)` of the global contamination set, in
/// cell order.
pub fn contamination_vertices_global(p: &JointMassFunction, epsilon: f64) -> Result<PerturbationVertexSet> {
    check_epsilon(epsilon)?;
    let n = p.probs().len();
    if n > MAX_GLOBAL_VERTICES {
        return Err(Error::TooManyVertices {
            count: n as u128,
            cap: MAX_GLOBAL_VERTICES,
        });
    }
    let vertices = (0..n)
        .map(|cell| {
            let mut probs: Vec<f64> = p.probs().iter().map(|&v| (1.0 - epsilon) * v).collect();
            probs[cell] += epsilon;
            JointMassFunction::from_probs_unchecked(p.domain().clone(), probs)
        })
        .collect();
    Ok(PerturbationVertexSet {
        epsilon,
        kind: RobustnessKind::Global,
        vertices,
    })
}

fn local_vertices_of(m: &MassFunction, epsilon: f64) -> Vec<Vec<f64>> {
    (0..m.len())
        .map(|x| {
            let mut v: Vec<f64> = m.probs().iter().map(|&p| (1.0 - epsilon) * p).collect();
            v[x] += epsilon;
            v
        })
        .collect()
}

/// Number of joints [`contamination_vertices_local`] would produce.
pub fn local_vertex_count(model: &NbcModel) -> u128 {
    let d = model.domain();
    let per_class: u128 = d.feature_cards().iter().map(|&k| k as u128).product();
    (0..d.num_classes()).fold(d.num_classes() as u128, |acc, _| acc.saturating_mul(per_class))
}

/// Every Naive Bayes joint whose class marginal and per-class conditionals
/// each sit at one of their own contamination extreme points.
pub fn contamination_vertices_local(model: &NbcModel, epsilon: f64) -> Result<PerturbationVertexSet> {
    check_epsilon(epsilon)?;
    let count = local_vertex_count(model);
    if count > MAX_LOCAL_VERTICES as u128 {
        return Err(Error::TooManyVertices {
            count,
            cap: MAX_LOCAL_VERTICES,
        });
    }
    let d = model.domain();
    let k = d.num_classes();
    let nf = d.num_features();
    let marg = local_vertices_of(model.class_marginal(), epsilon);
    let conds: Vec<Vec<Vec<Vec<f64>>>> = (0..k)
        .map(|c| {
            (0..nf)
                .map(|i| local_vertices_of(model.conditional(c, i), epsilon))
                .collect()
        })
        .collect();
    // Odometer digits: class-marginal vertex first, then (class, feature) pairs.
    let mut radices = vec![k];
    for _ in 0..k {
        radices.extend_from_slice(d.feature_cards());
    }
    let mut digits = vec![0usize; radices.len()];
    let feature_vectors: Vec<Vec<usize>> = d.feature_vectors().collect();
    let mut vertices = Vec::with_capacity(count as usize);
    loop {
        let pc = &marg[digits[0]];
        let mut probs = Vec::with_capacity(d.joint_size());
        for c in 0..k {
            for f in &feature_vectors {
                let v = f.iter().enumerate().fold(pc[c], |acc, (i, &x)| {
                    acc * conds[c][i][digits[1 + c * nf + i]][x]
                });
                probs.push(v);
            }
        }
        vertices.push(JointMassFunction::from_probs_unchecked(d.clone(), probs));

        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Ok(PerturbationVertexSet {
                    epsilon,
                    kind: RobustnessKind::Local,
                    vertices,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Union of argmax classes over the perturbation at level `ε`.
///
/// A class belongs to the set iff its best case under the perturbation is at
/// least every rival's worst case, which is attainable simultaneously because
/// the extreme choices for different classes do not interact.
pub fn credal_prediction(
    model: &NbcModel,
    features: &[usize],
    epsilon: f64,
    kind: RobustnessKind,
) -> Result<Vec<usize>> {
    check_epsilon(epsilon)?;
    model.domain().check_features(features)?;
    let k = model.domain().num_classes();
    let keep = 1.0 - epsilon;
    let (best, worst): (Vec<f64>, Vec<f64>) = match kind {
        RobustnessKind::Global => model
            .class_joints(features)
            .into_iter()
            .map(|j| (keep * j + epsilon, keep * j))
            .unzip(),
        RobustnessKind::Local => (0..k)
            .map(|c| {
                let pc = model.class_marginal().get(c);
                features.iter().enumerate().fold(
                    (keep * pc + epsilon, keep * pc),
                    |(b, w), (i, &v)| {
                        let p = model.conditional(c, i).get(v);
                        (b * (keep * p + epsilon), w * (keep * p))
                    },
                )
            })
            .unzip(),
    };
    Ok((0..k)
        .filter(|&c| (0..k).all(|r| r == c || best[c] >= worst[r]))
        .collect())
}
