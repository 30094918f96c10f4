//! Single experiments, accuracy-acceptance curves and the replicated grid.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::categorical::{Dataset, JointMassFunction};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::nbc::{self, NbcModel};
use crate::rng::derive_seed;
use crate::robustness::{global_robustness, local_robustness};
use crate::synth::{make_test, make_train, sample_dataset};
use crate::uncertainty::{entropy_uncertainty, fit_ensemble, max_prob_uncertainty, Ensemble};

// Tags mixed into derived seeds so each random stream is distinct.
const TAG_RAND: u64 = 1;
const TAG_TEST: u64 = 2;
const TAG_SHIFT: u64 = 3;
const TAG_TRAIN: u64 = 4;
const TAG_CV: u64 = 5;
const TAG_ENSEMBLE: u64 = 6;

/// Seed of the random component of the test distribution.
pub fn rand_seed(master: u64) -> u64 {
    derive_seed(master, &[TAG_RAND])
}

pub fn test_sample_seed(master: u64) -> u64 {
    derive_seed(master, &[TAG_TEST])
}

/// Seeds of one grid replicate, identified by cell values and indices.
pub fn replicate_seeds(master: u64, n_train: usize, gamma: f64, shift: usize, train: usize) -> RunSeeds {
    let cell = [n_train as u64, gamma.to_bits()];
    let unit = |tag: u64| derive_seed(master, &[tag, cell[0], cell[1], shift as u64, train as u64]);
    RunSeeds {
        shift: Some(derive_seed(master, &[TAG_SHIFT, cell[0], cell[1], shift as u64])),
        train: Some(unit(TAG_TRAIN)),
        cv: unit(TAG_CV),
        ensemble: unit(TAG_ENSEMBLE),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub shift: Option<u64>,
    pub train: Option<u64>,
    pub cv: u64,
    pub ensemble: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleRunSettings {
    pub alpha_grid: Vec<f64>,
    pub folds: usize,
    pub m_ensemble: usize,
    pub bisection_tol: f64,
}

impl From<&ExperimentConfig> for SingleRunSettings {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            alpha_grid: c.alpha_grid.clone(),
            folds: c.folds,
            m_ensemble: c.m_ensemble,
            bisection_tol: c.bisection_tol,
        }
    }
}

/// Scores for one test instance. Uncertainty values are absent when the
/// posterior is undefined (zero feature marginal) or no ensemble is available.
#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityRow {
    pub instance_index: usize,
    pub true_class: Option<usize>,
    pub predicted_class: usize,
    pub correct: Option<bool>,
    pub u_m: Option<f64>,
    pub u_h: Option<f64>,
    pub u_a: Option<f64>,
    pub u_t: Option<f64>,
    pub u_e_literal: Option<f64>,
    pub u_e_standard: Option<f64>,
    pub eps_glob: f64,
    pub eps_loc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub alpha_selected: f64,
    pub cv_accuracy: Vec<f64>,
    pub n_train: usize,
    pub gamma: Option<f64>,
    pub shift_tv: Option<f64>,
    pub seeds: RunSeeds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityReport {
    pub rows: Vec<ReliabilityRow>,
    pub meta: ReportMeta,
}

impl ReliabilityReport {
    pub fn n_correct(&self) -> usize {
        self.rows.iter().filter(|r| r.correct == Some(true)).count()
    }

    pub fn accuracy(&self) -> f64 {
        self.n_correct() as f64 / self.rows.len() as f64
    }
}

/// Feature vector with an optional known class.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredInstance {
    pub class: Option<usize>,
    pub features: Vec<usize>,
}

#[derive(Clone, Copy)]
struct FeatureScores {
    predicted: usize,
    u_m: Option<f64>,
    u_h: Option<f64>,
    u_a: Option<f64>,
    u_t: Option<f64>,
    u_e: Option<(f64, f64)>,
    eps_glob: f64,
    eps_loc: f64,
}

fn score_features(model: &NbcModel, ensemble: Option<&Ensemble>, f: &[usize], tol: f64) -> Result<FeatureScores> {
    let ok_or_absent = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroMarginal(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let ens = match ensemble.map(|e| e.uncertainty(f)) {
        Some(Ok(u)) => Some(u),
        Some(Err(Error::ZeroMarginal(_))) | None => None,
        Some(Err(e)) => return Err(e),
    };
    Ok(FeatureScores {
        predicted: model.predict(f).class,
        u_m: ok_or_absent(max_prob_uncertainty(model, f))?,
        u_h: ok_or_absent(entropy_uncertainty(model, f))?,
        u_a: ens.map(|u| u.aleatoric),
        u_t: ens.map(|u| u.total),
        u_e: ens.map(|u| (u.epistemic.literal, u.epistemic.standard)),
        eps_glob: global_robustness(model, f).epsilon,
        eps_loc: local_robustness(model, f, tol)?.epsilon,
    })
}

/// Prediction and all metrics for each instance. Metrics depend only on the
/// feature vector, so they are computed once per distinct vector.
pub fn score_instances(
    model: &NbcModel,
    ensemble: Option<&Ensemble>,
    instances: &[ScoredInstance],
    tol: f64,
) -> Result<Vec<ReliabilityRow>> {
    let domain = model.domain();
    let mut cache: HashMap<usize, FeatureScores> = HashMap::new();
    let mut rows = Vec::with_capacity(instances.len());
    for (idx, inst) in instances.iter().enumerate() {
        domain.check_features(&inst.features)?;
        if let Some(c) = inst.class {
            domain.check_class(c)?;
        }
        let key = domain.feature_index(&inst.features);
        let s = match cache.get(&key) {
            Some(s) => *s,
            None => {
                let s = score_features(model, ensemble, &inst.features, tol)?;
                cache.insert(key, s);
                s
            }
        };
        rows.push(ReliabilityRow {
            instance_index: idx,
            true_class: inst.class,
            predicted_class: s.predicted,
            correct: inst.class.map(|c| c == s.predicted),
            u_m: s.u_m,
            u_h: s.u_h,
            u_a: s.u_a,
            u_t: s.u_t,
            u_e_literal: s.u_e.map(|e| e.0),
            u_e_standard: s.u_e.map(|e| e.1),
            eps_glob: s.eps_glob,
            eps_loc: s.eps_loc,
        });
    }
    Ok(rows)
}

/// Cross-validated smoothing, final fit, bootstrap ensemble with the same
/// smoothing value, then every metric for every test instance.
pub fn run_single(
    train: &Dataset,
    test: &Dataset,
    settings: &SingleRunSettings,
    cv_seed: u64,
    ensemble_seed: u64,
) -> Result<ReliabilityReport> {
    if train.domain() != test.domain() {
        return Err(Error::ShapeMismatch("train and test domains differ".into()));
    }
    let selection = nbc::select_alpha(train, &settings.alpha_grid, settings.folds, cv_seed)?;
    let model = nbc::fit(train, selection.alpha)?;
    let ensemble = fit_ensemble(train, selection.alpha, settings.m_ensemble, ensemble_seed)?;
    let instances: Vec<ScoredInstance> = test
        .instances()
        .iter()
        .map(|i| ScoredInstance {
            class: Some(i.class),
            features: i.features.clone(),
        })
        .collect();
    let rows = score_instances(&model, Some(&ensemble), &instances, settings.bisection_tol)?;
    Ok(ReliabilityReport {
        rows,
        meta: ReportMeta {
            alpha_selected: selection.alpha,
            cv_accuracy: selection.cv_accuracy,
            n_train: train.len(),
            gamma: None,
            shift_tv: None,
            seeds: RunSeeds {
                shift: None,
                train: None,
                cv: cv_seed,
                ensemble: ensemble_seed,
            },
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    MaxProb,
    Entropy,
    Aleatoric,
    Total,
    Epistemic,
    GlobalRobustness,
    LocalRobustness,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::MaxProb,
        Metric::Entropy,
        Metric::Aleatoric,
        Metric::Total,
        Metric::Epistemic,
        Metric::GlobalRobustness,
        Metric::LocalRobustness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::MaxProb => "u_m",
            Metric::Entropy => "u_H",
            Metric::Aleatoric => "u_a",
            Metric::Total => "u_t",
            Metric::Epistemic => "u_e",
            Metric::GlobalRobustness => "eps_glob",
            Metric::LocalRobustness => "eps_loc",
        }
    }

    pub fn is_robustness(self) -> bool {
        matches!(self, Metric::GlobalRobustness | Metric::LocalRobustness)
    }

    /// Value used for ordering; epistemic uses the non-negative convention.
    pub fn value(self, row: &ReliabilityRow) -> Option<f64> {
        match self {
            Metric::MaxProb => row.u_m,
            Metric::Entropy => row.u_h,
            Metric::Aleatoric => row.u_a,
            Metric::Total => row.u_t,
            Metric::Epistemic => row.u_e_standard,
            Metric::GlobalRobustness => Some(row.eps_glob),
            Metric::LocalRobustness => Some(row.eps_loc),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub acceptance_rate: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyAcceptanceCurve {
    pub metric: Metric,
    pub points: Vec<CurvePoint>,
    /// Number of correct predictions among the first `k + 1` instances.
    pub prefix_correct: Vec<usize>,
}

impl AccuracyAcceptanceCurve {
    pub fn from_correctness(metric: Metric, ordered_correct: &[bool]) -> Self {
        let n = ordered_correct.len();
        let mut prefix_correct = Vec::with_capacity(n);
        let mut hits = 0;
        for &c in ordered_correct {
            hits += usize::from(c);
            prefix_correct.push(hits);
        }
        let points = prefix_correct
            .iter()
            .enumerate()
            .map(|(k, &h)| CurvePoint {
                acceptance_rate: (k + 1) as f64 / n as f64,
                accuracy: h as f64 / (k + 1) as f64,
            })
            .collect();
        Self {
            metric,
            points,
            prefix_correct,
        }
    }

    /// Accuracy on the `n_accepted` most reliable instances.
    pub fn accuracy_at(&self, n_accepted: usize) -> f64 {
        self.points[n_accepted - 1].accuracy
    }

    pub fn final_correct(&self) -> usize {
        self.prefix_correct.last().copied().unwrap_or(0)
    }
}

/// Orders instances from most to least reliable according to `metric`:
/// increasing uncertainty, or decreasing robustness, with ties kept in
/// instance order.
pub fn reliability_order(rows: &[ReliabilityRow], metric: Metric) -> Result<Vec<usize>> {
    let keys = rows
        .iter()
        .map(|r| {
            metric.value(r).ok_or_else(|| Error::MissingMetric {
                metric: metric.name().into(),
                instance: r.instance_index,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    if metric.is_robustness() {
        order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(rows[a].instance_index.cmp(&rows[b].instance_index)));
    } else {
        order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(rows[a].instance_index.cmp(&rows[b].instance_index)));
    }
    Ok(order)
}

pub fn accuracy_acceptance(report: &ReliabilityReport, metric: Metric) -> Result<AccuracyAcceptanceCurve> {
    accuracy_acceptance_rows(&report.rows, metric)
}

pub fn accuracy_acceptance_rows(rows: &[ReliabilityRow], metric: Metric) -> Result<AccuracyAcceptanceCurve> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let order = reliability_order(rows, metric)?;
    let correct = order
        .iter()
        .map(|&i| {
            rows[i].correct.ok_or_else(|| Error::MissingMetric {
                metric: "true_class".into(),
                instance: rows[i].instance_index,
            })
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(AccuracyAcceptanceCurve::from_correctness(metric, &correct))
}

pub fn all_curves(report: &ReliabilityReport) -> Result<Vec<AccuracyAcceptanceCurve>> {
    Metric::ALL.iter().map(|&m| accuracy_acceptance(report, m)).collect()
}

/// Pointwise mean and population standard deviation of one metric's curves.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricCurveStats {
    pub metric: Metric,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub n_train: usize,
    pub gamma: f64,
    /// One entry per metric, in [`Metric::ALL`] order.
    pub curves: Vec<MetricCurveStats>,
}

impl CellStats {
    pub fn metric(&self, metric: Metric) -> Option<&MetricCurveStats> {
        self.curves.iter().find(|c| c.metric == metric)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridStats {
    pub n_test: usize,
    pub cells: Vec<CellStats>,
}

impl GridStats {
    pub fn cell(&self, n_train: usize, gamma: f64) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.n_train == n_train && c.gamma == gamma)
    }
}

/// Per-replicate bookkeeping kept alongside the aggregated curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub n_train: usize,
    pub gamma: f64,
    pub shift_index: usize,
    pub train_index: usize,
    pub alpha_selected: f64,
    pub shift_tv: f64,
    pub n_correct: usize,
    /// Correct count at acceptance rate 1 for each metric's curve.
    pub final_correct: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridRun {
    pub stats: GridStats,
    pub replicates: Vec<ReplicateSummary>,
}

/// Fixed test distribution and test sample shared by every cell.
#[derive(Clone, Debug)]
pub struct TestBed {
    pub joint: JointMassFunction,
    pub data: Dataset,
}

pub fn build_testbed(config: &ExperimentConfig) -> Result<TestBed> {
    let joint = make_test(&config.generator(rand_seed(config.master_seed))?)?;
    let data = sample_dataset(&joint, config.n_test, test_sample_seed(config.master_seed));
    Ok(TestBed { joint, data })
}

/// Mean and population standard deviation over equal-length rows.
pub fn pointwise_mean_std(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let len = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; len];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; len];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    (mean, std)
}

/// All replicates of one `(n_train, gamma)` cell.
pub fn run_cell(
    config: &ExperimentConfig,
    testbed: &TestBed,
    n_train: usize,
    gamma: f64,
) -> Result<(CellStats, Vec<ReplicateSummary>)> {
    let settings = SingleRunSettings::from(config);
    let units: Vec<(usize, usize)> = (0..config.shifts_per_cell)
        .flat_map(|s| (0..config.trains_per_shift).map(move |t| (s, t)))
        .collect();
    let results = units
        .par_iter()
        .map(|&(s, t)| {
            let seeds = replicate_seeds(config.master_seed, n_train, gamma, s, t);
            let shifted = make_train(&testbed.joint, gamma, seeds.shift.unwrap_or_default())?;
            let train = sample_dataset(&shifted.joint, n_train, seeds.train.unwrap_or_default());
            let mut report = run_single(&train, &testbed.data, &settings, seeds.cv, seeds.ensemble)?;
            report.meta.gamma = Some(gamma);
            report.meta.shift_tv = Some(shifted.shift_tv);
            report.meta.seeds = seeds;
            let curves = all_curves(&report)?;
            let summary = ReplicateSummary {
                n_train,
                gamma,
                shift_index: s,
                train_index: t,
                alpha_selected: report.meta.alpha_selected,
                shift_tv: shifted.shift_tv,
                n_correct: report.n_correct(),
                final_correct: curves.iter().map(|c| c.final_correct()).collect(),
            };
            let accuracies: Vec<Vec<f64>> = curves
                .into_iter()
                .map(|c| c.points.into_iter().map(|p| p.accuracy).collect())
                .collect();
            Ok((summary, accuracies))
        })
        .collect::<Result<Vec<_>>>()?;

    let curves = Metric::ALL
        .iter()
        .enumerate()
        .map(|(k, &metric)| {
            let rows: Vec<Vec<f64>> = results.iter().map(|(_, acc)| acc[k].clone()).collect();
            let (mean, std) = pointwise_mean_std(&rows);
            MetricCurveStats { metric, mean, std }
        })
        .collect();
    let summaries = results.into_iter().map(|(s, _)| s).collect();
    Ok((
        CellStats {
            n_train,
            gamma,
            curves,
        },
        summaries,
    ))
}

/// Runs every configured cell. Randomness flows only from seeds derived from
/// the master seed and the replicate's identity, so results do not depend on
/// the thread count or on which other cells are run.
pub fn run_grid(config: &ExperimentConfig) -> Result<GridRun> {
    config.validate()?;
    let testbed = build_testbed(config)?;
    let mut cells = Vec::new();
    let mut replicates = Vec::new();
    for (n_train, gamma) in config.cells() {
        let (cell, reps) = run_cell(config, &testbed, n_train, gamma)?;
        cells.push(cell);
        replicates.extend(reps);
    }
    Ok(GridRun {
        stats: GridStats {
            n_test: config.n_test,
            cells,
        },
        replicates,
    })
}

/// [`run_grid`] on a dedicated pool of `workers` threads.
pub fn run_grid_with_workers(config: &ExperimentConfig, workers: usize) -> Result<GridRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_grid(config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::categorical::{DomainSpec, LabeledInstance, MassFunction};

    fn row(idx: usize, correct: bool, u: f64, eps: f64) -> ReliabilityRow {
        ReliabilityRow {
            instance_index: idx,
            true_class: Some(0),
            predicted_class: if correct { 0 } else { 1 },
            correct: Some(correct),
            u_m: Some(u),
            u_h: Some(u),
            u_a: Some(u),
            u_t: Some(u),
            u_e_literal: Some(-u),
            u_e_standard: Some(u),
            eps_glob: eps,
            eps_loc: eps,
        }
    }

    #[test]
    fn prefix_accuracy_example() {
        let c = AccuracyAcceptanceCurve::from_correctness(Metric::MaxProb, &[true, true, false, true]);
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.acceptance_rate, p.accuracy)).collect();
        assert_eq!(pts, vec![(0.25, 1.0), (0.5, 1.0), (0.75, 2.0 / 3.0), (1.0, 0.75)]);
    }

    #[test]
    fn ordering_directions() {
        let rows = vec![row(0, false, 0.9, 0.1), row(1, true, 0.1, 0.4), row(2, true, 0.5, 0.2)];
        assert_eq!(reliability_order(&rows, Metric::Entropy).unwrap(), vec![1, 2, 0]);
        assert_eq!(reliability_order(&rows, Metric::GlobalRobustness).unwrap(), vec![1, 2, 0]);
        // Epistemic orders by the non-negative convention.
        assert_eq!(reliability_order(&rows, Metric::Epistemic).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn constant_metric_keeps_index_order() {
        let rows: Vec<ReliabilityRow> = (0..6).map(|i| row(i, i % 2 == 0, 0.3, 0.3)).collect();
        for m in Metric::ALL {
            assert_eq!(reliability_order(&rows, m).unwrap(), (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn curves_agree_at_full_acceptance() {
        let rows: Vec<ReliabilityRow> = (0..20)
            .map(|i| row(i, (i * 7) % 3 != 0, ((i * 13) % 7) as f64, ((i * 5) % 11) as f64))
            .collect();
        let finals: Vec<usize> = Metric::ALL
            .iter()
            .map(|&m| accuracy_acceptance_rows(&rows, m).unwrap().final_correct())
            .collect();
        let expected = rows.iter().filter(|r| r.correct == Some(true)).count();
        assert!(finals.iter().all(|&f| f == expected));
    }

    #[test]
    fn missing_values_are_errors() {
        let mut r = row(0, true, 0.1, 0.1);
        r.u_a = None;
        assert!(matches!(
            accuracy_acceptance_rows(&[r.clone()], Metric::Aleatoric),
            Err(Error::MissingMetric { .. })
        ));
        assert!(accuracy_acceptance_rows(&[r], Metric::GlobalRobustness).is_ok());
        assert!("u_x".parse::<Metric>().is_err());
        assert_eq!("eps_loc".parse::<Metric>().unwrap(), Metric::LocalRobustness);
    }

    #[test]
    fn pointwise_stats() {
        let (m, s) = pointwise_mean_std(&[vec![1.0, 0.5], vec![0.0, 0.5]]);
        assert_eq!(m, vec![0.5, 0.5]);
        assert_eq!(s, vec![0.5, 0.0]);
        let (m, s) = pointwise_mean_std(&[vec![0.3, 0.7]]);
        assert_eq!(m, vec![0.3, 0.7]);
        assert_eq!(s, vec![0.0, 0.0]);
    }

    fn degenerate_fixture() -> Dataset {
        let d = DomainSpec::new(3, vec![2, 3]).unwrap();
        let inst = LabeledInstance { class: 1, features: vec![1, 2] };
        Dataset::new(d, vec![inst; 20]).unwrap()
    }

    #[test]
    fn single_run_on_constant_data() {
        let data = degenerate_fixture();
        let settings = SingleRunSettings {
            alpha_grid: crate::nbc::DEFAULT_ALPHA_GRID.to_vec(),
            folds: 5,
            m_ensemble: 10,
            bisection_tol: 1e-9,
        };
        let report = run_single(&data, &data, &settings, 1, 2).unwrap();
        assert_eq!(report.rows.len(), 20);
        assert_eq!(report.accuracy(), 1.0);
        // Every fold is perfect, so the smallest grid value wins.
        let alpha = report.meta.alpha_selected;
        assert_eq!(alpha, 0.01);
        // Posterior of class 1 from the smoothing formulas: joint(c) is
        // (n_c+α)/(n+3α) · Π (count+α)/(n_c+α|F_i|).
        let joint = |nc: f64, hit: f64| {
            (nc + alpha) / (20.0 + 3.0 * alpha)
                * ((hit + alpha) / (nc + 2.0 * alpha))
                * ((hit + alpha) / (nc + 3.0 * alpha))
        };
        let (j1, j0) = (joint(20.0, 20.0), joint(0.0, 0.0));
        let bound = 1.0 - j1 / (j1 + 2.0 * j0);
        for r in &report.rows {
            assert!((r.u_m.unwrap() - bound).abs() < 1e-12);
            assert!(r.eps_glob > 0.0 && r.eps_loc > 0.0);
        }
        assert_eq!(run_single(&data, &data, &settings, 1, 2).unwrap(), report);
    }

    #[test]
    fn score_handles_zero_marginals_and_unknown_classes() {
        let d = DomainSpec::new(2, vec![2]).unwrap();
        let point = MassFunction::new(vec![0.0, 1.0]).unwrap();
        let model = NbcModel::from_parts(
            d,
            0.0,
            MassFunction::uniform(2).unwrap(),
            vec![vec![point.clone()], vec![point]],
        )
        .unwrap();
        let rows = score_instances(
            &model,
            None,
            &[
                ScoredInstance { class: None, features: vec![0] },
                ScoredInstance { class: Some(1), features: vec![1] },
            ],
            1e-9,
        )
        .unwrap();
        assert_eq!(rows[0].u_m, None);
        assert_eq!(rows[0].eps_glob, 0.0);
        assert_eq!(rows[0].correct, None);
        assert_eq!(rows[1].u_a, None);
        assert!(rows[1].u_m.is_some());
        assert!(score_instances(&model, None, &[ScoredInstance { class: None, features: vec![2] }], 1e-9).is_err());
    }

    fn small_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::benchmark(7);
        c.n_test = 200;
        c.shifts_per_cell = 2;
        c.trains_per_shift = 2;
        c.cells = Some(vec![(25, 0.4), (50, 0.0)]);
        c
    }

    #[test]
    fn grid_single_replicate_has_zero_std() {
        let mut c = small_config();
        c.shifts_per_cell = 1;
        c.trains_per_shift = 1;
        c.cells = Some(vec![(30, 0.2)]);
        let run = run_grid(&c).unwrap();
        let cell = &run.stats.cells[0];
        assert_eq!(cell.curves.len(), 7);
        for m in &cell.curves {
            assert!(m.std.iter().all(|&s| s == 0.0));
            assert_eq!(m.mean.len(), 200);
        }
        // The mean equals the single replicate's own curve.
        let testbed = build_testbed(&c).unwrap();
        let seeds = replicate_seeds(7, 30, 0.2, 0, 0);
        let shifted = make_train(&testbed.joint, 0.2, seeds.shift.unwrap()).unwrap();
        let train = sample_dataset(&shifted.joint, 30, seeds.train.unwrap());
        let report = run_single(&train, &testbed.data, &SingleRunSettings::from(&c), seeds.cv, seeds.ensemble).unwrap();
        let curve = accuracy_acceptance(&report, Metric::LocalRobustness).unwrap();
        let acc: Vec<f64> = curve.points.iter().map(|p| p.accuracy).collect();
        assert_eq!(cell.metric(Metric::LocalRobustness).unwrap().mean, acc);
    }

    #[test]
    fn cell_rerun_in_isolation_matches() {
        let c = small_config();
        let full = run_grid(&c).unwrap();
        let mut only = c.clone();
        only.cells = Some(vec![(50, 0.0)]);
        let iso = run_grid(&only).unwrap();
        assert_eq!(full.stats.cell(50, 0.0).unwrap(), &iso.stats.cells[0]);
    }

    #[test]
    fn grid_is_worker_count_independent() {
        let c = small_config();
        let a = run_grid_with_workers(&c, 1).unwrap();
        let b = run_grid_with_workers(&c, 4).unwrap();
        assert_eq!(a, b);
        for r in &a.replicates {
            assert!(r.final_correct.iter().all(|&f| f == r.n_correct));
        }
    }
}
