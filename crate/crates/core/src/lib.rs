//! Naive Bayes classifiers with ε-contamination robustness metrics,
//! ensemble uncertainty baselines and a synthetic distribution-shift
//! benchmark that compares them through accuracy-acceptance curves.

pub mod categorical;
pub mod config;
pub mod error;
pub mod export;
pub mod harness;
pub mod nbc;
pub mod rng;
pub mod robustness;
pub mod synth;
pub mod uncertainty;

pub use categorical::{Dataset, DomainSpec, JointMassFunction, LabeledInstance, MassFunction};
pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use harness::{AccuracyAcceptanceCurve, GridStats, Metric, ReliabilityReport, ReliabilityRow};
pub use nbc::{fit, select_alpha, NbcModel};
pub use robustness::{global_robustness, local_robustness, RobustnessKind, RobustnessValue};
pub use uncertainty::{fit_ensemble, Ensemble};
