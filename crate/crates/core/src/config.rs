use serde::{Deserialize, Serialize};

use crate::categorical::{DomainSpec, MassFunction};
use crate::error::{Error, Result};
use crate::nbc::{DEFAULT_ALPHA_GRID, DEFAULT_FOLDS};
use crate::robustness::DEFAULT_BISECTION_TOL;
use crate::synth::GeneratorConfig;

/// Everything that determines the output of a grid run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub domain: DomainSpec,
    pub beta: f64,
    pub class_probs: Vec<f64>,
    pub peak: f64,
    pub n_trains: Vec<usize>,
    pub gammas: Vec<f64>,
    /// Explicit `(n_train, gamma)` cells; when absent every combination of
    /// `n_trains` and `gammas` is run, `n_trains` outermost.
    pub cells: Option<Vec<(usize, f64)>>,
    pub n_test: usize,
    pub m_ensemble: usize,
    pub alpha_grid: Vec<f64>,
    pub folds: usize,
    pub bisection_tol: f64,
    pub shifts_per_cell: usize,
    pub trains_per_shift: usize,
}

impl ExperimentConfig {
    pub fn benchmark(master_seed: u64) -> Self {
        Self {
            master_seed,
            domain: DomainSpec::benchmark(),
            beta: 0.3,
            class_probs: vec![0.4, 0.35, 0.25],
            peak: 0.85,
            n_trains: vec![25, 50, 100],
            gammas: vec![0.0, 0.2, 0.4],
            cells: None,
            n_test: 1000,
            m_ensemble: 10,
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
            folds: DEFAULT_FOLDS,
            bisection_tol: DEFAULT_BISECTION_TOL,
            shifts_per_cell: 10,
            trains_per_shift: 10,
        }
    }

    pub fn cells(&self) -> Vec<(usize, f64)> {
        match &self.cells {
            Some(cells) => cells.clone(),
            None => self
                .n_trains
                .iter()
                .flat_map(|&n| self.gammas.iter().map(move |&g| (n, g)))
                .collect(),
        }
    }

    pub fn generator(&self, rand_seed: u64) -> Result<GeneratorConfig> {
        let cfg = GeneratorConfig {
            domain: self.domain.clone(),
            beta: self.beta,
            class_probs: MassFunction::new(self.class_probs.clone())?,
            peak: self.peak,
            seed: rand_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.generator(0)?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_test == 0 {
            return bad("n_test must be positive".into());
        }
        if self.m_ensemble < 2 {
            return bad(format!("m_ensemble {} must be at least 2", self.m_ensemble));
        }
        if self.folds < 2 {
            return bad(format!("folds {} must be at least 2", self.folds));
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad("alpha grid must be non-empty and positive".into());
        }
        if !(self.bisection_tol > 0.0) {
            return bad(format!("bisection_tol {} must be > 0", self.bisection_tol));
        }
        if self.shifts_per_cell == 0 || self.trains_per_shift == 0 {
            return bad("replicate counts must be positive".into());
        }
        for (n, g) in self.cells() {
            if n < self.folds {
                return bad(format!("n_train {n} is smaller than {} folds", self.folds));
            }
            if !(0.0..=1.0).contains(&g) {
                return bad(format!("gamma {g} outside [0, 1]"));
            }
        }
        Ok(())
    }
}
