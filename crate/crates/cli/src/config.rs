use std::fs;
use std::path::{Path, PathBuf};

use nbrobust::{DomainSpec, ExperimentConfig};
use serde::Deserialize;

use crate::CliError;

/// Settings shared by every subcommand. Each field may come from the TOML
/// file or a flag; flags take precedence, then the file, then the defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: Option<u64>,
    pub classes: Option<usize>,
    pub feature_cards: Option<Vec<usize>>,
    pub class_probs: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub peak: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub n_trains: Option<Vec<usize>>,
    pub cells: Option<Vec<(usize, f64)>>,
    pub n_test: Option<usize>,
    pub m_ensemble: Option<usize>,
    pub alpha_grid: Option<Vec<f64>>,
    pub folds: Option<usize>,
    pub bisection_tol: Option<f64>,
    pub shifts_per_cell: Option<usize>,
    pub trains_per_shift: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),+ $(,)?) => {
        RunConfig { $($field: $top.$field.or($base.$field),)+ }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| nbrobust::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        overlay!(
            self,
            top,
            master_seed,
            classes,
            feature_cards,
            class_probs,
            beta,
            peak,
            gammas,
            n_trains,
            cells,
            n_test,
            m_ensemble,
            alpha_grid,
            folds,
            bisection_tol,
            shifts_per_cell,
            trains_per_shift,
            output_dir,
            workers,
        )
    }

    pub fn domain(&self) -> Result<DomainSpec, CliError> {
        let bench = DomainSpec::benchmark();
        let classes = self.classes.unwrap_or(bench.num_classes());
        let cards = self.feature_cards.clone().unwrap_or_else(|| bench.feature_cards().to_vec());
        Ok(DomainSpec::new(classes, cards)?)
    }

    /// Experiment settings with defaults filled in and ranges checked.
    /// `seed` is used when no master seed was configured.
    pub fn experiment(&self, seed: u64) -> Result<ExperimentConfig, CliError> {
        let mut c = ExperimentConfig::benchmark(self.master_seed.unwrap_or(seed));
        c.domain = self.domain()?;
        if let Some(p) = &self.class_probs {
            c.class_probs = p.clone();
        } else if c.domain.num_classes() != 3 {
            c.class_probs = vec![1.0 / c.domain.num_classes() as f64; c.domain.num_classes()];
        }
        macro_rules! take {
            ($($field:ident),+) => { $( if let Some(v) = self.$field.clone() { c.$field = v; } )+ };
        }
        take!(beta, peak, gammas, n_trains, n_test, m_ensemble, alpha_grid, folds, bisection_tol);
        take!(shifts_per_cell, trains_per_shift);
        c.cells = self.cells.clone();
        c.validate()?;
        Ok(c)
    }
}
