use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use nbrobust::export::{self, Panel};
use nbrobust::harness::{self, ScoredInstance};
use nbrobust::rng::derive_seed;
use nbrobust::synth;
use nbrobust::{Dataset, Ensemble, Error, NbcModel};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{CliError, CommonArgs};

const FIT_CV_TAG: u64 = 11;
const FIT_ENSEMBLE_TAG: u64 = 12;

fn io_err(path: &Path, e: io::Error) -> CliError {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
    .into()
}

fn open(path: &Path) -> Result<fs::File, CliError> {
    fs::File::open(path).map_err(|e| io_err(path, e))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| io_err(path, e))
}

fn mkdir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Adds the file name to parse errors raised while reading `path`.
fn in_file(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Parse { line, message } => CliError::Input {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        },
        other => other.into(),
    }
}

fn parse_pair<A: std::str::FromStr, B: std::str::FromStr>(s: &str) -> Result<(A, B), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got `{s}`"))?;
    let a = a.trim().parse().map_err(|_| format!("bad first value in `{s}`"))?;
    let b = b.trim().parse().map_err(|_| format!("bad second value in `{s}`"))?;
    Ok((a, b))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Output directory
    #[arg(long)]
    out: PathBuf,

    /// Mixing weight of the random component in the test distribution
    #[arg(long)]
    beta: Option<f64>,

    /// Shift strengths, comma separated
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,

    /// Training-set sizes, comma separated (shift draws are seeded per cell)
    #[arg(long, value_delimiter = ',')]
    n_trains: Option<Vec<usize>>,

    /// Shifted distributions per cell
    #[arg(long)]
    shifts: Option<usize>,

    /// Size of the written test sample
    #[arg(long)]
    n_test: Option<usize>,
}

pub fn synth(a: SynthArgs) -> Result<(), CliError> {
    let rc = a.common.resolve(RunConfig {
        beta: a.beta,
        gammas: a.gammas,
        n_trains: a.n_trains,
        shifts_per_cell: a.shifts,
        n_test: a.n_test,
        ..Default::default()
    })?;
    let cfg = rc.experiment(0)?;
    let generator = cfg.generator(harness::rand_seed(cfg.master_seed))?;
    mkdir(&a.out)?;
    let write_joint = |name: String, joint: &nbrobust::JointMassFunction| -> Result<(), CliError> {
        let path = a.out.join(name);
        joint.write_csv(create(&path)?).map_err(in_file(&path))
    };
    write_joint("p_fix.csv".into(), &synth::make_fixed(&generator)?)?;
    write_joint("p_rand.csv".into(), &synth::make_random(&cfg.domain, generator.seed)?)?;
    let testbed = harness::build_testbed(&cfg)?;
    write_joint("p_test.csv".into(), &testbed.joint)?;
    let test_path = a.out.join("test.csv");
    testbed.data.write_csv(create(&test_path)?).map_err(in_file(&test_path))?;
    for (n_train, gamma) in cfg.cells() {
        for s in 0..cfg.shifts_per_cell {
            let seeds = harness::replicate_seeds(cfg.master_seed, n_train, gamma, s, 0);
            let shifted = synth::make_train(&testbed.joint, gamma, seeds.shift.unwrap_or_default())?;
            write_joint(format!("p_train_n{n_train}_g{gamma}_s{s}.csv"), &shifted.joint)?;
        }
    }
    Ok(())
}

/// Classifier plus optional ensemble, as written by `fit` and read by `score`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelBundle {
    pub model: NbcModel,
    #[serde(default)]
    pub ensemble: Option<Ensemble>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Labelled training data with header `class,f1,...,fN`
    #[arg(long)]
    train: PathBuf,

    /// Output model file (JSON)
    #[arg(long)]
    out: PathBuf,

    /// Fixed smoothing value; skips cross-validation
    #[arg(long)]
    alpha: Option<f64>,

    /// Do not fit a bootstrap ensemble
    #[arg(long)]
    no_ensemble: bool,
}

pub fn fit(a: FitArgs) -> Result<(), CliError> {
    let rc = a.common.resolve(RunConfig::default())?;
    let cfg = rc.experiment(0)?;
    let seed = cfg.master_seed;
    let data = Dataset::read_csv(cfg.domain.clone(), open(&a.train)?).map_err(in_file(&a.train))?;
    let alpha = match a.alpha {
        Some(alpha) => alpha,
        None => {
            let sel = nbrobust::select_alpha(&data, &cfg.alpha_grid, cfg.folds, derive_seed(seed, &[FIT_CV_TAG]))?;
            eprintln!("selected alpha {} (cv accuracy {:.4})", sel.alpha, sel.cv_accuracy.iter().cloned().fold(0.0, f64::max));
            sel.alpha
        }
    };
    let model = nbrobust::fit(&data, alpha)?;
    let ensemble = if a.no_ensemble {
        None
    } else {
        Some(nbrobust::fit_ensemble(&data, alpha, cfg.m_ensemble, derive_seed(seed, &[FIT_ENSEMBLE_TAG]))?)
    };
    let bundle = ModelBundle { model, ensemble };
    let json = serde_json::to_string_pretty(&bundle).expect("model serializes");
    fs::write(&a.out, json + "\n").map_err(|e| io_err(&a.out, e))
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Model file written by `fit`
    #[arg(long)]
    model: PathBuf,

    /// Feature vectors with header `f1,...,fN` or `class,f1,...,fN`
    #[arg(long)]
    instances: PathBuf,

    /// Output report CSV; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn read_bundle(path: &Path) -> Result<ModelBundle, CliError> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: format!("line {}: {e}", e.line()),
    })
}

/// Reads feature vectors; the class column is optional and may be blank.
pub fn read_instances<R: Read>(domain: &nbrobust::DomainSpec, reader: R) -> Result<Vec<ScoredInstance>, Error> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(csv_parse)?.clone();
    let n = domain.num_features();
    let features: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
    let has_class = header.get(0) == Some("class");
    let expected: Vec<&str> = has_class
        .then_some("class")
        .into_iter()
        .chain(features.iter().map(String::as_str))
        .collect();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", expected.join(",")),
        });
    }
    let offset = usize::from(has_class);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_parse)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse { line, message };
        let class = match rec.get(0).filter(|_| has_class) {
            None | Some("") => None,
            Some(s) => {
                let c: usize = s.parse().map_err(|_| bad(format!("class `{s}` is not an integer")))?;
                domain.check_class(c).map_err(|e| bad(e.to_string()))?;
                Some(c)
            }
        };
        let f = (0..n)
            .map(|i| {
                let s = rec.get(offset + i).unwrap_or("");
                s.parse::<usize>().map_err(|_| bad(format!("feature f{} value `{s}` is not an integer", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        domain.check_features(&f).map_err(|e| bad(e.to_string()))?;
        out.push(ScoredInstance { class, features: f });
    }
    Ok(out)
}

fn csv_parse(e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

pub fn score(a: ScoreArgs) -> Result<(), CliError> {
    let rc = a.common.resolve(RunConfig::default())?;
    let tol = rc.bisection_tol.unwrap_or(nbrobust::robustness::DEFAULT_BISECTION_TOL);
    let bundle = read_bundle(&a.model)?;
    let instances = read_instances(bundle.model.domain(), open(&a.instances)?).map_err(in_file(&a.instances))?;
    let rows = harness::score_instances(&bundle.model, bundle.ensemble.as_ref(), &instances, tol)?;
    match &a.out {
        Some(path) => export::write_report_csv(&rows, create(path)?).map_err(in_file(path)),
        None => export::write_report_csv(&rows, io::stdout().lock()).map_err(CliError::from),
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Output directory (overrides `output_dir` in the config file)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Restrict the grid to explicit `n_train,gamma` cells; repeatable
    #[arg(long = "cell", value_parser = parse_pair::<usize, f64>)]
    cells: Vec<(usize, f64)>,

    /// Shift distributions and training sets per cell, as `shifts,trains`
    #[arg(long, value_parser = parse_pair::<usize, usize>)]
    replicates: Option<(usize, usize)>,

    /// Shift strengths, comma separated
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,

    /// Training-set sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    n_trains: Option<Vec<usize>>,

    /// Test-set size
    #[arg(long)]
    n_test: Option<usize>,

    /// Mixing weight of the random component in the test distribution
    #[arg(long)]
    beta: Option<f64>,

    /// Worker threads; all outputs are identical for any value
    #[arg(long)]
    workers: Option<usize>,
}

pub fn experiment(a: ExperimentArgs) -> Result<(), CliError> {
    let rc = a.common.resolve(RunConfig {
        cells: (!a.cells.is_empty()).then(|| a.cells.clone()),
        shifts_per_cell: a.replicates.map(|r| r.0),
        trains_per_shift: a.replicates.map(|r| r.1),
        gammas: a.gammas,
        n_trains: a.n_trains,
        n_test: a.n_test,
        beta: a.beta,
        workers: a.workers,
        output_dir: a.out,
        ..Default::default()
    })?;
    if rc.master_seed.is_none() {
        return Err(CliError::Config(
            "experiment needs a master seed (--seed or master_seed in the config file)".into(),
        ));
    }
    let out = rc
        .output_dir
        .clone()
        .ok_or_else(|| CliError::Config("no output directory (--out or output_dir)".into()))?;
    let cfg = rc.experiment(0)?;
    let run = match rc.workers {
        Some(w) => harness::run_grid_with_workers(&cfg, w)?,
        None => harness::run_grid(&cfg)?,
    };
    export::export_grid(&run.stats, &out)?;
    let path = out.join("replicates.json");
    let json = serde_json::to_string_pretty(&run.replicates).expect("replicates serialize");
    fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
    let path = out.join("config.json");
    let json = serde_json::to_string_pretty(&cfg).expect("config serializes");
    fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Curves CSV written by `experiment`
    #[arg(long)]
    curves: PathBuf,

    /// Acceptance rate at which to tabulate mean and std
    #[arg(long, default_value_t = 0.2)]
    rate: f64,

    /// Directory for redrawn figures
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn report(a: ReportArgs) -> Result<(), CliError> {
    a.common.resolve(RunConfig::default())?;
    if !(a.rate > 0.0 && a.rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("rate {} outside (0, 1]", a.rate)).into());
    }
    let stats = export::read_curves_csv(open(&a.curves)?).map_err(in_file(&a.curves))?;
    let mut stdout = io::stdout().lock();
    let mut table = String::from("n_train,gamma,metric,rate,mean_accuracy,std_accuracy\n");
    for cell in &stats.cells {
        for m in &cell.curves {
            let n = m.mean.len();
            let k = ((a.rate * n as f64).ceil() as usize).clamp(1, n) - 1;
            table += &format!(
                "{},{},{},{},{:.6},{:.6}\n",
                cell.n_train,
                cell.gamma,
                m.metric,
                (k + 1) as f64 / n as f64,
                m.mean[k],
                m.std[k]
            );
        }
    }
    stdout.write_all(table.as_bytes()).map_err(|e| io_err(Path::new("<stdout>"), e))?;
    if let Some(dir) = &a.out {
        mkdir(dir)?;
        for (name, panel) in [(export::MEANS_SVG_FILE, Panel::Mean), (export::STDS_SVG_FILE, Panel::Std)] {
            let path = dir.join(name);
            fs::write(&path, export::render_svg(&stats, panel)).map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(())
}
