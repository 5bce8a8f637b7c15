use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sketchy_core::diag::{local_qr_ratio, spectrum_report};
use sketchy_core::optim::{self, RunRecord, RunResult, RunStatus};
use sketchy_core::{Dataset, GlmModel};

use crate::config::{DataSource, ExperimentConfig, Task};
use crate::error::{BenchError, Result};
use crate::features::FeatureMap;
use crate::preprocess::{preprocess, sign_labels};
use crate::reference::{reference_minimum, ReferenceSolution};
use crate::svmlight::parse_svmlight;

pub const RUN_HEADER: &str = "epoch,passes,train_loss,subopt,seconds,lambda_p,eta";

/// Training data after loading, label mapping, preprocessing, splitting and features.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset<f64>,
    pub holdout: Option<Dataset<f64>>,
    pub nu: f64,
}

pub fn load_data(source: &DataSource) -> Result<Dataset<f64>> {
    match source {
        DataSource::Svmlight { path, n_features } => parse_svmlight(path, *n_features),
        DataSource::Synthetic(s) => s.generate(),
    }
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let mut ds = load_data(&cfg.data)?;
    if cfg.task == Task::Logistic {
        let (a, b) = ds.into_parts();
        ds = Dataset::new(a, sign_labels(&b))?;
    }
    let ds = preprocess(&ds, cfg.preprocessing)?;

    let n = ds.n();
    let n_hold = (cfg.split.holdout * n as f64).round() as usize;
    let (train, holdout) = if n_hold == 0 {
        (ds, None)
    } else {
        if n_hold >= n {
            return Err(BenchError::Config(format!("holdout leaves no training samples (n = {n})")));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.split.seed));
        let (hold, tr) = idx.split_at(n_hold);
        let (mut tr, mut hold) = (tr.to_vec(), hold.to_vec());
        tr.sort_unstable();
        hold.sort_unstable();
        (ds.subset(&tr)?, Some(ds.subset(&hold)?))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (train, holdout) = match FeatureMap::draw(&cfg.random_features, train.p(), &mut rng)? {
        Some(map) => (map.apply(&train)?, holdout.map(|h| map.apply(&h)).transpose()?),
        None => (train, holdout),
    };
    let nu = cfg.nu.resolve(train.n());
    Ok(Prepared { train, holdout, nu })
}

#[derive(Debug, Serialize)]
struct CsvRecord {
    epoch: usize,
    passes: f64,
    train_loss: f64,
    subopt: Option<f64>,
    seconds: f64,
    lambda_p: Option<f64>,
    eta: Option<f64>,
}

pub fn write_run_csv(path: &Path, records: &[RunRecord], wall_clock: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(CsvRecord {
            epoch: r.epoch,
            passes: r.passes,
            train_loss: r.train_loss,
            subopt: r.subopt,
            seconds: if wall_clock { r.seconds } else { 0.0 },
            lambda_p: r.lambda_p,
            eta: r.eta,
        })?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: String,
    pub method: String,
    pub precond: String,
    pub status: String,
    pub epochs: usize,
    pub passes: f64,
    pub final_subopt: f64,
    /// First epoch whose suboptimality is within the solve tolerance.
    pub epochs_to_tol: Option<usize>,
    pub passes_to_tol: Option<f64>,
    pub solved: bool,
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Completed => "completed",
        RunStatus::Converged => "converged",
        RunStatus::Diverged => "diverged",
    }
}

pub fn summarize(name: &str, spec_method: &str, precond: &str, result: &RunResult<f64>, tol: f64) -> RunSummary {
    let last = result.records.last();
    let hit = result.records.iter().find(|r| r.subopt.is_some_and(|s| s <= tol));
    RunSummary {
        run: name.into(),
        method: spec_method.into(),
        precond: precond.into(),
        status: status_name(result.status).into(),
        epochs: last.map_or(0, |r| r.epoch),
        passes: last.map_or(0.0, |r| r.passes),
        final_subopt: last.and_then(|r| r.subopt).unwrap_or(f64::NAN),
        epochs_to_tol: hit.map(|r| r.epoch),
        passes_to_tol: hit.map(|r| r.passes),
        solved: hit.is_some(),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub summaries: Vec<RunSummary>,
    pub reference: Option<ReferenceSolution>,
    pub run_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f).map_err(|e| BenchError::io(path, e))
}

/// Runs every configured method and writes `<name>.csv` per run plus
/// `summary.csv` (and `reference.json` when there is at least one run).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let prepared = prepare(cfg)?;
    create_dir(&cfg.output)?;
    let model = GlmModel::new(&prepared.train, cfg.task.loss(), prepared.nu)?;

    let reference = if cfg.runs.is_empty() {
        None
    } else {
        let r = reference_minimum(&model)?;
        write_json(&cfg.output.join("reference.json"), &r)?;
        Some(r)
    };

    let mut summaries = Vec::new();
    let mut run_files = Vec::new();
    for spec in &cfg.runs {
        let name = spec.name()?;
        let mut oc = spec.optimizer_config(cfg.max_epochs, cfg.seed)?;
        oc.f_star = reference.as_ref().map(|r| r.f_star);
        log::info!("running {name}");
        let result = optim::run(&model, &oc, &mut |_| {})?;
        let path = cfg.output.join(format!("{name}.csv"));
        write_run_csv(&path, &result.records, cfg.record_wall_clock)?;
        run_files.push(path);
        let precond = spec.precond_kind()?.map_or("none".to_string(), |k| k.to_string());
        summaries.push(summarize(&name, oc.method.name(), &precond, &result, cfg.solve_tolerance));
    }

    let summary_file = cfg.output.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary_file)?;
    if summaries.is_empty() {
        w.write_record([
            "run", "method", "precond", "status", "epochs", "passes", "final_subopt", "epochs_to_tol",
            "passes_to_tol", "solved",
        ])?;
    }
    for s in &summaries {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| BenchError::io(&summary_file, e))?;

    Ok(ExperimentReport { summaries, reference, run_files, summary_file })
}

/// Computes and writes `reference.json`.
pub fn solve_reference(cfg: &ExperimentConfig) -> Result<(ReferenceSolution, PathBuf)> {
    let prepared = prepare(cfg)?;
    create_dir(&cfg.output)?;
    let model = GlmModel::new(&prepared.train, cfg.task.loss(), prepared.nu)?;
    let r = reference_minimum(&model)?;
    let path = cfg.output.join("reference.json");
    write_json(&path, &r)?;
    Ok((r, path))
}

/// `ν` grid for the spectrum report: `ν · 10^k`, `k = -3..=3`.
pub fn nu_grid(nu: f64) -> Vec<f64> {
    let base = if nu > 0.0 { nu } else { 1e-6 };
    (-3..=3).map(|k| base * 10f64.powi(k)).collect()
}

/// Writes `spectrum.csv` in long form: `quantity,index,nu,value`.
pub fn write_spectrum(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let prepared = prepare(cfg)?;
    create_dir(&cfg.output)?;
    let grid = nu_grid(prepared.nu);
    let rep = spectrum_report(prepared.train.design(), prepared.nu, &grid)?;
    let path = cfg.output.join("spectrum.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["quantity", "index", "nu", "value"])?;
    let nu = prepared.nu.to_string();
    for (j, s) in rep.singular_values.iter().enumerate() {
        w.write_record(["singular_value", &j.to_string(), "", &s.to_string()])?;
    }
    for (j, (g, d)) in rep.nu_grid.iter().zip(&rep.effective_dimension).enumerate() {
        w.write_record(["effective_dimension", &j.to_string(), &g.to_string(), &d.to_string()])?;
    }
    for (i, l) in rep.leverage_scores.iter().enumerate() {
        w.write_record(["leverage_score", &i.to_string(), &nu, &l.to_string()])?;
    }
    w.write_record(["coherence", "0", &nu, &rep.coherence.to_string()])?;
    w.flush().map_err(|e| BenchError::io(&path, e))?;
    Ok(path)
}

/// `𝔮ⱼ` for each preconditioner interval of a run kept with `keep_iterates`.
/// `boundaries` are the epochs at which the preconditioner was rebuilt; the
/// interval starting at `boundaries[j]` covers the epoch iterates up to and
/// including the next boundary (or the last epoch).
pub fn interval_qr_ratios(
    model: &GlmModel<'_, f64>,
    iterates: &[DVector<f64>],
    boundaries: &[usize],
    w_star: &DVector<f64>,
) -> Result<Vec<f64>> {
    let last = iterates.len().saturating_sub(1);
    let mut starts: Vec<usize> = boundaries.iter().copied().filter(|&e| e < last).collect();
    starts.dedup();
    if starts.is_empty() {
        starts.push(0);
    }
    let mut out = Vec::with_capacity(starts.len());
    for (j, &s) in starts.iter().enumerate() {
        let end = starts.get(j + 1).copied().unwrap_or(last);
        out.push(local_qr_ratio(model, &iterates[s], &iterates[s..=end], w_star)?);
    }
    Ok(out)
}

/// Epoch of each preconditioner update, from step indices.
pub fn update_epochs(update_steps: &[usize], epoch_len: usize) -> Vec<usize> {
    let mut e: Vec<usize> = update_steps.iter().map(|&s| s / epoch_len.max(1)).collect();
    e.dedup();
    e
}
