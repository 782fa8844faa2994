use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{pyramid_dimension, FoldNote, MethodRunner, Workspace};
use crate::baselines::{cross_validate, stratified_folds, FoldReport};
use crate::datasets::{load_image_dataset, LabeledImageSet};
use crate::error::{Error, Result};
use crate::io::{create_parent, fmt_f64, save_json, sha256_file};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub root: Option<PathBuf>,
    pub convention: String,
    pub count: usize,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    pub content_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldFailure {
    pub method: String,
    pub m: usize,
    pub fold: usize,
    pub error: String,
}

/// Everything needed to audit or repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub created: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub dataset: DatasetSummary,
    pub pyramid_dimension: Option<usize>,
    pub wall_seconds: BTreeMap<String, f64>,
    /// Relative path to SHA-256 of every artifact written before the manifest.
    pub artifacts: BTreeMap<String, String>,
    pub failures: Vec<FoldFailure>,
    pub notes: Vec<FoldNote>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(e).context(format!("reading {}", path.display())))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: FoldReport,
    pub manifest: Manifest,
}

fn run_directory(out: &Path, config_hash: &str) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let base = out.join(format!("{stamp}-{config_hash}"));
    let mut dir = base.clone();
    let mut k = 1;
    while dir.exists() {
        dir = PathBuf::from(format!("{}-{k}", base.display()));
        k += 1;
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Loads the configured dataset and runs every method.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let root = config
        .dataset
        .root
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("config has no dataset root".into()))?;
    let data = load_image_dataset(root, config.dataset.layout)?;
    run_experiment_on(config, &data)
}

/// Re-runs the configuration recorded in a manifest.
pub fn rerun_manifest(path: &Path) -> Result<RunOutcome> {
    let manifest = Manifest::load(path)?;
    run_experiment(&manifest.config)
}

/// Runs every configured method on `data` and writes a run directory under
/// `config.out`.
pub fn run_experiment_on(config: &ExperimentConfig, data: &LabeledImageSet) -> Result<RunOutcome> {
    config.validate()?;
    let clock = Instant::now();
    let labels = data.binary_labels(&config.dataset.positive_class)?;
    let folds = stratified_folds(&labels, config.folds, &mut Rng::derive(config.seed, "folds"))?;
    let config_hash = config.hash();
    let dir = run_directory(&config.out, &config_hash)?;
    log::info!("writing run to {}", dir.display());

    let mut ws = Workspace::new(config, data);
    let mut report = FoldReport::default();
    let mut wall_seconds = BTreeMap::new();
    for &method in &config.methods {
        let started = Instant::now();
        let mut runner = MethodRunner::new(method, &mut ws);
        let part = cross_validate(&mut runner, &labels, &folds, &config.m_range)?;
        report.records.extend(part.records);
        wall_seconds.insert(method.name().to_owned(), started.elapsed().as_secs_f64());
    }

    write_folds(&dir.join("folds.csv"), data, &labels, &folds)?;
    report.save_csv(&dir.join("results.csv"))?;
    report.save_means_csv(&dir.join("summary.csv"))?;
    report.save_predictions_csv(&dir.join("predictions.csv"))?;
    for (method, m, fold, trace) in &ws.traces {
        trace.save_csv(&dir.join("traces").join(format!("{method}-m{m}-fold{fold}.csv")))?;
    }
    for scatter in &ws.scatters {
        let path = dir.join("features").join(format!("scatter-{}.csv", scatter.method));
        create_parent(&path)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["method", "label", "dim0", "dim1"])?;
        let mut points = scatter.points.clone();
        points.sort_by_key(|p| p.0);
        for (i, x) in points {
            w.write_record([
                scatter.method.name().to_owned(),
                data.class_names[data.labels[i]].clone(),
                fmt_f64(x[0]),
                fmt_f64(x[1]),
            ])?;
        }
        w.flush()?;
    }
    wall_seconds.insert("total".into(), clock.elapsed().as_secs_f64());

    let manifest = Manifest {
        tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        created: chrono::Utc::now().to_rfc3339(),
        config: config.clone(),
        config_hash,
        seeds: BTreeMap::from([("master".to_owned(), config.seed)]),
        dataset: DatasetSummary {
            root: config.dataset.root.clone(),
            convention: data.convention.clone(),
            count: data.len(),
            class_names: data.class_names.clone(),
            class_counts: data.class_counts(),
            content_hash: ws.dataset_hash.clone(),
        },
        pyramid_dimension: pyramid_dimension(config),
        wall_seconds,
        artifacts: hash_artifacts(&dir)?,
        failures: report
            .records
            .iter()
            .filter_map(|r| {
                r.error.as_ref().map(|e| FoldFailure {
                    method: r.method.clone(),
                    m: r.m,
                    fold: r.fold,
                    error: e.clone(),
                })
            })
            .collect(),
        notes: ws.notes.clone(),
    };
    save_json(&dir.join("manifest.json"), &manifest)?;
    Ok(RunOutcome { dir, report, manifest })
}

fn write_folds(path: &Path, data: &LabeledImageSet, labels: &[i8], folds: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "path", "label", "fold"])?;
    for i in 0..labels.len() {
        w.write_record([
            i.to_string(),
            data.paths[i].display().to_string(),
            labels[i].to_string(),
            folds[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn hash_artifacts(dir: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("inside run dir").to_string_lossy().replace('\\', "/");
                out.insert(rel, sha256_file(&p)?);
            }
        }
    }
    Ok(out)
}
