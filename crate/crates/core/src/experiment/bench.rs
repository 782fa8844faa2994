use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::{swiss_roll, unrolled_coordinates, SwissRollSpec};
use crate::distances::geodesic_distance_matrix;
use crate::error::{Error, Result};
use crate::io::{create_parent, fmt_f64, save_json, save_matrix_csv};
use crate::linalg::Matrix;
use crate::mds::{ilma_fit_observed, smacof_fit, DistanceMatrix, IlmaOptions, InitStrategy, RunTrace, SmacofOptions};
use crate::rng::Rng;

/// Swiss-roll benchmark: ILMA under several initialization strategies, and
/// SMACOF given the same wall time as each random-order ILMA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub roll: SwissRollSpec,
    pub knn: usize,
    pub m: usize,
    pub sweeps: usize,
    pub repeats: usize,
    pub strategies: Vec<InitStrategy>,
    pub seed: u64,
    pub smacof: bool,
    /// Sweeps at which repeat 0 of the first strategy is snapshotted.
    pub snapshot_sweeps: Vec<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            roll: SwissRollSpec::default(),
            knn: 8,
            m: 3,
            sweeps: 10,
            repeats: 20,
            strategies: InitStrategy::ALL.to_vec(),
            seed: 0,
            smacof: true,
            snapshot_sweeps: vec![0, 1, 10],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub distances: DistanceMatrix,
    pub ilma: Vec<(InitStrategy, Vec<RunTrace>)>,
    /// Paired with the runs of the first strategy.
    pub smacof: Vec<RunTrace>,
    pub snapshots: Vec<(usize, Matrix)>,
}

/// Seed of repeat `r`, shared across strategies so they face the same draws.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    Rng::derive(seed, &format!("bench/repeat-{r}")).next_u64()
}

/// Mean stress per sweep index; runs that stopped early carry their last value.
pub fn mean_stress_per_iteration(traces: &[RunTrace], sweeps: usize) -> Vec<f64> {
    (0..=sweeps)
        .map(|k| {
            let vals: Vec<f64> = traces.iter().filter_map(|t| t.stress_at(k)).collect();
            vals.iter().sum::<f64>() / vals.len().max(1) as f64
        })
        .collect()
}

impl BenchOutcome {
    pub fn traces(&self, strategy: InitStrategy) -> Option<&[RunTrace]> {
        self.ilma.iter().find(|(s, _)| *s == strategy).map(|(_, t)| t.as_slice())
    }
}

pub fn bench_swissroll(cfg: &BenchConfig) -> Result<BenchOutcome> {
    if cfg.strategies.is_empty() || cfg.repeats == 0 || cfg.sweeps == 0 || cfg.m == 0 {
        return Err(Error::InvalidArgument(format!("invalid benchmark configuration {cfg:?}")));
    }
    let pc = swiss_roll(&cfg.roll)?;
    let d = geodesic_distance_matrix(&pc, cfg.knn)?;
    let mut ilma = Vec::new();
    let mut snapshots = Vec::new();
    let mut smacof = Vec::new();
    for (si, &strategy) in cfg.strategies.iter().enumerate() {
        let mut traces = Vec::with_capacity(cfg.repeats);
        for r in 0..cfg.repeats {
            let opts = IlmaOptions {
                max_sweeps: cfg.sweeps,
                // Run every sweep; the comparison is per sweep index.
                tolerance: f64::MIN_POSITIVE,
                strategy,
                seed: repeat_seed(cfg.seed, r),
                ..IlmaOptions::default()
            };
            let snap = si == 0 && r == 0;
            let (_, trace) = ilma_fit_observed(&d, cfg.m, &opts, |sweep, codes| {
                if snap && cfg.snapshot_sweeps.contains(&sweep) {
                    snapshots.push((sweep, codes.clone()));
                }
            })?;
            log::info!(
                "{} repeat {r}: stress {:.6e} after {} sweeps in {:.3}s",
                strategy.name(),
                trace.final_stress().unwrap_or(f64::NAN),
                trace.len() - 1,
                trace.elapsed()
            );
            if si == 0 && cfg.smacof {
                let sopts = SmacofOptions {
                    max_iter: usize::MAX,
                    tolerance: f64::MIN_POSITIVE,
                    seed: opts.seed,
                    time_budget: Some(trace.elapsed()),
                };
                smacof.push(smacof_fit(&d, cfg.m, &sopts)?.1);
            }
            traces.push(trace);
        }
        ilma.push((strategy, traces));
    }
    Ok(BenchOutcome {
        distances: d,
        ilma,
        smacof,
        snapshots,
    })
}

/// Writes the benchmark CSVs into `dir` and returns their paths.
///
/// * `stress_per_iteration.csv`: `strategy,iteration,mean_raw_stress`
/// * `stress_vs_time.csv`: `method,repeat,iteration,raw_stress,elapsed_seconds`
/// * `comparison.csv`: final ILMA and SMACOF stress per repeat
/// * `snapshots/embedding-sweep<k>.csv` and `snapshots/unrolled.csv`
pub fn write_bench_artifacts(dir: &Path, cfg: &BenchConfig, out: &BenchOutcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("stress_per_iteration.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["strategy", "iteration", "mean_raw_stress"])?;
    for (strategy, traces) in &out.ilma {
        for (k, v) in mean_stress_per_iteration(traces, cfg.sweeps).into_iter().enumerate() {
            w.write_record([strategy.name().to_owned(), k.to_string(), fmt_f64(v)])?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("stress_vs_time.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "repeat", "iteration", "raw_stress", "elapsed_seconds"])?;
    let labelled = out
        .ilma
        .iter()
        .map(|(s, t)| (format!("ilma-{}", s.name()), t.as_slice()))
        .chain(std::iter::once(("smacof".to_owned(), out.smacof.as_slice())));
    for (name, traces) in labelled {
        for (r, trace) in traces.iter().enumerate() {
            for s in &trace.samples {
                w.write_record([
                    name.clone(),
                    r.to_string(),
                    s.iteration.to_string(),
                    fmt_f64(s.raw_stress),
                    fmt_f64(s.elapsed_seconds),
                ])?;
            }
        }
    }
    w.flush()?;
    written.push(path);

    if !out.smacof.is_empty() {
        let path = dir.join("comparison.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["repeat", "ilma_raw_stress", "smacof_raw_stress", "seconds"])?;
        for (r, (a, b)) in out.ilma[0].1.iter().zip(&out.smacof).enumerate() {
            w.write_record([
                r.to_string(),
                fmt_f64(a.final_stress().unwrap_or(f64::NAN)),
                fmt_f64(b.final_stress().unwrap_or(f64::NAN)),
                fmt_f64(a.elapsed()),
            ])?;
        }
        w.flush()?;
        written.push(path);
    }

    for (sweep, codes) in &out.snapshots {
        let path = dir.join("snapshots").join(format!("embedding-sweep{sweep}.csv"));
        let header: Vec<String> = (0..codes.cols()).map(|j| format!("dim{j}")).collect();
        save_matrix_csv(&path, codes, Some(&header))?;
        written.push(path);
    }
    if !out.snapshots.is_empty() {
        let pc = swiss_roll(&cfg.roll)?;
        let path = dir.join("snapshots").join("unrolled.csv");
        create_parent(&path)?;
        save_matrix_csv(&path, &unrolled_coordinates(&pc), Some(&["arc_length".into(), "height".into()]))?;
        written.push(path);
    }
    let path = dir.join("bench.json");
    save_json(&path, cfg)?;
    written.push(path);
    Ok(written)
}
