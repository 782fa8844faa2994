use std::path::Path;

use anyhow::{Context, Result};
use mdsfeat::datasets::{load_image_dataset, swiss_roll, unrolled_coordinates, Layout};
use mdsfeat::distances::{
    build_cross_distances, build_distance_matrix, euclidean_distance, geodesic_distance_matrix, spm1_distance,
    spm2_distance, CacheKey, DistanceCache, Imed,
};
use mdsfeat::experiment::{bench_swissroll, rerun_manifest, run_experiment, write_bench_artifacts};
use mdsfeat::io::{load_matrix_csv, save_matrix_csv, sha256_file};
use mdsfeat::linalg::euclidean;
use mdsfeat::mds::{encode_new, ilma_fit, smacof_fit};
use mdsfeat::spm::{load_pyramid_vectors, pyramid_match_similarity, pyramid_vectors, save_pyramid_vectors, spm_vocabulary};
use mdsfeat::spm::{PyramidVector, VocabularyMeta};
use mdsfeat::{
    BenchConfig, DistanceMatrix, Embedding, ExperimentConfig, GrayImage, IlmaOptions, ImedParams, LmOptions,
    Matrix, PointCloud, Rng, SmacofOptions, SpmParams, SwissRollSpec, Vocabulary,
};
use serde_json::json;

use crate::{
    BenchArgs, DistmatArgs, EncodeArgs, EvalArgs, FitArgs, Measure, Solver, SwissrollArgs, UsageError, VectorsArgs,
    VocabArgs,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn swissroll(a: SwissrollArgs) -> Result<()> {
    let pc = swiss_roll(&SwissRollSpec {
        n: a.n,
        noise: a.noise,
        seed: a.seed,
    })?;
    let header = ["x", "y", "z"].map(String::from);
    save_matrix_csv(&a.out, &pc.points, Some(&header))?;
    if let Some(path) = a.unrolled {
        save_matrix_csv(&path, &unrolled_coordinates(&pc), Some(&["arc".into(), "height".into()]))?;
    }
    println!("wrote {} points to {}", pc.len(), a.out.display());
    Ok(())
}

fn load_points(path: &Path) -> Result<PointCloud> {
    let (_, m) = load_matrix_csv(path, true).with_context(|| format!("reading points from {}", path.display()))?;
    Ok(PointCloud::new(m)?)
}

fn load_images(dir: &Path, layout: Layout) -> Result<Vec<GrayImage>> {
    Ok(load_image_dataset(dir, layout)?.images)
}

fn load_vectors(path: &Path, a: &DistmatArgs) -> Result<Vec<PyramidVector>> {
    Ok(load_pyramid_vectors(path, a.vocab_size, a.levels)?)
}

fn spm_measure(measure: Measure, epsilon: f64) -> impl Fn(&PyramidVector, &PyramidVector) -> mdsfeat::Result<f64> + Sync {
    move |x, y| {
        let k = pyramid_match_similarity(x, y)?;
        match measure {
            Measure::Spm1 => spm1_distance(k),
            _ => spm2_distance(k, epsilon),
        }
    }
}

fn transformed(images: &[GrayImage], sigma: f64) -> Result<Vec<GrayImage>> {
    let (h, w) = images.first().map(GrayImage::dims).ok_or_else(|| usage("no images"))?;
    let imed = Imed::new(h, w, ImedParams::new(sigma)?)?;
    Ok(images.iter().map(|img| imed.transform(img)).collect::<mdsfeat::Result<_>>()?)
}

fn square(a: &DistmatArgs) -> Result<DistanceMatrix> {
    Ok(match a.measure {
        Measure::Euclidean => {
            let pc = load_points(&a.input)?;
            DistanceMatrix::euclidean(&pc.points)
        }
        Measure::Geodesic => geodesic_distance_matrix(&load_points(&a.input)?, a.knn)?,
        Measure::Imed => {
            let st = transformed(&load_images(&a.input, a.layout)?, a.sigma)?;
            build_distance_matrix(&st, euclidean_distance)?
        }
        Measure::Spm1 | Measure::Spm2 => {
            build_distance_matrix(&load_vectors(&a.input, a)?, spm_measure(a.measure, a.epsilon))?
        }
    })
}

fn cross(a: &DistmatArgs, queries: &Path) -> Result<Matrix> {
    Ok(match a.measure {
        Measure::Euclidean => {
            let (q, x) = (load_points(queries)?, load_points(&a.input)?);
            let (qr, xr) = (q.points.to_rows(), x.points.to_rows());
            build_cross_distances(&qr, &xr, |u, v| Ok(euclidean(u, v)))?
        }
        Measure::Geodesic => return Err(usage("geodesic distances have no query mode")),
        Measure::Imed => {
            let mut images = load_images(&a.input, a.layout)?;
            let n = images.len();
            images.extend(load_images(queries, a.layout)?);
            let mut st = transformed(&images, a.sigma)?;
            let q = st.split_off(n);
            build_cross_distances(&q, &st, euclidean_distance)?
        }
        Measure::Spm1 | Measure::Spm2 => build_cross_distances(
            &load_vectors(queries, a)?,
            &load_vectors(&a.input, a)?,
            spm_measure(a.measure, a.epsilon),
        )?,
    })
}

pub fn distmat(a: DistmatArgs) -> Result<()> {
    if let Some(q) = &a.queries {
        let m = cross(&a, q)?;
        save_matrix_csv(&a.out, &m, None)?;
        println!("wrote {}x{} distances to {}", m.rows(), m.cols(), a.out.display());
        return Ok(());
    }
    let d = match &a.cache_dir {
        Some(dir) => {
            let name = format!("{:?}", a.measure).to_lowercase();
            let input_hash = if a.input.is_dir() {
                load_image_dataset(&a.input, a.layout)?.content_hash()
            } else {
                sha256_file(&a.input)?
            };
            let params = json!({
                "knn": a.knn, "sigma": a.sigma, "epsilon": a.epsilon,
                "vocab_size": a.vocab_size, "levels": a.levels,
            });
            let key = CacheKey::new(input_hash, name, params);
            let m = DistanceCache::new(dir).get_or_compute(&key, || Ok(square(&a).map_err(to_core)?.into_matrix()))?;
            DistanceMatrix::new(m)?
        }
        None => square(&a)?,
    };
    d.save_csv(&a.out)?;
    println!("wrote {0}x{0} distances to {1}", d.len(), a.out.display());
    Ok(())
}

/// Keeps a core error intact when it passes through a cache callback.
fn to_core(e: anyhow::Error) -> mdsfeat::Error {
    match e.downcast::<mdsfeat::Error>() {
        Ok(core) => core,
        Err(other) => mdsfeat::Error::InvalidArgument(format!("{other:#}")),
    }
}

pub fn fit(a: FitArgs) -> Result<()> {
    let d = DistanceMatrix::load_csv(&a.distances)?;
    let (emb, trace) = match a.solver {
        Solver::Ilma => ilma_fit(
            &d,
            a.dims,
            &IlmaOptions {
                max_sweeps: a.max_sweeps,
                tolerance: a.tolerance,
                strategy: a.strategy,
                seed: a.seed,
                lm: LmOptions::default(),
            },
        )?,
        Solver::Smacof => smacof_fit(
            &d,
            a.dims,
            &SmacofOptions {
                max_iter: a.max_sweeps,
                tolerance: a.tolerance,
                seed: a.seed,
                time_budget: None,
            },
        )?,
    };
    emb.save_csv(&a.out)?;
    if let Some(path) = &a.trace {
        trace.save_csv(path)?;
    }
    println!(
        "raw stress {:.6e}, stress-1 {:.6e}, {} iterations",
        emb.fit_raw_stress,
        emb.fit_stress1,
        trace.len().saturating_sub(1)
    );
    Ok(())
}

pub fn encode(a: EncodeArgs) -> Result<()> {
    let train = Embedding::load_csv(&a.embedding)?;
    let (_, dists) = load_matrix_csv(&a.distances, false)?;
    let lm = LmOptions::default();
    let mut codes = Matrix::zeros(dists.rows(), train.dimension());
    for i in 0..dists.rows() {
        let code = encode_new(&train, dists.row(i), &lm).with_context(|| format!("encoding row {}", i + 1))?;
        codes.row_mut(i).copy_from_slice(&code);
    }
    Embedding::from_codes(codes).save_csv(&a.out)?;
    println!("encoded {} items into {}", dists.rows(), a.out.display());
    Ok(())
}

pub fn spm_vocab(a: VocabArgs) -> Result<()> {
    let data = load_image_dataset(&a.source.images, a.source.layout)?;
    let params = SpmParams {
        vocab_size: a.vocab_size,
        step: a.source.step,
        patch: a.source.patch,
        ..SpmParams::default()
    };
    let vocab = spm_vocabulary(&data.images, &params, &mut Rng::derive(a.seed, "vocabulary"))?;
    let meta = VocabularyMeta {
        size: vocab.size(),
        patch: params.patch,
        step: params.step,
        seed: a.seed,
        training_hash: data.content_hash(),
    };
    vocab.save(&a.out, &meta)?;
    println!("wrote {} visual words to {}", vocab.size(), a.out.display());
    Ok(())
}

pub fn spm_vectors(a: VectorsArgs) -> Result<()> {
    let (vocab, meta) = Vocabulary::load(&a.vocab)?;
    if let Some(meta) = &meta {
        if (meta.step, meta.patch) != (a.source.step, a.source.patch) {
            log::warn!(
                "vocabulary was built with step {} and patch {}, extracting with step {} and patch {}",
                meta.step,
                meta.patch,
                a.source.step,
                a.source.patch
            );
        }
    }
    let data = load_image_dataset(&a.source.images, a.source.layout)?;
    let params = SpmParams {
        vocab_size: vocab.size(),
        levels: a.levels,
        step: a.source.step,
        patch: a.source.patch,
    };
    let vectors = pyramid_vectors(&data.images, &vocab, &params)?;
    save_pyramid_vectors(&a.out, &vectors)?;
    println!("wrote {} vectors of length {} to {}", vectors.len(), params.vector_len(), a.out.display());
    Ok(())
}

/// `1-20`, `5` or `1,2,5,10`.
fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let bad = || usage(format!("cannot parse feature lengths {s:?}"));
    if let Some((lo, hi)) = s.split_once('-') {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let outcome = if let Some(path) = &a.manifest {
        rerun_manifest(path)?
    } else {
        let mut cfg = match &a.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = a.dataset {
            cfg.dataset.root = Some(v);
        }
        if let Some(v) = a.layout {
            cfg.dataset.layout = v;
        }
        if let Some(v) = a.methods {
            cfg.methods = v;
        }
        if let Some(v) = &a.dims {
            cfg.m_range = parse_dims(v)?;
        }
        if let Some(v) = a.folds {
            cfg.folds = v;
        }
        if let Some(v) = a.seed {
            cfg.seed = v;
        }
        if let Some(v) = a.strategy {
            cfg.ilma.strategy = v;
        }
        if let Some(v) = a.sigma {
            cfg.kpca_sigma = Some(v);
        }
        if let Some(v) = a.imed_sigma {
            cfg.imed_sigma = v;
        }
        if let Some(v) = a.vocab_size {
            cfg.spm.vocab_size = v;
        }
        if let Some(v) = a.levels {
            cfg.spm.levels = v;
        }
        if let Some(v) = a.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = a.cache_dir {
            cfg.cache_dir = Some(v);
        }
        if let Some(v) = a.out {
            cfg.out = v;
        }
        if cfg.dataset.root.is_none() {
            return Err(usage("no dataset: pass --dataset or set dataset.root in the config"));
        }
        run_experiment(&cfg)?
    };

    println!("{:<14} {:>3} {:>9} {:>9} {:>9}", "method", "m", "precision", "recall", "accuracy");
    for r in outcome.report.means() {
        println!(
            "{:<14} {:>3} {:>9.4} {:>9.4} {:>9.4}",
            r.method, r.m, r.precision, r.recall, r.accuracy
        );
    }
    if !outcome.manifest.failures.is_empty() {
        eprintln!("{} fold(s) failed; see manifest.json", outcome.manifest.failures.len());
    }
    println!("run directory: {}", outcome.dir.display());
    Ok(())
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg: BenchConfig = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).map_err(mdsfeat::Error::from)?
        }
        None => BenchConfig::default(),
    };
    if let Some(v) = a.n {
        cfg.roll.n = v;
    }
    if let Some(v) = a.noise {
        cfg.roll.noise = v;
    }
    if let Some(v) = a.knn {
        cfg.knn = v;
    }
    if let Some(v) = a.dims {
        cfg.m = v;
    }
    if let Some(v) = a.sweeps {
        cfg.sweeps = v;
    }
    if let Some(v) = a.repeats {
        cfg.repeats = v;
    }
    if let Some(v) = a.strategy {
        cfg.strategies = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
        cfg.roll.seed = v;
    }
    if a.no_smacof {
        cfg.smacof = false;
    }
    let out = bench_swissroll(&cfg)?;
    let written = write_bench_artifacts(&a.out, &cfg, &out)?;
    for (strategy, traces) in &out.ilma {
        let mean = traces.iter().filter_map(|t| t.final_stress()).sum::<f64>() / traces.len() as f64;
        println!("ilma-{:<9} mean final raw stress {mean:.6e}", strategy.name());
    }
    if !out.smacof.is_empty() {
        let mean = out.smacof.iter().filter_map(|t| t.final_stress()).sum::<f64>() / out.smacof.len() as f64;
        println!("smacof         mean final raw stress {mean:.6e}");
    }
    println!("wrote {} files under {}", written.len(), a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_ranges_and_lists() {
        assert_eq!(parse_dims("1-4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_dims("2, 5,10").unwrap(), vec![2, 5, 10]);
        assert_eq!(parse_dims("7").unwrap(), vec![7]);
        assert!(parse_dims("5-1").is_err());
        assert!(parse_dims("a").is_err());
    }
}
