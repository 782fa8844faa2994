mod common;

use mdsfeat::experiment::{pyramid_dimension, rerun_manifest, run_experiment_on, Manifest};
use mdsfeat::{ExperimentConfig, Method, SpmParams};

fn small_config(out: &std::path::Path, methods: Vec<Method>) -> ExperimentConfig {
    ExperimentConfig {
        methods,
        m_range: vec![1, 2, 3],
        seed: 17,
        spm: SpmParams {
            vocab_size: 12,
            ..SpmParams::default()
        },
        out: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn pca_over_twenty_lengths_gives_one_hundred_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let data = common::striped_dataset(10, 24, 24, 1);
    let cfg = ExperimentConfig {
        out: tmp.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let run = run_experiment_on(&cfg, &data).unwrap();
    assert_eq!(run.report.records.len(), 100);
    let text = std::fs::read_to_string(run.dir.join("results.csv")).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("method,m,fold,precision,recall,accuracy"));
}

#[test]
fn every_method_runs_and_separates_stripes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = common::striped_dataset(12, 32, 48, 2);
    let methods = vec![
        Method::Pca,
        Method::KpcaGaussian,
        Method::KpcaPoly,
        Method::ImedMds,
        Method::Spm1Mds,
        Method::Spm2Mds,
        Method::PyramidPca,
    ];
    let run = run_experiment_on(&small_config(tmp.path(), methods.clone()), &data).unwrap();
    assert!(run.manifest.failures.is_empty(), "{:?}", run.manifest.failures);
    let means = run.report.means();
    for method in [Method::Spm1Mds, Method::Spm2Mds, Method::PyramidPca] {
        let acc = means
            .iter()
            .find(|r| r.method == method.name() && r.m == 3)
            .unwrap()
            .accuracy;
        assert!(acc > 0.9, "{} accuracy {acc}", method.name());
    }
    for method in methods.iter().filter(|m| m.is_mds()) {
        assert!(run.dir.join(format!("traces/{}-m1-fold0.csv", method.name())).exists());
    }
    let scatter = std::fs::read_to_string(run.dir.join("features/scatter-spm1-mds.csv")).unwrap();
    assert_eq!(scatter.lines().count(), data.len() + 1);
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let data = common::striped_dataset(8, 32, 32, 3);
    let methods = vec![Method::Pca, Method::ImedMds, Method::Spm1Mds];
    let a = run_experiment_on(&small_config(&tmp.path().join("a"), methods.clone()), &data).unwrap();
    let b = run_experiment_on(&small_config(&tmp.path().join("b"), methods), &data).unwrap();
    let files = common::files_under(&a.dir);
    assert_eq!(files, common::files_under(&b.dir));
    for rel in files {
        let name = rel.to_string_lossy();
        // Traces carry wall-clock timestamps and the manifest carries run times.
        if name.starts_with("traces") || name == "manifest.json" {
            continue;
        }
        assert_eq!(
            std::fs::read(a.dir.join(&rel)).unwrap(),
            std::fs::read(b.dir.join(&rel)).unwrap(),
            "{name} differs"
        );
    }
    assert_eq!(a.manifest.artifacts["results.csv"], b.manifest.artifacts["results.csv"]);
}

#[test]
fn manifest_round_trips_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("data");
    let data = common::striped_dataset(6, 24, 24, 4);
    for (img, path) in data.images.iter().zip(&data.paths) {
        let file = root.join(path).with_extension("png");
        std::fs::create_dir_all(file.parent().unwrap()).unwrap();
        let bytes: Vec<u8> = img.pixels().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        image::GrayImage::from_raw(img.width() as u32, img.height() as u32, bytes)
            .unwrap()
            .save(&file)
            .unwrap();
    }
    let mut cfg = small_config(&tmp.path().join("runs"), vec![Method::Pca, Method::KpcaGaussian]);
    cfg.dataset.root = Some(root);
    cfg.dataset.layout = mdsfeat::datasets::Layout::ClassPerDirectory;
    let first = mdsfeat::experiment::run_experiment(&cfg).unwrap();
    let manifest = Manifest::load(&first.dir.join("manifest.json")).unwrap();
    assert_eq!(manifest, first.manifest);
    assert_eq!(manifest.dataset.class_counts, vec![6, 6]);
    assert_eq!(manifest.dataset.convention, "class-per-directory");

    let second = rerun_manifest(&first.dir.join("manifest.json")).unwrap();
    assert_ne!(first.dir, second.dir);
    assert_eq!(second.manifest.config, manifest.config);
    assert_eq!(second.manifest.artifacts["results.csv"], manifest.artifacts["results.csv"]);
}

#[test]
fn manifest_records_pyramid_dimension() {
    let cfg = ExperimentConfig {
        methods: vec![Method::Spm1Mds],
        ..ExperimentConfig::default()
    };
    assert_eq!(pyramid_dimension(&cfg), Some(4200));
    let pca = ExperimentConfig::default();
    assert_eq!(pyramid_dimension(&pca), None);
}
