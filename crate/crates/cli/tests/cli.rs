use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mdsfeat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdsfeat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn ok(args: &[&str]) -> String {
    let out = mdsfeat(args);
    assert_eq!(
        code(&out),
        0,
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

/// Two classes of 32x32 PNGs: vertical versus horizontal stripes.
fn write_images(root: &Path, per_class: usize) -> PathBuf {
    for (class, name) in ["car", "non-car"].iter().enumerate() {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).unwrap();
        for k in 0..per_class {
            let img = image::GrayImage::from_fn(32, 32, |c, r| {
                let t = if class == 0 { c } else { r } as f64;
                let v = 0.5 + 0.4 * (t * 0.9 + k as f64).sin();
                image::Luma([(v * 255.0) as u8])
            });
            img.save(dir.join(format!("{k:02}.png"))).unwrap();
        }
    }
    root.to_path_buf()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&mdsfeat(&["--help"])), 0);
    assert_eq!(code(&mdsfeat(&["--version"])), 0);
    assert_eq!(code(&mdsfeat(&[])), 1);
    assert_eq!(code(&mdsfeat(&["fit"])), 1);
    assert_eq!(code(&mdsfeat(&["fit", "--distances", "x", "--out", "y", "--strategy", "sideways"])), 1);
}

#[test]
fn swissroll_distmat_fit_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let points = tmp.path().join("roll.csv");
    let flat = tmp.path().join("flat.csv");
    ok(&["swissroll", "--n", "120", "--seed", "3", "--out", s(&points), "--unrolled", s(&flat)]);
    let rows = csv_rows(&points);
    assert_eq!(rows[0], ["x", "y", "z"]);
    assert_eq!(rows.len(), 121);
    assert_eq!(csv_rows(&flat)[0], ["arc", "height"]);

    let dist = tmp.path().join("geo.csv");
    let cache = tmp.path().join("cache");
    ok(&["distmat", "--measure", "geodesic", "--knn", "6", "--input", s(&points), "--cache-dir", s(&cache), "--out", s(&dist)]);
    assert_eq!(csv_rows(&dist).len(), 120);
    assert!(std::fs::read_dir(&cache).unwrap().count() >= 2);
    // A second call is served from the cache and gives the same bytes.
    let again = tmp.path().join("geo2.csv");
    ok(&["distmat", "--measure", "geodesic", "--knn", "6", "--input", s(&points), "--cache-dir", s(&cache), "--out", s(&again)]);
    assert_eq!(std::fs::read(&dist).unwrap(), std::fs::read(&again).unwrap());

    let emb = tmp.path().join("emb.csv");
    let trace = tmp.path().join("trace.csv");
    let out = ok(&[
        "fit", "--distances", s(&dist), "--dims", "2", "--strategy", "largest", "--max-sweeps", "5", "--out", s(&emb), "--trace", s(&trace),
    ]);
    assert!(out.contains("raw stress"));
    let rows = csv_rows(&emb);
    assert_eq!(rows[0], ["dim0", "dim1"]);
    assert_eq!(rows.len(), 121);
    assert_eq!(csv_rows(&trace)[0], ["iteration", "raw_stress", "elapsed_seconds"]);

    let smacof = tmp.path().join("smacof.csv");
    ok(&["fit", "--distances", s(&dist), "--solver", "smacof", "--max-sweeps", "50", "--out", s(&smacof)]);
    assert_eq!(csv_rows(&smacof).len(), 121);
}

#[test]
fn euclidean_queries_encode_next_to_their_neighbors() {
    let tmp = tempfile::tempdir().unwrap();
    let train = tmp.path().join("train.csv");
    let queries = tmp.path().join("queries.csv");
    std::fs::write(&train, "a,b\n0,0\n4,0\n0,3\n4,3\n2,1\n").unwrap();
    std::fs::write(&queries, "a,b\n0,0\n4,3\n").unwrap();
    let d = tmp.path().join("d.csv");
    let cross = tmp.path().join("cross.csv");
    let emb = tmp.path().join("emb.csv");
    let codes = tmp.path().join("codes.csv");
    ok(&["distmat", "--measure", "euclidean", "--input", s(&train), "--out", s(&d)]);
    ok(&["distmat", "--measure", "euclidean", "--input", s(&train), "--queries", s(&queries), "--out", s(&cross)]);
    assert_eq!(csv_rows(&cross).len(), 2);
    assert_eq!(csv_rows(&cross)[0].len(), 5);
    ok(&["fit", "--distances", s(&d), "--dims", "2", "--tolerance", "1e-12", "--max-sweeps", "200", "--out", s(&emb)]);
    ok(&["encode", "--embedding", s(&emb), "--distances", s(&cross), "--out", s(&codes)]);

    let parse = |p: &Path| -> Vec<Vec<f64>> {
        csv_rows(p)[1..]
            .iter()
            .map(|r| r.iter().map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let (train_codes, new_codes) = (parse(&emb), parse(&codes));
    for (q, anchor) in [(0, 0), (1, 3)] {
        let gap: f64 = new_codes[q]
            .iter()
            .zip(&train_codes[anchor])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(gap < 1e-4, "query {q} lands {gap} from its twin");
    }
}

#[test]
fn image_measures_and_pyramids() {
    let tmp = tempfile::tempdir().unwrap();
    let images = write_images(&tmp.path().join("images"), 4);
    let vocab = tmp.path().join("vocab.csv");
    ok(&["spm", "vocab", "--images", s(&images), "--vocab-size", "6", "--seed", "2", "--out", s(&vocab)]);
    assert_eq!(csv_rows(&vocab).len(), 6);
    assert!(tmp.path().join("vocab.json").exists());

    let vectors = tmp.path().join("vectors.csv");
    let out = ok(&["spm", "vectors", "--images", s(&images), "--vocab", s(&vocab), "--levels", "1", "--out", s(&vectors)]);
    assert!(out.contains("length 30"), "{out}");
    assert_eq!(csv_rows(&vectors).len(), 9);

    for measure in ["spm1", "spm2"] {
        let d = tmp.path().join(format!("{measure}.csv"));
        ok(&[
            "distmat", "--measure", measure, "--input", s(&vectors), "--vocab-size", "6", "--levels", "1", "--epsilon", "0.001", "--out", s(&d),
        ]);
        assert_eq!(csv_rows(&d).len(), 8);
    }
    let d = tmp.path().join("imed.csv");
    ok(&["distmat", "--measure", "imed", "--input", s(&images), "--sigma", "1", "--out", s(&d)]);
    assert_eq!(csv_rows(&d).len(), 8);
}

#[test]
fn eval_writes_a_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let images = write_images(&tmp.path().join("images"), 6);
    let runs = tmp.path().join("runs");
    let out = ok(&[
        "eval", "--dataset", s(&images), "--layout", "class-per-directory", "--methods", "pca,imed-mds", "--dims", "1-2", "--folds", "3",
        "--seed", "4", "--out", s(&runs),
    ]);
    assert!(out.contains("imed-mds"));
    let dirs: Vec<_> = std::fs::read_dir(&runs).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1);
    let run = &dirs[0];
    for file in ["manifest.json", "results.csv", "summary.csv", "folds.csv", "predictions.csv"] {
        assert!(run.join(file).exists(), "missing {file}");
    }
    // 2 methods x 2 lengths x 3 folds, plus the header.
    assert_eq!(csv_rows(&run.join("results.csv")).len(), 13);

    let manifest = run.join("manifest.json");
    ok(&["eval", "--manifest", s(&manifest)]);
    assert_eq!(std::fs::read_dir(&runs).unwrap().count(), 2);
}

#[test]
fn bench_writes_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    let stdout = ok(&["bench", "--n", "80", "--knn", "6", "--repeats", "2", "--sweeps", "3", "--seed", "1", "--out", s(&out)]);
    assert!(stdout.contains("ilma-random"));
    assert!(stdout.contains("smacof"));
    let rows = csv_rows(&out.join("stress_per_iteration.csv"));
    // Three strategies, sweeps 0..=3.
    assert_eq!(rows.len(), 1 + 3 * 4);
    assert!(out.join("stress_vs_time.csv").exists());
    assert!(out.join("comparison.csv").exists());
}

#[test]
fn exit_codes_follow_failure_class() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.csv");
    let out = tmp.path().join("o.csv");
    assert_eq!(code(&mdsfeat(&["fit", "--distances", s(&missing), "--out", s(&out)])), 2);

    let asym = tmp.path().join("asym.csv");
    std::fs::write(&asym, "0,1\n2,0\n").unwrap();
    assert_eq!(code(&mdsfeat(&["fit", "--distances", s(&asym), "--out", s(&out)])), 2);

    let good = tmp.path().join("good.csv");
    std::fs::write(&good, "0,1\n1,0\n").unwrap();
    assert_eq!(code(&mdsfeat(&["fit", "--distances", s(&good), "--dims", "0", "--out", s(&out)])), 1);

    let points = tmp.path().join("p.csv");
    std::fs::write(&points, "x\n0\n1\n2\n").unwrap();
    let res = mdsfeat(&["distmat", "--measure", "geodesic", "--input", s(&points), "--queries", s(&points), "--out", s(&out)]);
    assert_eq!(code(&res), 1);

    let huge = tmp.path().join("huge.csv");
    std::fs::write(&huge, "0,1e308,1e308\n1e308,0,1e308\n1e308,1e308,0\n").unwrap();
    let res = mdsfeat(&["fit", "--distances", s(&huge), "--out", s(&out)]);
    assert_eq!(code(&res), 3);
    let msg = String::from_utf8_lossy(&res.stderr);
    assert_eq!(msg.matches("not finite").count(), 1, "{msg}");
}
