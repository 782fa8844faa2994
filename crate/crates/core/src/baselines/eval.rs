use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::svm::{svm_train, SvmOptions};
use super::zscore::zscore_fit_apply;
use crate::error::{Error, Result};
use crate::io::{create_parent, fmt_f64};
use crate::linalg::Matrix;
use crate::rng::Rng;

/// Binary confusion counts with `+1` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(actual: &[i8], predicted: &[i8]) -> Self {
        let mut c = Confusion::default();
        for (&a, &p) in actual.iter().zip(predicted) {
            match (a > 0, p > 0) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    /// Zero when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// Zero when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Seeded class-stratified fold index for every item. Each class is shuffled
/// and dealt round-robin, so fold sizes per class differ by at most one.
pub fn stratified_folds(labels: &[i8], folds: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    let mut out = vec![0; labels.len()];
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::InvalidArgument(format!(
                "class {class} has {} items, fewer than {folds} folds",
                idx.len()
            )));
        }
        rng.shuffle(&mut idx);
        for (k, &i) in idx.iter().enumerate() {
            out[i] = k % folds;
        }
    }
    Ok(out)
}

/// Training and test indices of `fold`, each in ascending order.
pub fn fold_split(assignment: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..assignment.len()).partition(|&i| assignment[i] != fold)
}

/// Produces train/test feature matrices for one fold and feature length.
pub trait FeatureMethod {
    fn name(&self) -> &str;

    /// Rows follow the order of `train` and `test`.
    fn features(&mut self, fold: usize, train: &[usize], test: &[usize], m: usize) -> Result<(Matrix, Matrix)>;
}

/// Outcome of one (method, m, fold) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldRecord {
    pub method: String,
    pub m: usize,
    pub fold: usize,
    /// `None` when the feature method failed.
    pub confusion: Option<Confusion>,
    pub error: Option<String>,
    /// `(item index, actual, predicted)` for the test items.
    pub predictions: Vec<(usize, i8, i8)>,
}

impl FoldRecord {
    pub fn precision(&self) -> f64 {
        self.confusion.map_or(f64::NAN, |c| c.precision())
    }

    pub fn recall(&self) -> f64 {
        self.confusion.map_or(f64::NAN, |c| c.recall())
    }

    pub fn accuracy(&self) -> f64 {
        self.confusion.map_or(f64::NAN, |c| c.accuracy())
    }
}

/// Per-fold results of one sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FoldReport {
    pub records: Vec<FoldRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanMetrics {
    pub method: String,
    pub m: usize,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub failed_folds: usize,
}

impl FoldReport {
    /// Means over successful folds, one row per (method, m) in first-seen order.
    pub fn means(&self) -> Vec<MeanMetrics> {
        let mut keys: Vec<(String, usize)> = Vec::new();
        for r in &self.records {
            let key = (r.method.clone(), r.m);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(method, m)| {
                let cell: Vec<&FoldRecord> =
                    self.records.iter().filter(|r| r.method == method && r.m == m).collect();
                let ok: Vec<&&FoldRecord> = cell.iter().filter(|r| r.confusion.is_some()).collect();
                let mean = |f: &dyn Fn(&FoldRecord) -> f64| {
                    if ok.is_empty() {
                        f64::NAN
                    } else {
                        ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                    }
                };
                MeanMetrics {
                    precision: mean(&|r| r.precision()),
                    recall: mean(&|r| r.recall()),
                    accuracy: mean(&|r| r.accuracy()),
                    failed_folds: cell.len() - ok.len(),
                    method,
                    m,
                }
            })
            .collect()
    }

    pub fn mean_accuracy(&self, method: &str, m: usize) -> Option<f64> {
        self.means()
            .into_iter()
            .find(|s| s.method == method && s.m == m)
            .map(|s| s.accuracy)
    }

    /// `method,m,fold,precision,recall,accuracy`; failed folds have `NaN` metrics.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "m", "fold", "precision", "recall", "accuracy"])?;
        for r in &self.records {
            w.write_record([
                r.method.clone(),
                r.m.to_string(),
                r.fold.to_string(),
                fmt_f64(r.precision()),
                fmt_f64(r.recall()),
                fmt_f64(r.accuracy()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        create_parent(path)?;
        self.write_csv(std::fs::File::create(path)?)
    }

    /// `method,m,fold,index,actual,predicted`.
    pub fn save_predictions_csv(&self, path: &Path) -> Result<()> {
        create_parent(path)?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["method", "m", "fold", "index", "actual", "predicted"])?;
        for r in &self.records {
            for &(i, a, p) in &r.predictions {
                w.write_record([
                    r.method.clone(),
                    r.m.to_string(),
                    r.fold.to_string(),
                    i.to_string(),
                    a.to_string(),
                    p.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_means_csv(&self, path: &Path) -> Result<()> {
        create_parent(path)?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["method", "m", "precision", "recall", "accuracy", "failed_folds"])?;
        for s in self.means() {
            w.write_record([
                s.method,
                s.m.to_string(),
                fmt_f64(s.precision),
                fmt_f64(s.recall),
                fmt_f64(s.accuracy),
                s.failed_folds.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// For each `m` and fold: build features, z-score them with training
/// statistics, train an RBF SVM with `C = 1` and `γ = m`, and score the
/// held-out items. Feature failures are recorded rather than propagated.
pub fn cross_validate(
    method: &mut dyn FeatureMethod,
    labels: &[i8],
    folds: &[usize],
    m_range: &[usize],
) -> Result<FoldReport> {
    if labels.len() != folds.len() {
        return Err(Error::Dimension(format!("{} labels but {} fold indices", labels.len(), folds.len())));
    }
    let n_folds = folds.iter().max().map_or(0, |f| f + 1);
    let mut report = FoldReport::default();
    for &m in m_range {
        for fold in 0..n_folds {
            let (train, test) = fold_split(folds, fold);
            let outcome = evaluate_fold(method, labels, fold, &train, &test, m);
            let record = match outcome {
                Ok(predictions) => {
                    let actual: Vec<i8> = predictions.iter().map(|p| p.1).collect();
                    let predicted: Vec<i8> = predictions.iter().map(|p| p.2).collect();
                    FoldRecord {
                        method: method.name().to_owned(),
                        m,
                        fold,
                        confusion: Some(Confusion::from_predictions(&actual, &predicted)),
                        error: None,
                        predictions,
                    }
                }
                Err(e) => {
                    log::warn!("{} m={m} fold={fold} failed: {e}", method.name());
                    FoldRecord {
                        method: method.name().to_owned(),
                        m,
                        fold,
                        confusion: None,
                        error: Some(e.to_string()),
                        predictions: Vec::new(),
                    }
                }
            };
            report.records.push(record);
        }
    }
    Ok(report)
}

fn evaluate_fold(
    method: &mut dyn FeatureMethod,
    labels: &[i8],
    fold: usize,
    train: &[usize],
    test: &[usize],
    m: usize,
) -> Result<Vec<(usize, i8, i8)>> {
    let (tr, te) = method.features(fold, train, test, m)?;
    if tr.rows() != train.len() || te.rows() != test.len() || tr.cols() != te.cols() {
        return Err(Error::Dimension(format!(
            "feature method returned {}x{} / {}x{} for {} / {} items",
            tr.rows(),
            tr.cols(),
            te.rows(),
            te.cols(),
            train.len(),
            test.len()
        )));
    }
    let (tr, te, _) = zscore_fit_apply(&tr, &[&te])?;
    let y: Vec<i8> = train.iter().map(|&i| labels[i]).collect();
    let model = svm_train(&tr, &y, &SvmOptions::new(tr.cols() as f64))?;
    let predicted = model.predict_all(&te[0]);
    Ok(test.iter().zip(predicted).map(|(&i, p)| (i, labels[i], p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_identities() {
        let actual = [1, 1, -1, -1, 1];
        let c = Confusion::from_predictions(&actual, &actual);
        assert_eq!((c.precision(), c.recall(), c.accuracy()), (1.0, 1.0, 1.0));

        let mut actual = vec![1i8; 110];
        actual.extend(vec![-1i8; 100]);
        let c = Confusion::from_predictions(&actual, &vec![1i8; 210]);
        assert!((c.precision() - 110.0 / 210.0).abs() < 1e-15);
        assert_eq!(c.recall(), 1.0);

        let c = Confusion::from_predictions(&actual, &vec![-1i8; 210]);
        assert_eq!(c.precision(), 0.0);
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let mut labels = vec![1i8; 550];
        labels.extend(vec![-1i8; 500]);
        let folds = stratified_folds(&labels, 5, &mut Rng::new(4)).unwrap();
        for f in 0..5 {
            let pos = (0..1050).filter(|&i| folds[i] == f && labels[i] == 1).count();
            let neg = (0..1050).filter(|&i| folds[i] == f && labels[i] == -1).count();
            assert_eq!((pos, neg), (110, 100));
        }
        assert_eq!(folds, stratified_folds(&labels, 5, &mut Rng::new(4)).unwrap());
    }

    struct Identity(Matrix);

    impl FeatureMethod for Identity {
        fn name(&self) -> &str {
            "identity"
        }

        fn features(&mut self, _: usize, train: &[usize], test: &[usize], m: usize) -> Result<(Matrix, Matrix)> {
            if m > self.0.cols() {
                return Err(Error::InvalidArgument("too many dims".into()));
            }
            let cols = |idx: &[usize]| Matrix::from_fn(idx.len(), m, |i, j| self.0[(idx[i], j)]);
            Ok((cols(train), cols(test)))
        }
    }

    #[test]
    fn harness_scores_separable_data_and_records_failures() {
        let mut rng = Rng::new(8);
        let n = 60;
        let labels: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let data = Matrix::from_fn(n, 2, |i, j| if j == 0 { 3.0 * labels[i] as f64 } else { 0.0 } + 0.3 * rng.normal());
        let folds = stratified_folds(&labels, 5, &mut Rng::new(1)).unwrap();
        let report = cross_validate(&mut Identity(data), &labels, &folds, &[1, 2, 3]).unwrap();
        assert_eq!(report.records.len(), 15);
        let means = report.means();
        assert_eq!(means[0].accuracy, 1.0);
        assert_eq!(means[2].failed_folds, 5);
        assert!(means[2].accuracy.is_nan());
        for r in report.records.iter().filter(|r| r.confusion.is_some()) {
            let correct = r.predictions.iter().filter(|p| p.1 == p.2).count();
            assert_eq!(r.accuracy(), correct as f64 / r.predictions.len() as f64);
        }
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,m,fold,precision,recall,accuracy\n"));
        assert_eq!(text.lines().count(), 16);
    }
}
