//! Baseline feature extractors (PCA, kernel PCA), feature normalization, an
//! RBF-kernel SVM and the cross-validation harness.

mod eval;
mod kpca;
mod pca;
mod svm;
mod zscore;

pub use eval::{
    cross_validate, fold_split, stratified_folds, Confusion, FeatureMethod, FoldRecord, FoldReport, MeanMetrics,
};
pub use kpca::{center_kernel, gaussian_sigma_auto, kernel_matrix, kpca_fit, Kernel, KpcaModel};
pub use pca::{pca_fit, PcaModel};
pub use svm::{svm_train, SvmModel, SvmOptions};
pub use zscore::{zscore_fit_apply, ZScore};
