//! Fixed-length feature vectors from pairwise distances.
//!
//! Items are embedded into `R^m` by metric multidimensional scaling of a
//! distance matrix, solved point by point with Levenberg-Marquardt. The crate
//! also provides the distances used on images (Euclidean, IMED, spatial
//! pyramid matching), geodesic distances on point clouds, baseline feature
//! extractors, an SVM and the evaluation harness.

pub mod baselines;
pub mod datasets;
pub mod distances;
pub mod error;
pub mod experiment;
pub mod io;
pub mod kmeans;
pub mod linalg;
pub mod lm;
pub mod mds;
pub mod rng;
pub mod spm;

pub use baselines::{FoldReport, KpcaModel, PcaModel, SvmModel};
pub use datasets::{LabeledImageSet, SwissRollSpec};
pub use distances::{GrayImage, ImedParams, PointCloud};
pub use error::{Error, ErrorClass, Result};
pub use experiment::{BenchConfig, ExperimentConfig, Method};
pub use linalg::{Matrix, SymEigen};
pub use lm::{LeastSquaresProblem, LmOptions, LmResult};
pub use mds::{DistanceMatrix, Embedding, IlmaOptions, InitStrategy, RunTrace, SmacofOptions};
pub use rng::Rng;
pub use spm::{LocalDescriptor, PyramidVector, SpmParams, Vocabulary};
