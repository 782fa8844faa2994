//! Pairwise distances between images and points, and batch construction of
//! distance matrices.

mod build;
mod cache;
mod geodesic;
mod gray;
mod imed;
mod spm_distance;

pub use build::{build_cross_distances, build_distance_matrix};
pub use cache::{CacheKey, DistanceCache};
pub use geodesic::{geodesic_distance_matrix, knn_graph, PointCloud};
pub use gray::{euclidean_distance, GrayImage};
pub use imed::{
    imed, imed_with_weights, psd_sqrt, standardizing_transform, standardizing_transform_approx,
    standardizing_transform_with_weights, weight_matrix, Imed, ImedParams,
};
pub use spm_distance::{spm1_distance, spm2_distance};
