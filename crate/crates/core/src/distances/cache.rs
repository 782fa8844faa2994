use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io;
use crate::linalg::Matrix;

/// Identifies one cached matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub dataset_hash: String,
    pub measure: String,
    pub params: serde_json::Value,
}

impl CacheKey {
    pub fn new(dataset_hash: impl Into<String>, measure: impl Into<String>, params: serde_json::Value) -> Self {
        Self {
            dataset_hash: dataset_hash.into(),
            measure: measure.into(),
            params,
        }
    }

    /// Stable file stem derived from the key.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("cache key serializes");
        io::sha256_hex(json.as_bytes())[..24].to_owned()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    key: CacheKey,
    rows: usize,
    cols: usize,
    content_sha256: String,
}

/// On-disk store of distance matrices: `<digest>.csv` plus `<digest>.json`.
#[derive(Debug, Clone)]
pub struct DistanceCache {
    dir: PathBuf,
}

impl DistanceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn paths(&self, key: &CacheKey) -> (PathBuf, PathBuf) {
        let stem = key.digest();
        (self.dir.join(format!("{stem}.csv")), self.dir.join(format!("{stem}.json")))
    }

    /// Returns the cached matrix if present and its content hash checks out.
    pub fn get(&self, key: &CacheKey) -> Option<Matrix> {
        let (csv, json) = self.paths(key);
        let sidecar: Sidecar = serde_json::from_slice(&std::fs::read(json).ok()?).ok()?;
        if sidecar.key != *key {
            return None;
        }
        let bytes = std::fs::read(&csv).ok()?;
        if io::sha256_hex(&bytes) != sidecar.content_sha256 {
            log::warn!("cache entry {} failed its content check; recomputing", csv.display());
            return None;
        }
        let (_, m) = io::read_matrix_csv(bytes.as_slice(), false).ok()?;
        (m.rows() == sidecar.rows && m.cols() == sidecar.cols).then_some(m)
    }

    pub fn put(&self, key: &CacheKey, m: &Matrix) -> Result<()> {
        let (csv, json) = self.paths(key);
        io::save_matrix_csv(&csv, m, None)?;
        let sidecar = Sidecar {
            key: key.clone(),
            rows: m.rows(),
            cols: m.cols(),
            content_sha256: io::sha256_file(&csv)?,
        };
        io::save_json(&json, &sidecar)
    }

    pub fn get_or_compute(&self, key: &CacheKey, compute: impl FnOnce() -> Result<Matrix>) -> Result<Matrix> {
        if let Some(m) = self.get(key) {
            log::debug!("distance cache hit for {} ({})", key.measure, key.digest());
            return Ok(m);
        }
        let m = compute()?;
        self.put(key, &m)?;
        Ok(m)
    }
}
