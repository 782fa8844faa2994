use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datasets::Layout;
use crate::error::{Error, Result};
use crate::io::sha256_hex;
use crate::mds::{IlmaOptions, InitStrategy};
use crate::spm::SpmParams;

/// Feature extraction pipelines compared by the evaluation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// PCA on raw pixels.
    Pca,
    /// Kernel PCA on raw pixels with a Gaussian kernel.
    KpcaGaussian,
    /// Kernel PCA on raw pixels with a cubic polynomial kernel.
    KpcaPoly,
    /// MDS codes of the IMED distance matrix.
    ImedMds,
    /// MDS codes of `1 - K` over pyramid match similarities.
    Spm1Mds,
    /// MDS codes of `-ln((1 - ε) K + ε)`.
    Spm2Mds,
    /// PCA on spatial pyramid vectors.
    PyramidPca,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Pca,
        Method::KpcaGaussian,
        Method::KpcaPoly,
        Method::ImedMds,
        Method::Spm1Mds,
        Method::Spm2Mds,
        Method::PyramidPca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::KpcaGaussian => "kpca-gaussian",
            Method::KpcaPoly => "kpca-poly",
            Method::ImedMds => "imed-mds",
            Method::Spm1Mds => "spm1-mds",
            Method::Spm2Mds => "spm2-mds",
            Method::PyramidPca => "pyramid-pca",
        }
    }

    pub fn is_mds(self) -> bool {
        matches!(self, Method::ImedMds | Method::Spm1Mds | Method::Spm2Mds)
    }

    pub fn uses_pyramids(self) -> bool {
        matches!(self, Method::Spm1Mds | Method::Spm2Mds | Method::PyramidPca)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub root: Option<PathBuf>,
    pub layout: Layout,
    /// Class treated as positive when scoring.
    pub positive_class: String,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            root: None,
            layout: Layout::Uiuc,
            positive_class: "car".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IlmaConfig {
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub strategy: InitStrategy,
}

impl Default for IlmaConfig {
    fn default() -> Self {
        let d = IlmaOptions::default();
        Self {
            max_sweeps: d.max_sweeps,
            tolerance: d.tolerance,
            strategy: d.strategy,
        }
    }
}

impl IlmaConfig {
    pub fn options(&self, seed: u64) -> IlmaOptions {
        IlmaOptions {
            max_sweeps: self.max_sweeps,
            tolerance: self.tolerance,
            strategy: self.strategy,
            seed,
            ..IlmaOptions::default()
        }
    }
}

/// One evaluation run, stored as a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub m_range: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub dataset: DatasetConfig,
    /// Gaussian width of the IMED weights.
    pub imed_sigma: f64,
    /// Kernel PCA width; chosen from the training fold when absent.
    pub kpca_sigma: Option<f64>,
    pub poly_degree: u32,
    pub epsilon: f64,
    pub spm: SpmParams,
    pub ilma: IlmaConfig,
    pub cache_dir: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Pca],
            m_range: (1..=20).collect(),
            folds: 5,
            seed: 0,
            dataset: DatasetConfig::default(),
            imed_sigma: 1.0,
            kpca_sigma: None,
            poly_degree: 3,
            epsilon: 0.001,
            spm: SpmParams::default(),
            ilma: IlmaConfig::default(),
            cache_dir: None,
            out: PathBuf::from("runs"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e).context(format!("reading {}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Json(e).context(format!("parsing {}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.m_range.is_empty() || self.m_range.contains(&0) {
            return bad(format!("feature lengths must be positive, got {:?}", self.m_range));
        }
        if self.folds < 2 {
            return bad(format!("need at least 2 folds, got {}", self.folds));
        }
        if !(self.imed_sigma > 0.0) {
            return bad(format!("IMED sigma must be positive, got {}", self.imed_sigma));
        }
        if let Some(s) = self.kpca_sigma {
            if !(s > 0.0) {
                return bad(format!("kernel PCA sigma must be positive, got {s}"));
            }
        }
        if self.poly_degree == 0 {
            return bad("polynomial degree must be positive".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        self.spm.validate()?;
        self.ilma.options(0).validate()
    }

    /// Short content hash used to name run directories.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        sha256_hex(json.as_bytes())[..12].to_owned()
    }

    pub fn max_m(&self) -> usize {
        self.m_range.iter().copied().max().unwrap_or(0)
    }
}
