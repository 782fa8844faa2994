use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::baselines::{gaussian_sigma_auto, kpca_fit, pca_fit, FeatureMethod, Kernel};
use crate::datasets::LabeledImageSet;
use crate::distances::{build_distance_matrix, euclidean_distance, CacheKey, DistanceCache, Imed, ImedParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mds::{encode_new, ilma_fit, DistanceMatrix, Embedding, RunTrace};
use crate::rng::Rng;
use crate::spm::{pyramid_matrix, pyramid_vectors, similarity_matrix, spm_vocabulary, PyramidVector};
use crate::distances::{spm1_distance, spm2_distance};

/// 2-D features of one fold, kept for scatter plots.
#[derive(Debug, Clone)]
pub struct Scatter {
    pub method: Method,
    /// `(item index, features)` for training and test items.
    pub points: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldNote {
    pub method: String,
    pub fold: usize,
    pub note: String,
}

/// State shared by all methods of one run: the data and per-fold
/// intermediate results that several methods reuse.
pub struct Workspace<'a> {
    pub config: &'a ExperimentConfig,
    pub data: &'a LabeledImageSet,
    pub dataset_hash: String,
    cache: Option<DistanceCache>,
    pixels: Option<Matrix>,
    pyramids: HashMap<usize, Vec<PyramidVector>>,
    similarities: HashMap<usize, Matrix>,
    imed: Option<Matrix>,
    pub traces: Vec<(Method, usize, usize, RunTrace)>,
    pub scatters: Vec<Scatter>,
    pub notes: Vec<FoldNote>,
}

impl<'a> Workspace<'a> {
    pub fn new(config: &'a ExperimentConfig, data: &'a LabeledImageSet) -> Self {
        Self {
            config,
            data,
            dataset_hash: data.content_hash(),
            cache: config.cache_dir.as_ref().map(DistanceCache::new),
            pixels: None,
            pyramids: HashMap::new(),
            similarities: HashMap::new(),
            imed: None,
            traces: Vec::new(),
            scatters: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn note(&mut self, method: Method, fold: usize, note: String) {
        log::info!("{method} fold {fold}: {note}");
        self.notes.push(FoldNote {
            method: method.name().into(),
            fold,
            note,
        });
    }

    fn pixels(&mut self) -> &Matrix {
        let data = self.data;
        self.pixels.get_or_insert_with(|| {
            let rows: Vec<Vec<f64>> = data.images.iter().map(|im| im.pixels().to_vec()).collect();
            Matrix::from_rows(&rows).expect("images share one size")
        })
    }

    fn cached(&self, key: CacheKey, compute: impl FnOnce() -> Result<Matrix>) -> Result<Matrix> {
        match &self.cache {
            Some(cache) => cache.get_or_compute(&key, compute),
            None => compute(),
        }
    }

    /// Pyramid vectors of every image, using a vocabulary trained on the
    /// fold's training images only.
    fn pyramids(&mut self, fold: usize, train: &[usize]) -> Result<&Vec<PyramidVector>> {
        if !self.pyramids.contains_key(&fold) {
            let params = self.config.spm;
            let train_images: Vec<_> = train.iter().map(|&i| self.data.images[i].clone()).collect();
            let mut rng = Rng::derive(self.config.seed, &format!("vocabulary/{fold}"));
            let vocab = spm_vocabulary(&train_images, &params, &mut rng)?;
            let vectors = pyramid_vectors(&self.data.images, &vocab, &params)?;
            let empty = vectors.iter().filter(|v| v.is_empty()).count();
            if empty > 0 {
                self.note(Method::PyramidPca, fold, format!("{empty} image(s) had no informative descriptors"));
            }
            self.pyramids.insert(fold, vectors);
        }
        Ok(&self.pyramids[&fold])
    }

    fn similarities(&mut self, fold: usize, train: &[usize]) -> Result<&Matrix> {
        if !self.similarities.contains_key(&fold) {
            let key = CacheKey::new(
                self.dataset_hash.clone(),
                "pyramid-match-similarity",
                serde_json::json!({
                    "spm": self.config.spm,
                    "seed": self.config.seed,
                    "folds": self.config.folds,
                    "fold": fold,
                    "train_hash": crate::io::sha256_hex(format!("{train:?}").as_bytes()),
                }),
            );
            let k = if let Some(k) = self.cache.as_ref().and_then(|c| c.get(&key)) {
                k
            } else {
                let k = similarity_matrix(self.pyramids(fold, train)?)?;
                if let Some(c) = &self.cache {
                    c.put(&key, &k)?;
                }
                k
            };
            self.similarities.insert(fold, k);
        }
        Ok(&self.similarities[&fold])
    }

    fn imed_matrix(&mut self) -> Result<&Matrix> {
        if self.imed.is_none() {
            let params = ImedParams::new(self.config.imed_sigma)?;
            let data = self.data;
            let key = CacheKey::new(self.dataset_hash.clone(), "imed", serde_json::json!({ "sigma": params.sigma }));
            let m = self.cached(key, || {
                let (h, w) = data.images[0].dims();
                let imed = Imed::new(h, w, params)?;
                let transformed = data.images.par_iter().map(|im| imed.transform(im)).collect::<Result<Vec<_>>>()?;
                Ok(build_distance_matrix(&transformed, euclidean_distance)?.into_matrix())
            })?;
            self.imed = Some(m);
        }
        Ok(self.imed.as_ref().unwrap())
    }

    /// Full `N x N` distances for an MDS method and fold.
    fn distances(&mut self, method: Method, fold: usize, train: &[usize]) -> Result<Matrix> {
        match method {
            Method::ImedMds => Ok(self.imed_matrix()?.clone()),
            Method::Spm1Mds | Method::Spm2Mds => {
                let eps = self.config.epsilon;
                let k = self.similarities(fold, train)?;
                let n = k.rows();
                let mut out = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            out[(i, j)] = if method == Method::Spm1Mds {
                                spm1_distance(k[(i, j)])?
                            } else {
                                spm2_distance(k[(i, j)], eps)?
                            };
                        }
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidArgument(format!("{method} is not a distance-based method"))),
        }
    }
}

fn rows_of(m: &Matrix, idx: &[usize]) -> Matrix {
    m.select_rows(idx)
}

fn leading(m: &Matrix, cols: usize) -> Matrix {
    Matrix::from_fn(m.rows(), cols, |i, j| m[(i, j)])
}

/// One method evaluated within a [`Workspace`].
pub struct MethodRunner<'w, 'a> {
    pub method: Method,
    pub ws: &'w mut Workspace<'a>,
    /// Per-fold projections onto every extracted component; shorter feature
    /// lengths use the leading columns.
    projections: HashMap<usize, (Matrix, Matrix)>,
}

impl<'w, 'a> MethodRunner<'w, 'a> {
    pub fn new(method: Method, ws: &'w mut Workspace<'a>) -> Self {
        Self {
            method,
            ws,
            projections: HashMap::new(),
        }
    }

    fn project_fold(&mut self, fold: usize, train: &[usize], test: &[usize]) -> Result<(Matrix, Matrix)> {
        let (tr, te) = match self.method {
            Method::PyramidPca => {
                let pm = pyramid_matrix(self.ws.pyramids(fold, train)?)?;
                (rows_of(&pm, train), rows_of(&pm, test))
            }
            _ => {
                let px = self.ws.pixels();
                (rows_of(px, train), rows_of(px, test))
            }
        };
        let cap = self.ws.config.max_m().min(train.len() - 1).min(tr.cols());
        match self.method {
            Method::Pca | Method::PyramidPca => {
                let p = pca_fit(&tr, cap)?;
                Ok((p.project_all(&tr)?, p.project_all(&te)?))
            }
            Method::KpcaGaussian | Method::KpcaPoly => {
                let kernel = if self.method == Method::KpcaPoly {
                    Kernel::Polynomial { degree: self.ws.config.poly_degree }
                } else {
                    let sigma = match self.ws.config.kpca_sigma {
                        Some(s) => s,
                        None => gaussian_sigma_auto(&tr, &mut Rng::derive(self.ws.config.seed, &format!("sigma/{fold}")))?,
                    };
                    self.ws.note(self.method, fold, format!("Gaussian kernel sigma {sigma}"));
                    Kernel::Gaussian { sigma }
                };
                let k = kpca_fit(&tr, kernel, cap)?;
                if k.reduced_rank {
                    self.ws.note(self.method, fold, format!("only {} usable kernel components", k.dimension()));
                }
                Ok((k.training_projection()?, k.project_all(&te)?))
            }
            _ => unreachable!("not a projection method"),
        }
    }

    fn linear_features(&mut self, fold: usize, train: &[usize], test: &[usize], m: usize) -> Result<(Matrix, Matrix)> {
        if !self.projections.contains_key(&fold) {
            let p = self.project_fold(fold, train, test)?;
            self.projections.insert(fold, p);
        }
        let (tr, te) = &self.projections[&fold];
        if m > tr.cols() {
            return Err(Error::Degenerate(format!("only {} components are available, {m} requested", tr.cols())));
        }
        Ok((leading(tr, m), leading(te, m)))
    }

    fn mds_features(&mut self, fold: usize, train: &[usize], test: &[usize], m: usize) -> Result<(Matrix, Matrix)> {
        let full = self.ws.distances(self.method, fold, train)?;
        let train_d = DistanceMatrix::with_tolerance(
            Matrix::from_fn(train.len(), train.len(), |i, j| full[(train[i], train[j])]),
            DistanceMatrix::LOAD_TOLERANCE,
        )?;
        let seed = Rng::derive(self.ws.config.seed, &format!("ilma/{}/{m}/{fold}", self.method)).next_u64();
        let opts = self.ws.config.ilma.options(seed);
        let (emb, trace): (Embedding, RunTrace) = ilma_fit(&train_d, m, &opts)?;
        self.ws.traces.push((self.method, m, fold, trace));
        let test_codes = test
            .par_iter()
            .map(|&t| {
                let row: Vec<f64> = train.iter().map(|&i| full[(t, i)]).collect();
                encode_new(&emb, &row, &opts.lm)
            })
            .collect::<Result<Vec<_>>>()?;
        let te = if test_codes.is_empty() { Matrix::zeros(0, m) } else { Matrix::from_rows(&test_codes)? };
        Ok((emb.codes, te))
    }
}

impl FeatureMethod for MethodRunner<'_, '_> {
    fn name(&self) -> &str {
        self.method.name()
    }

    fn features(&mut self, fold: usize, train: &[usize], test: &[usize], m: usize) -> Result<(Matrix, Matrix)> {
        let (tr, te) = if self.method.is_mds() {
            self.mds_features(fold, train, test, m)
        } else {
            self.linear_features(fold, train, test, m)
        }
        .map_err(|e| e.context(format!("{} m={m} fold={fold}", self.method)))?;
        if m == 2 && fold == 0 {
            let points = train
                .iter()
                .zip(tr.iter_rows())
                .chain(test.iter().zip(te.iter_rows()))
                .map(|(&i, r)| (i, r.to_vec()))
                .collect();
            self.ws.scatters.push(Scatter { method: self.method, points });
        }
        Ok((tr, te))
    }
}

/// Pyramid vector length recorded in manifests.
pub fn pyramid_dimension(config: &ExperimentConfig) -> Option<usize> {
    config.methods.iter().any(|m| m.uses_pyramids()).then(|| config.spm.vector_len())
}
