use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::distances::GrayImage;
use crate::error::{Error, Result};
use crate::io::sha256_hex;

pub const UIUC_HEIGHT: usize = 40;
pub const UIUC_WIDTH: usize = 100;

/// Standard luma weights for RGB input.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Car/non-car images of 40x100 pixels, named `pos-*` / `neg-*` in the
    /// root or a `TrainImages` subdirectory, or split into class directories.
    Uiuc,
    /// One subdirectory per class; labels follow sorted directory names.
    ClassPerDirectory,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uiuc" => Ok(Layout::Uiuc),
            "class-per-directory" | "classes" => Ok(Layout::ClassPerDirectory),
            _ => Err(Error::InvalidArgument(format!(
                "unknown layout {s:?} (expected uiuc or class-per-directory)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledImageSet {
    pub images: Vec<GrayImage>,
    /// Index into `class_names`.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub paths: Vec<PathBuf>,
    /// Which on-disk convention was found.
    pub convention: String,
}

impl LabeledImageSet {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `+1` for `positive`, `-1` for every other class.
    pub fn binary_labels(&self, positive: &str) -> Result<Vec<i8>> {
        let idx = self
            .class_names
            .iter()
            .position(|c| c == positive)
            .ok_or_else(|| Error::InvalidArgument(format!("no class named {positive:?}")))?;
        Ok(self.labels.iter().map(|&l| if l == idx { 1 } else { -1 }).collect())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.class_names.len()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Hash over labels, dimensions and pixel bytes, used as a cache key.
    pub fn content_hash(&self) -> String {
        let mut bytes = Vec::new();
        for (img, &l) in self.images.iter().zip(&self.labels) {
            bytes.extend_from_slice(&(l as u64).to_le_bytes());
            bytes.extend_from_slice(&(img.height() as u64).to_le_bytes());
            bytes.extend_from_slice(&(img.width() as u64).to_le_bytes());
            for p in img.pixels() {
                bytes.extend_from_slice(&p.to_le_bytes());
            }
        }
        sha256_hex(&bytes)
    }

    pub fn subset(&self, idx: &[usize]) -> LabeledImageSet {
        LabeledImageSet {
            images: idx.iter().map(|&i| self.images[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            paths: idx.iter().map(|&i| self.paths[i].clone()).collect(),
            convention: self.convention.clone(),
        }
    }
}

fn ingestion(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("pgm" | "pnm" | "ppm" | "png")
    )
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = std::fs::read_dir(dir)
        .map_err(|e| ingestion(dir, e.to_string()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| ingestion(dir, e.to_string()))?;
    out.sort();
    Ok(out)
}

/// Reads a PGM (ASCII or binary) or PNG file as intensities in `[0, 1]`.
/// Color input is converted with the standard luma weights.
pub fn load_gray_image(path: &Path) -> Result<GrayImage> {
    let img = image::ImageReader::open(path)
        .map_err(|e| ingestion(path, e.to_string()))?
        .with_guessed_format()
        .map_err(|e| ingestion(path, e.to_string()))?
        .decode()
        .map_err(|e| ingestion(path, e.to_string()))?;
    Ok(to_gray(&img))
}

pub fn to_gray(img: &DynamicImage) -> GrayImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<f64> = if img.color().has_color() {
        img.to_rgb32f()
            .pixels()
            .map(|p| LUMA[0] * p[0] as f64 + LUMA[1] * p[1] as f64 + LUMA[2] * p[2] as f64)
            .collect()
    } else {
        img.to_luma32f().pixels().map(|p| p[0] as f64).collect()
    };
    GrayImage::new(h, w, pixels.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()).expect("decoded image is consistent")
}

fn load_files(files: &[(PathBuf, usize)], expect: Option<(usize, usize)>) -> Result<(Vec<GrayImage>, Vec<usize>, Vec<PathBuf>)> {
    use rayon::prelude::*;
    let images = files
        .par_iter()
        .map(|(p, _)| {
            let img = load_gray_image(p)?;
            if let Some((h, w)) = expect {
                if img.dims() != (h, w) {
                    return Err(ingestion(p, format!("expected {h}x{w} pixels, found {}x{}", img.height(), img.width())));
                }
            }
            Ok(img)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((images, files.iter().map(|f| f.1).collect(), files.iter().map(|f| f.0.clone()).collect()))
}

fn class_directories(root: &Path) -> Result<Vec<(String, Vec<PathBuf>)>> {
    let mut out = Vec::new();
    for dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let files: Vec<PathBuf> = sorted_entries(&dir)?.into_iter().filter(|p| is_image_file(p)).collect();
        if !files.is_empty() {
            let name = dir.file_name().unwrap().to_string_lossy().into_owned();
            out.push((name, files));
        }
    }
    Ok(out)
}

pub fn load_image_dataset(root: &Path, layout: Layout) -> Result<LabeledImageSet> {
    if !root.is_dir() {
        return Err(ingestion(root, "not a readable directory"));
    }
    let (files, class_names, convention, expect) = match layout {
        Layout::Uiuc => {
            let class_names = vec!["car".to_owned(), "non-car".to_owned()];
            let flat = |dir: &Path| -> Result<Vec<(PathBuf, usize)>> {
                let mut v = Vec::new();
                for p in sorted_entries(dir)?.into_iter().filter(|p| is_image_file(p)) {
                    let name = p.file_name().unwrap().to_string_lossy().to_ascii_lowercase();
                    if name.starts_with("pos") {
                        v.push((p, 0));
                    } else if name.starts_with("neg") {
                        v.push((p, 1));
                    }
                }
                Ok(v)
            };
            let mut found = (flat(root)?, "uiuc: pos-/neg- files in root");
            if found.0.is_empty() && root.join("TrainImages").is_dir() {
                found = (flat(&root.join("TrainImages"))?, "uiuc: pos-/neg- files in TrainImages/");
            }
            if found.0.is_empty() {
                let mut v = Vec::new();
                for (name, files) in class_directories(root)? {
                    let label = match name.to_ascii_lowercase().as_str() {
                        "car" | "cars" | "pos" | "positive" => 0,
                        "non-car" | "noncar" | "non-cars" | "neg" | "negative" => 1,
                        _ => continue,
                    };
                    v.extend(files.into_iter().map(|f| (f, label)));
                }
                v.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
                found = (v, "uiuc: class directories");
            }
            (found.0, class_names, found.1.to_owned(), Some((UIUC_HEIGHT, UIUC_WIDTH)))
        }
        Layout::ClassPerDirectory => {
            let classes = class_directories(root)?;
            let names: Vec<String> = classes.iter().map(|c| c.0.clone()).collect();
            let files = classes
                .into_iter()
                .enumerate()
                .flat_map(|(label, (_, files))| files.into_iter().map(move |f| (f, label)))
                .collect();
            (files, names, "class-per-directory".to_owned(), None)
        }
    };
    if files.is_empty() {
        return Err(Error::EmptyDataset(format!("no images found under {}", root.display())));
    }
    let (images, labels, paths) = load_files(&files, expect)?;
    if layout == Layout::ClassPerDirectory {
        let dims = images[0].dims();
        if let Some(i) = images.iter().position(|im| im.dims() != dims) {
            return Err(ingestion(&paths[i], format!("size {:?} differs from the first image's {:?}", images[i].dims(), dims)));
        }
    }
    log::info!("loaded {} images from {} ({convention})", images.len(), root.display());
    Ok(LabeledImageSet {
        images,
        labels,
        class_names,
        paths,
        convention,
    })
}
