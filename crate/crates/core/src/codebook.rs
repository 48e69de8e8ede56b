//! Visual-word codebooks learned from plain training images.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::descriptor::{mcedd, DescriptorParams};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, nearest, KMeansConfig, KMeansOutput};
use crate::par;
use crate::raster::Raster;

/// FNV-1a fingerprint of a serialized codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CodebookId(pub u64);

impl CodebookId {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        Self(fnv1a64(bytes))
    }
}

impl fmt::Display for CodebookId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Where a codebook came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrainMeta {
    pub label: String,
    pub images: usize,
    pub seed: u64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub words: Vec<Vec<f64>>,
    pub params: DescriptorParams,
    pub meta: TrainMeta,
    /// Fingerprint of the file this codebook was read from or written to.
    /// Zero until the codebook has been serialized.
    pub id: CodebookId,
}

impl Codebook {
    /// Checks that every word has the descriptor dimension and finite values.
    pub fn new(words: Vec<Vec<f64>>, params: DescriptorParams, meta: TrainMeta) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidConfig("codebook needs at least one word"));
        }
        let dim = params.dim();
        for w in &words {
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("codebook word has a non-finite value"));
            }
        }
        Ok(Self {
            words,
            params,
            meta,
            id: CodebookId::default(),
        })
    }

    /// Number of visual words.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn with_id(mut self, id: CodebookId) -> Self {
        self.id = id;
        self
    }

    /// Closest word by squared l2, lowest index on ties.
    pub fn nearest_word(&self, descriptor: &[f64]) -> Result<usize> {
        if descriptor.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: descriptor.len(),
            });
        }
        Ok(nearest(&self.words, descriptor).0)
    }
}

/// mCEDD of every 16x16 patch, row-major within an image, images in order.
/// Images are cropped to a multiple of 16 first.
pub fn image_descriptors(img: &Raster, params: &DescriptorParams) -> Result<Vec<Vec<f64>>> {
    let img = img.crop_to_block_multiple()?;
    let blocks = img.blocks()?;
    Ok(par::map_ordered(&blocks, |b| mcedd(b, params).into_vec()))
}

pub fn collect_training_descriptors(
    images: &[Raster],
    params: &DescriptorParams,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for img in images {
        out.extend(image_descriptors(img, params)?);
    }
    if out.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    Ok(out)
}

/// Runs k-means over the training descriptors and wraps the centroids.
pub fn build_codebook(
    images: &[Raster],
    params: &DescriptorParams,
    cfg: &KMeansConfig,
    label: &str,
) -> Result<(Codebook, KMeansOutput)> {
    let points = collect_training_descriptors(images, params)?;
    let out = kmeans(&points, cfg)?;
    let meta = TrainMeta {
        label: label.into(),
        images: images.len(),
        seed: cfg.seed,
        iterations: out.iterations,
    };
    let cb = Codebook::new(out.centroids.clone(), *params, meta)?;
    Ok((cb, out))
}
