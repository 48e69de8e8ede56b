//! E-SIMPLE image vectors: visual-word counts, `1 + ln(count)` weighting and
//! l2 normalisation.

use alloc::vec;
use alloc::vec::Vec;

use crate::codebook::{image_descriptors, Codebook, CodebookId};
use crate::error::{Error, Result};
use crate::raster::Raster;

#[derive(Debug, Clone, PartialEq)]
pub struct ESimpleVector {
    pub values: Vec<f64>,
    pub codebook_id: CodebookId,
}

impl ESimpleVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Visual-word counts over the patches of a block-aligned image.
pub fn histogram(img: &Raster, cb: &Codebook) -> Result<Vec<u32>> {
    if !img.is_block_aligned() {
        return Err(Error::NotBlockMultiple {
            width: img.width(),
            height: img.height(),
        });
    }
    let mut counts = vec![0u32; cb.len()];
    for d in image_descriptors(img, &cb.params)? {
        counts[cb.nearest_word(&d)?] += 1;
    }
    Ok(counts)
}

/// `1 + ln(count)`, with empty bins left at zero.
pub fn weight(counts: &[u32]) -> Vec<f64> {
    counts
        .iter()
        .map(|&c| {
            if c == 0 {
                0.0
            } else {
                1.0 + libm::log(c as f64)
            }
        })
        .collect()
}

/// Unit-length copy of `v`; the zero vector stays zero.
pub fn l2_normalize(v: &[f64]) -> Vec<f64> {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

pub fn esimple(img: &Raster, cb: &Codebook) -> Result<ESimpleVector> {
    Ok(ESimpleVector {
        values: l2_normalize(&weight(&histogram(img, cb)?)),
        codebook_id: cb.id,
    })
}
