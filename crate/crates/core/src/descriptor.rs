//! mCEDD: a colour x texture histogram for one 16x16 patch, averaged over the
//! 16 per-block encryption operations (8 dihedral codes x optional
//! negative-positive flip) so that a plain block and its scrambled version
//! produce the same vector.
//!
//! Layout: component `t * color_bins + c` for texture class `t` in `0..6`
//! and colour bin `c`. With the default 21 hue sectors there are 24 colour
//! bins and 144 components.

use alloc::vec;
use alloc::vec::Vec;

use crate::dihedral::{negate_block, DihedralTransform};
use crate::raster::{Block, BLOCK_SIZE};

/// Number of texture classes.
pub const TEXTURE_CLASSES: usize = 6;

/// Achromatic bins (black, white, gray) preceding the hue sectors.
pub const ACHROMATIC_BINS: usize = 3;

/// Default descriptor dimension.
pub const DESCRIPTOR_DIM: usize = 144;

const SUB_BLOCK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptorParams {
    /// Below this value a pixel is black.
    pub achromatic_v_black: f64,
    /// Above this value (with low saturation) a pixel is white.
    pub achromatic_v_white: f64,
    /// Below this saturation a pixel is white or gray.
    pub achromatic_s: f64,
    /// Minimum filter response for an edge, on the 0-255 luminance scale.
    pub edge_threshold: f64,
    pub hue_bins: usize,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        Self {
            achromatic_v_black: 0.15,
            achromatic_v_white: 0.85,
            achromatic_s: 0.15,
            edge_threshold: 14.0,
            hue_bins: 21,
        }
    }
}

impl DescriptorParams {
    pub fn color_bins(&self) -> usize {
        ACHROMATIC_BINS + self.hue_bins
    }

    pub fn dim(&self) -> usize {
        TEXTURE_CLASSES * self.color_bins()
    }
}

/// A patch descriptor. Components are non-negative and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchDescriptor(pub Vec<f64>);

impl PatchDescriptor {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Hexcone HSV. Hue in degrees `[0, 360)`, zero for achromatic pixels.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if max == 0 || max == min {
        return (0.0, 0.0, v);
    }
    let delta = (max - min) as f64;
    let s = delta / max as f64;
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let mut h = if max as f64 == r {
        60.0 * ((g - b) / delta)
    } else if max as f64 == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    (h, s, v)
}

/// 0 black, 1 white, 2 gray, then `3 + hue sector`.
pub fn color_bin(h: f64, s: f64, v: f64, params: &DescriptorParams) -> usize {
    if v < params.achromatic_v_black {
        0
    } else if s < params.achromatic_s && v > params.achromatic_v_white {
        1
    } else if s < params.achromatic_s {
        2
    } else {
        let sector = libm::floor(h / (360.0 / params.hue_bins as f64));
        let sector = if sector < 0.0 { 0 } else { sector as usize };
        ACHROMATIC_BINS + sector.min(params.hue_bins - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TextureClass {
    NoEdge = 0,
    NonDirectional = 1,
    Vertical = 2,
    Horizontal = 3,
    Diagonal45 = 4,
    Diagonal135 = 5,
}

/// Classifies a sub-block from its four quadrant mean luminances
/// (top-left, top-right, bottom-left, bottom-right).
pub fn texture_class(quadrants: [f64; 4], edge_threshold: f64) -> TextureClass {
    let [a0, a1, a2, a3] = quadrants;
    let sqrt2 = core::f64::consts::SQRT_2;
    // listed in tie-break order
    let responses = [
        (
            TextureClass::NonDirectional,
            libm::fabs(2.0 * a0 - 2.0 * a1 - 2.0 * a2 + 2.0 * a3) / 2.0,
        ),
        (TextureClass::Vertical, libm::fabs(a0 - a1 + a2 - a3)),
        (TextureClass::Horizontal, libm::fabs(a0 + a1 - a2 - a3)),
        (
            TextureClass::Diagonal45,
            libm::fabs(sqrt2 * a0 - sqrt2 * a3),
        ),
        (
            TextureClass::Diagonal135,
            libm::fabs(sqrt2 * a1 - sqrt2 * a2),
        ),
    ];
    let mut best = responses[0];
    for r in &responses[1..] {
        if r.1 > best.1 {
            best = *r;
        }
    }
    if best.1 < edge_threshold {
        TextureClass::NoEdge
    } else {
        best.0
    }
}

fn luminance(px: &[u8]) -> f64 {
    0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64
}

/// Quadrant mean luminances of the 4x4 sub-block whose top-left pixel is
/// `(row, col)` in the patch.
fn quadrant_means(patch: &Block, row: usize, col: usize) -> [f64; 4] {
    let mut q = [0.0; 4];
    for (i, slot) in q.iter_mut().enumerate() {
        let r0 = row + (i / 2) * 2;
        let c0 = col + (i % 2) * 2;
        let mut sum = 0.0;
        for r in r0..r0 + 2 {
            for c in c0..c0 + 2 {
                let p = (r * BLOCK_SIZE + c) * 3;
                sum += luminance(&patch[p..p + 3]);
            }
        }
        *slot = sum / 4.0;
    }
    q
}

/// Per-patch pixel votes: one `(texture, colour)` count per pixel. Each
/// count is divided by 256 in [`base_descriptor`].
fn base_counts(patch: &Block, params: &DescriptorParams, counts: &mut [u32]) {
    let bins = params.color_bins();
    for sr in (0..BLOCK_SIZE).step_by(SUB_BLOCK) {
        for sc in (0..BLOCK_SIZE).step_by(SUB_BLOCK) {
            let t = texture_class(quadrant_means(patch, sr, sc), params.edge_threshold) as usize;
            for r in sr..sr + SUB_BLOCK {
                for c in sc..sc + SUB_BLOCK {
                    let p = (r * BLOCK_SIZE + c) * 3;
                    let (h, s, v) = rgb_to_hsv(patch[p], patch[p + 1], patch[p + 2]);
                    counts[t * bins + color_bin(h, s, v, params)] += 1;
                }
            }
        }
    }
}

/// CEDD-style colour x texture histogram of one patch, summing to one.
pub fn base_descriptor(patch: &Block, params: &DescriptorParams) -> Vec<f64> {
    let mut counts = vec![0u32; params.dim()];
    base_counts(patch, params, &mut counts);
    let pixels = (BLOCK_SIZE * BLOCK_SIZE) as f64;
    counts.iter().map(|&c| c as f64 / pixels).collect()
}

/// The 16 group elements in accumulation order: dihedral code 0..8, each
/// without and then with negation.
pub fn group_orbit(patch: &Block) -> [Block; 16] {
    let mut out = [[0u8; crate::raster::BLOCK_SAMPLES]; 16];
    for (i, t) in DihedralTransform::ALL.iter().enumerate() {
        let moved = t.apply(patch);
        out[2 * i + 1] = negate_block(&moved);
        out[2 * i] = moved;
    }
    out
}

/// Group average of [`base_descriptor`] over the encryption group.
pub fn mcedd(patch: &Block, params: &DescriptorParams) -> PatchDescriptor {
    let mut acc = vec![0.0f64; params.dim()];
    for g in group_orbit(patch).iter() {
        for (a, b) in acc.iter_mut().zip(base_descriptor(g, params)) {
            *a += b;
        }
    }
    for a in acc.iter_mut() {
        *a /= 16.0;
    }
    PatchDescriptor(acc)
}
