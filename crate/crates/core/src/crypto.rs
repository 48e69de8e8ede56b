//! EtC block scrambling: permute the 16x16 blocks, rotate/flip each one, and
//! negate a random half of them. Every step is keyed by its own SplitMix64
//! stream so the whole cipher is reproducible from three 64-bit seeds.

use alloc::vec;
use alloc::vec::Vec;

use crate::dihedral::{negate_block, DihedralTransform};
use crate::error::{Error, Result};
use crate::prng::{fisher_yates, SplitMix64};
use crate::raster::Raster;

/// Seeds for the permutation, the per-block dihedral draw and the
/// negative-positive mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeySet {
    pub k1: u64,
    pub k2: u64,
    pub k3: u64,
}

impl KeySet {
    pub const fn new(k1: u64, k2: u64, k3: u64) -> Self {
        Self { k1, k2, k3 }
    }

    pub fn to_array(self) -> [u64; 3] {
        [self.k1, self.k2, self.k3]
    }
}

/// The first three outputs of SplitMix64 seeded with `seed`.
pub fn keygen(seed: u64) -> KeySet {
    let mut rng = SplitMix64::new(seed);
    KeySet {
        k1: rng.next_u64(),
        k2: rng.next_u64(),
        k3: rng.next_u64(),
    }
}

/// Per-block schedule expanded from a [`KeySet`] for one grid size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptionPlan {
    /// Input block `j` lands at output position `permutation[j]`.
    pub permutation: Vec<usize>,
    pub dihedral: Vec<DihedralTransform>,
    /// `r(j)`: negate block `j` when set.
    pub negate: Vec<bool>,
}

impl EncryptionPlan {
    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }
}

pub fn derive_plan(keys: KeySet, rows: usize, cols: usize) -> Result<EncryptionPlan> {
    let n = rows * cols;
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut permutation: Vec<usize> = (0..n).collect();
    fisher_yates(&mut permutation, &mut SplitMix64::new(keys.k1));

    let mut rot = SplitMix64::new(keys.k2);
    let dihedral = (0..n)
        .map(|_| DihedralTransform::from_draw(rot.next_u64()))
        .collect();

    let mut neg = SplitMix64::new(keys.k3);
    let negate = (0..n).map(|_| neg.next_below(2) == 1).collect();

    Ok(EncryptionPlan {
        permutation,
        dihedral,
        negate,
    })
}

/// Encrypts a block-aligned raster. Callers crop unaligned images first.
pub fn encrypt(img: &Raster, keys: KeySet) -> Result<Raster> {
    let grid = img.grid()?;
    let plan = derive_plan(keys, grid.rows, grid.cols)?;
    let mut out = Raster::new(img.width(), img.height(), vec![0; img.data().len()])?;
    for j in 0..grid.len() {
        let mut block = plan.dihedral[j].apply(&img.block(grid, j));
        if plan.negate[j] {
            block = negate_block(&block);
        }
        out.put_block(grid, plan.permutation[j], &block);
    }
    Ok(out)
}

/// Inverse of [`encrypt`] under the same keys.
pub fn decrypt(img: &Raster, keys: KeySet) -> Result<Raster> {
    let grid = img.grid()?;
    let plan = derive_plan(keys, grid.rows, grid.cols)?;
    let mut out = Raster::new(img.width(), img.height(), vec![0; img.data().len()])?;
    for j in 0..grid.len() {
        let mut block = img.block(grid, plan.permutation[j]);
        if plan.negate[j] {
            block = negate_block(&block);
        }
        out.put_block(grid, j, &plan.dihedral[j].inverse().apply(&block));
    }
    Ok(out)
}
