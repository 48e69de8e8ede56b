//! The symmetries of a square block and the negative-positive flip.
//!
//! Code `c` encodes `rot = c % 4` clockwise quarter turns followed, when
//! `c >= 4`, by a horizontal flip: 0 identity, 1 rot90cw, 2 rot180,
//! 3 rot270cw, 4 flipH, 5 flipH∘rot90cw, 6 flipH∘rot180, 7 flipH∘rot270cw.

use crate::raster::{Block, BLOCK_SAMPLES, BLOCK_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DihedralTransform(u8);

impl DihedralTransform {
    pub const IDENTITY: Self = Self(0);
    pub const ROT90: Self = Self(1);
    pub const ROT180: Self = Self(2);
    pub const ROT270: Self = Self(3);
    pub const FLIP_H: Self = Self(4);

    /// All eight elements in code order.
    pub const ALL: [Self; 8] = [
        Self(0),
        Self(1),
        Self(2),
        Self(3),
        Self(4),
        Self(5),
        Self(6),
        Self(7),
    ];

    /// Returns `None` for codes outside `0..8`.
    pub fn from_code(code: u8) -> Option<Self> {
        (code < 8).then_some(Self(code))
    }

    /// Reduces an arbitrary draw modulo 8.
    pub fn from_draw(draw: u64) -> Self {
        Self((draw % 8) as u8)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    fn rot(self) -> u8 {
        self.0 & 3
    }

    fn flip(self) -> bool {
        self.0 >= 4
    }

    /// The transform equivalent to applying `self` first and then `next`.
    pub fn then(self, next: Self) -> Self {
        // rot(k)∘flipH = flipH∘rot(-k): a flip in `self` reverses the sense
        // of the rotation that follows it.
        let rot = if self.flip() {
            (self.rot() + 4 - next.rot()) & 3
        } else {
            (self.rot() + next.rot()) & 3
        };
        Self(rot | (((self.flip() ^ next.flip()) as u8) << 2))
    }

    pub fn inverse(self) -> Self {
        if self.flip() {
            self
        } else {
            Self((4 - self.rot()) & 3)
        }
    }

    /// Source coordinate for output pixel `(r, c)` of an `n x n` square.
    pub fn source(self, r: usize, c: usize, n: usize) -> (usize, usize) {
        let last = n - 1;
        // undo the flip, then the rotation
        let c = if self.flip() { last - c } else { c };
        match self.rot() {
            0 => (r, c),
            1 => (last - c, r),
            2 => (last - r, last - c),
            _ => (c, last - r),
        }
    }

    /// Applies the transform to a 16x16 block, identically on all channels.
    pub fn apply(self, block: &Block) -> Block {
        if self.0 == 0 {
            return *block;
        }
        let mut out = [0u8; BLOCK_SAMPLES];
        for r in 0..BLOCK_SIZE {
            for c in 0..BLOCK_SIZE {
                let (sr, sc) = self.source(r, c, BLOCK_SIZE);
                let s = (sr * BLOCK_SIZE + sc) * 3;
                let d = (r * BLOCK_SIZE + c) * 3;
                out[d..d + 3].copy_from_slice(&block[s..s + 3]);
            }
        }
        out
    }
}

/// Replaces every sample `p` with `255 - p`.
pub fn negate_block(block: &Block) -> Block {
    let mut out = *block;
    for p in out.iter_mut() {
        *p = 255 - *p;
    }
    out
}
