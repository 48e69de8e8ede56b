//! 8-bit RGB rasters and the 16x16 block grid.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Edge length of one block, in pixels.
pub const BLOCK_SIZE: usize = 16;

/// Samples in one block: 16 rows x 16 columns x 3 channels, row-major, RGB
/// interleaved.
pub const BLOCK_SAMPLES: usize = BLOCK_SIZE * BLOCK_SIZE * 3;

/// One 16x16 RGB block.
pub type Block = [u8; BLOCK_SAMPLES];

/// Row-major interleaved RGB image with 8 bits per sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(Error::DataLength {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single RGB colour.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Expands 8-bit grayscale to three identical channels.
    pub fn from_gray(width: usize, height: usize, gray: &[u8]) -> Result<Self> {
        if gray.len() != width * height {
            return Err(Error::DataLength {
                width,
                height,
                expected: width * height * 3,
                actual: gray.len() * 3,
            });
        }
        let data = gray.iter().flat_map(|&g| [g, g, g]).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// True when both dimensions are non-zero multiples of 16.
    pub fn is_block_aligned(&self) -> bool {
        self.width >= BLOCK_SIZE
            && self.height >= BLOCK_SIZE
            && self.width.is_multiple_of(BLOCK_SIZE)
            && self.height.is_multiple_of(BLOCK_SIZE)
    }

    /// Top-left sub-rectangle of the given size.
    pub fn crop(&self, width: usize, height: usize) -> Raster {
        let width = width.min(self.width);
        let height = height.min(self.height);
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            let start = y * self.width * 3;
            data.extend_from_slice(&self.data[start..start + width * 3]);
        }
        Raster {
            width,
            height,
            data,
        }
    }

    /// Drops the right and bottom remainder strips so both dimensions become
    /// multiples of 16.
    pub fn crop_to_block_multiple(&self) -> Result<Raster> {
        if self.width < BLOCK_SIZE || self.height < BLOCK_SIZE {
            return Err(Error::DimensionTooSmall {
                width: self.width,
                height: self.height,
            });
        }
        let w = self.width / BLOCK_SIZE * BLOCK_SIZE;
        let h = self.height / BLOCK_SIZE * BLOCK_SIZE;
        if w == self.width && h == self.height {
            return Ok(self.clone());
        }
        Ok(self.crop(w, h))
    }

    /// Block grid of an aligned raster.
    pub fn grid(&self) -> Result<BlockGrid> {
        if !self.is_block_aligned() {
            return Err(Error::NotBlockMultiple {
                width: self.width,
                height: self.height,
            });
        }
        Ok(BlockGrid {
            cols: self.width / BLOCK_SIZE,
            rows: self.height / BLOCK_SIZE,
        })
    }

    /// Copies out block `j` (row-major over the grid). The raster must be
    /// block-aligned and `j` in range.
    pub fn block(&self, grid: BlockGrid, j: usize) -> Block {
        let (bx, by) = grid.origin(j);
        let mut out = [0u8; BLOCK_SAMPLES];
        for r in 0..BLOCK_SIZE {
            let src = ((by + r) * self.width + bx) * 3;
            let dst = r * BLOCK_SIZE * 3;
            out[dst..dst + BLOCK_SIZE * 3].copy_from_slice(&self.data[src..src + BLOCK_SIZE * 3]);
        }
        out
    }

    pub fn put_block(&mut self, grid: BlockGrid, j: usize, block: &Block) {
        let (bx, by) = grid.origin(j);
        for r in 0..BLOCK_SIZE {
            let dst = ((by + r) * self.width + bx) * 3;
            let src = r * BLOCK_SIZE * 3;
            self.data[dst..dst + BLOCK_SIZE * 3].copy_from_slice(&block[src..src + BLOCK_SIZE * 3]);
        }
    }

    /// All blocks in row-major grid order.
    pub fn blocks(&self) -> Result<Vec<Block>> {
        let grid = self.grid()?;
        Ok((0..grid.len()).map(|j| self.block(grid, j)).collect())
    }

    /// Reassembles a raster from blocks laid out row-major on `grid`.
    pub fn from_blocks(grid: BlockGrid, blocks: &[Block]) -> Result<Raster> {
        if blocks.len() != grid.len() {
            return Err(Error::DataLength {
                width: grid.cols * BLOCK_SIZE,
                height: grid.rows * BLOCK_SIZE,
                expected: grid.len() * BLOCK_SAMPLES,
                actual: blocks.len() * BLOCK_SAMPLES,
            });
        }
        let width = grid.cols * BLOCK_SIZE;
        let height = grid.rows * BLOCK_SIZE;
        let mut out = Raster {
            width,
            height,
            data: vec![0; width * height * 3],
        };
        for (j, b) in blocks.iter().enumerate() {
            out.put_block(grid, j, b);
        }
        Ok(out)
    }
}

/// Non-overlapping 16x16 tiling of a block-aligned raster. Block `j` sits at
/// grid row `j / cols`, column `j % cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockGrid {
    pub cols: usize,
    pub rows: usize,
}

impl BlockGrid {
    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixel coordinates (x, y) of the top-left corner of block `j`.
    pub fn origin(&self, j: usize) -> (usize, usize) {
        ((j % self.cols) * BLOCK_SIZE, (j / self.cols) * BLOCK_SIZE)
    }
}
