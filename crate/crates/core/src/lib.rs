//! Encrypted-domain content-based image retrieval, minus the I/O.
//!
//! This crate holds every algorithm the retrieval pipeline needs and nothing
//! that touches a file, a socket, or a clock:
//!
//! * [`raster`] and [`dihedral`]: 8-bit RGB images, the 16x16 block grid and
//!   the per-block symmetry group shared by the cipher and the descriptor.
//! * [`prng`] and [`crypto`]: the SplitMix64 stream, Fisher-Yates shuffling and
//!   the EtC block scrambler (permutation, rotation/flip, negative-positive).
//! * [`descriptor`]: the 144-dimensional mCEDD patch descriptor, averaged over
//!   the 16-element encryption group so it cannot tell a block from its
//!   scrambled counterpart.
//! * [`kmeans`] and [`codebook`]: visual words learned from plain images.
//! * [`esimple`], [`index`] and [`eval`]: weighted visual-word histograms,
//!   exact l2 ranking and AP/mAP scoring.
//!
//! The crate is `no_std` + `alloc`. The `std` feature adds `std::error::Error`
//! support; `parallel` additionally spreads descriptor extraction and k-means
//! assignment over rayon without changing any output bit.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod codebook;
pub mod crypto;
pub mod descriptor;
pub mod dihedral;
pub mod error;
pub mod esimple;
pub mod eval;
pub mod index;
pub mod kmeans;
pub mod prng;
pub mod raster;

mod par;

pub use codebook::{Codebook, CodebookId, TrainMeta};
pub use crypto::{decrypt, derive_plan, encrypt, keygen, EncryptionPlan, KeySet};
pub use descriptor::{mcedd, DescriptorParams, PatchDescriptor};
pub use dihedral::DihedralTransform;
pub use error::{Error, Result};
pub use esimple::{esimple, ESimpleVector};
pub use eval::{average_precision, mean_average_precision};
pub use index::{IndexEntry, RankedResult, RetrievalIndex};
pub use kmeans::{kmeans, KMeansConfig, KMeansOutput};
pub use prng::SplitMix64;
pub use raster::{Block, BlockGrid, Raster, BLOCK_SIZE};
