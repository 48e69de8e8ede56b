//! Everything around the retrieval core that needs `std`: PNG/JPEG decoding,
//! the key, codebook and index text formats, the evaluation harness, the CLI
//! and the third-party HTTP service.

pub mod cli;
pub mod codebook_file;
pub mod error;
pub mod experiment;
pub mod image_io;
pub mod index_file;
pub mod keyfile;
pub mod manifest;
pub mod service;
pub mod synth;

pub use error::{Error, Result};
pub use etc_cbir_core as core;
