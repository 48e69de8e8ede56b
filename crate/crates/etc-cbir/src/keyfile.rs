//! `ETC-KEY v1 <k1> <k2> <k3>` key files.

use std::path::Path;

use etc_cbir_core::{keygen, KeySet};

use crate::error::{read, write_atomic, Error, Result};

const MAGIC: &str = "ETC-KEY v1";

pub fn format(keys: &KeySet) -> String {
    format!("{MAGIC} {} {} {}\n", keys.k1, keys.k2, keys.k3)
}

pub fn parse(text: &str) -> Result<KeySet> {
    let line = text.lines().next().unwrap_or("");
    let rest = line.strip_prefix(MAGIC).ok_or(Error::FormatVersion {
        what: "key file",
        expected: MAGIC,
    })?;
    let nums: Vec<&str> = rest.split_whitespace().collect();
    if nums.len() != 3 {
        return Err(Error::parse(
            "key file",
            1,
            format!("expected 3 keys, found {}", nums.len()),
        ));
    }
    let mut k = [0u64; 3];
    for (slot, s) in k.iter_mut().zip(&nums) {
        *slot = s
            .parse()
            .map_err(|e| Error::parse("key file", 1, format!("{s:?}: {e}")))?;
    }
    Ok(KeySet::new(k[0], k[1], k[2]))
}

pub fn load(path: &Path) -> Result<KeySet> {
    let bytes = read(path)?;
    parse(&String::from_utf8_lossy(&bytes))
}

pub fn save(path: &Path, keys: &KeySet) -> Result<()> {
    write_atomic(path, format(keys).as_bytes())
}

/// Deterministic from `seed`, otherwise seeded from OS entropy.
pub fn generate(seed: Option<u64>) -> KeySet {
    keygen(seed.unwrap_or_else(rand::random))
}
