//! Tab-separated index files.
//!
//! ```text
//! ESIMPLE-INDEX v1 M=<M> CB=<codebook id> N=<entries>
//! <image_id>\t<owner_info>\t<stored_path>\t<M space-separated floats>
//! ```

use std::fmt::Write;
use std::path::Path;

use etc_cbir_core::{CodebookId, ESimpleVector, IndexEntry, RetrievalIndex};

use crate::error::{read, write_atomic, Error, Result};

const MAGIC: &str = "ESIMPLE-INDEX v1";
const WHAT: &str = "index";

pub fn encode(index: &RetrievalIndex) -> String {
    let mut out = format!(
        "{MAGIC} M={} CB={} N={}\n",
        index.words(),
        index.codebook_id(),
        index.len()
    );
    for e in index.entries() {
        let _ = write!(out, "{}\t{}\t{}\t", e.image_id, e.owner_info, e.stored_path);
        for (i, v) in e.vector.values.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

fn header_value<T: std::str::FromStr>(rest: &str, key: &str) -> Result<T> {
    rest.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| Error::parse(WHAT, 1, format!("missing {key}")))?
        .parse()
        .map_err(|_| Error::parse(WHAT, 1, format!("bad {key}")))
}

pub fn decode(text: &str) -> Result<RetrievalIndex> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let rest = header
        .strip_prefix(MAGIC)
        .filter(|r| r.is_empty() || r.starts_with(' '))
        .ok_or(Error::FormatVersion {
            what: WHAT,
            expected: MAGIC,
        })?;
    let m: usize = header_value(rest, "M")?;
    let cb = CodebookId(header_value(rest, "CB")?);
    let n: usize = header_value(rest, "N")?;

    let mut index = RetrievalIndex::new(m, cb);
    let mut body = lines.enumerate().filter(|(_, l)| !l.is_empty());
    for k in 0..n {
        let (i, line) = body.next().ok_or_else(|| Error::Truncated {
            what: WHAT,
            detail: format!("{k} of N={n} entries present"),
        })?;
        let lineno = i + 2;
        let cols: Vec<&str> = line.splitn(4, '\t').collect();
        if cols.len() != 4 {
            return Err(Error::Truncated {
                what: WHAT,
                detail: format!("line {lineno} has {} of 4 columns", cols.len()),
            });
        }
        let values = cols[3]
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(WHAT, lineno, e.to_string()))?;
        if values.len() != m {
            return Err(Error::Truncated {
                what: WHAT,
                detail: format!("line {lineno} has {} of M={m} values", values.len()),
            });
        }
        index.add(IndexEntry {
            image_id: cols[0].into(),
            owner_info: cols[1].into(),
            stored_path: cols[2].into(),
            vector: ESimpleVector {
                values,
                codebook_id: cb,
            },
        })?;
    }
    if let Some((i, _)) = body.next() {
        return Err(Error::parse(
            WHAT,
            i + 2,
            format!("more than N={n} entries"),
        ));
    }
    Ok(index)
}

pub fn save(path: &Path, index: &RetrievalIndex) -> Result<()> {
    write_atomic(path, encode(index).as_bytes())
}

pub fn load(path: &Path) -> Result<RetrievalIndex> {
    let bytes = read(path)?;
    decode(&String::from_utf8_lossy(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use etc_cbir_core::SplitMix64;

    fn sample(n: usize, m: usize) -> RetrievalIndex {
        let mut rng = SplitMix64::new(n as u64);
        let mut ix = RetrievalIndex::new(m, CodebookId(12345));
        for i in 0..n {
            ix.add(IndexEntry {
                image_id: format!("img{i:03}"),
                owner_info: format!("owner {i}"),
                stored_path: format!("/store/{i}.png"),
                vector: ESimpleVector {
                    values: (0..m).map(|_| rng.next_f64()).collect(),
                    codebook_id: CodebookId(12345),
                },
            })
            .unwrap();
        }
        ix
    }

    #[test]
    fn round_trip_100_entries() {
        let ix = sample(100, 64);
        assert_eq!(decode(&encode(&ix)).unwrap(), ix);
    }

    #[test]
    fn empty_owner_info_survives() {
        let mut ix = RetrievalIndex::new(2, CodebookId(1));
        ix.add(IndexEntry {
            image_id: "a".into(),
            owner_info: String::new(),
            stored_path: String::new(),
            vector: ESimpleVector {
                values: vec![0.0, 1.0],
                codebook_id: CodebookId(1),
            },
        })
        .unwrap();
        assert_eq!(decode(&encode(&ix)).unwrap(), ix);
    }

    #[test]
    fn wrong_magic() {
        let text = encode(&sample(2, 4)).replacen("ESIMPLE-INDEX v1", "ESIMPLE-INDEX v9", 1);
        assert!(matches!(decode(&text), Err(Error::FormatVersion { .. })));
        assert!(matches!(decode(""), Err(Error::FormatVersion { .. })));
    }

    #[test]
    fn truncated() {
        let text = encode(&sample(5, 4));
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(decode(&cut), Err(Error::Truncated { .. })));
        let half = &text[..text.len() - 40];
        assert!(matches!(
            decode(half),
            Err(Error::Truncated { .. }) | Err(Error::Parse { .. })
        ));
    }
}
