//! Text codebook files.
//!
//! ```text
//! ESIMPLE-CODEBOOK v1 M=<M> D=<D> SEED=<seed> [IMAGES=<n> ITERS=<n> LABEL=<label>]
//! PARAMS vb=<..> vw=<..> s=<..> te=<..> hb=<..>
//! <M lines of D space-separated floats>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a load reproduces the
//! words bit for bit. The codebook id is the FNV-1a hash of the file bytes.

use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use etc_cbir_core::{Codebook, CodebookId, DescriptorParams, TrainMeta};

use crate::error::{read, write_atomic, Error, Result};

const MAGIC: &str = "ESIMPLE-CODEBOOK v1";
const WHAT: &str = "codebook";

pub fn encode(cb: &Codebook) -> String {
    let p = &cb.params;
    let label: String = cb
        .meta
        .label
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    let mut out = format!(
        "{MAGIC} M={} D={} SEED={} IMAGES={} ITERS={} LABEL={}\n",
        cb.len(),
        cb.dim(),
        cb.meta.seed,
        cb.meta.images,
        cb.meta.iterations,
        label
    );
    let _ = writeln!(
        out,
        "PARAMS vb={} vw={} s={} te={} hb={}",
        p.achromatic_v_black, p.achromatic_v_white, p.achromatic_s, p.edge_threshold, p.hue_bins
    );
    for w in &cb.words {
        let mut first = true;
        for v in w {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

fn fields<'a>(line: &'a str, prefix: &str, lineno: usize) -> Result<HashMap<&'a str, &'a str>> {
    let rest = line.strip_prefix(prefix).ok_or(Error::FormatVersion {
        what: WHAT,
        expected: MAGIC,
    })?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=').ok_or_else(|| {
                Error::parse(WHAT, lineno, format!("expected key=value, got {kv:?}"))
            })
        })
        .collect()
}

fn num<T: std::str::FromStr>(map: &HashMap<&str, &str>, key: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = map
        .get(key)
        .ok_or_else(|| Error::parse(WHAT, line, format!("missing {key}")))?;
    raw.parse()
        .map_err(|e| Error::parse(WHAT, line, format!("{key}={raw}: {e}")))
}

/// Parses a codebook and stamps it with the hash of `text`.
pub fn decode(text: &str) -> Result<Codebook> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Truncated {
        what: WHAT,
        detail: "empty file".into(),
    })?;
    if !header.starts_with(MAGIC) {
        return Err(Error::FormatVersion {
            what: WHAT,
            expected: MAGIC,
        });
    }
    let h = fields(header, MAGIC, 1)?;
    let m: usize = num(&h, "M", 1)?;
    let d: usize = num(&h, "D", 1)?;
    let meta = TrainMeta {
        seed: num(&h, "SEED", 1)?,
        images: if h.contains_key("IMAGES") {
            num(&h, "IMAGES", 1)?
        } else {
            0
        },
        iterations: if h.contains_key("ITERS") {
            num(&h, "ITERS", 1)?
        } else {
            0
        },
        label: h.get("LABEL").map(|s| s.to_string()).unwrap_or_default(),
    };

    let params_line = lines.next().ok_or(Error::Truncated {
        what: WHAT,
        detail: "missing PARAMS line".into(),
    })?;
    let p = fields(params_line, "PARAMS", 2)
        .map_err(|_| Error::parse(WHAT, 2, "expected PARAMS line"))?;
    let params = DescriptorParams {
        achromatic_v_black: num(&p, "vb", 2)?,
        achromatic_v_white: num(&p, "vw", 2)?,
        achromatic_s: num(&p, "s", 2)?,
        edge_threshold: num(&p, "te", 2)?,
        hue_bins: num(&p, "hb", 2)?,
    };
    if params.hue_bins == 0 {
        return Err(Error::parse(WHAT, 2, "hb must be positive"));
    }
    if d != params.dim() {
        return Err(Error::parse(
            WHAT,
            1,
            format!("D={d} but PARAMS imply {}", params.dim()),
        ));
    }

    let mut words = Vec::with_capacity(m);
    for (i, line) in lines.enumerate() {
        let lineno = i + 3;
        if line.trim().is_empty() {
            continue;
        }
        if words.len() == m {
            return Err(Error::parse(WHAT, lineno, format!("more than M={m} words")));
        }
        let w = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(WHAT, lineno, e.to_string()))?;
        if w.len() != d {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("word has {} components, expected D={d}", w.len()),
            ));
        }
        words.push(w);
    }
    if words.len() != m {
        return Err(Error::Truncated {
            what: WHAT,
            detail: format!("{} of M={m} words present", words.len()),
        });
    }
    Ok(Codebook::new(words, params, meta)?.with_id(CodebookId::of_bytes(text.as_bytes())))
}

/// Serializes, and returns the codebook stamped with the id of that text.
pub fn seal(cb: Codebook) -> (Codebook, String) {
    let text = encode(&cb);
    let id = CodebookId::of_bytes(text.as_bytes());
    (cb.with_id(id), text)
}

pub fn save(path: &Path, cb: Codebook) -> Result<Codebook> {
    let (cb, text) = seal(cb);
    write_atomic(path, text.as_bytes())?;
    Ok(cb)
}

pub fn load(path: &Path) -> Result<Codebook> {
    let bytes = read(path)?;
    let text =
        String::from_utf8(bytes).map_err(|e| Error::parse(WHAT, 0, format!("not UTF-8: {e}")))?;
    decode(&text)
}
