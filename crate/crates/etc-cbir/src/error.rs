use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] etc_cbir_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image decode failed: {0}")]
    Image(#[from] image::ImageError),
    #[error("{what}: expected header {expected:?}")]
    FormatVersion {
        what: &'static str,
        expected: &'static str,
    },
    #[error("{what}: file is truncated ({detail})")]
    Truncated { what: &'static str, detail: String },
    #[error("{what}, line {line}: {detail}")]
    Parse {
        what: &'static str,
        line: usize,
        detail: String,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: &'static str, line: usize, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            line,
            detail: detail.into(),
        }
    }
}

/// Reads a whole file, tagging errors with the path.
pub(crate) fn read(path: &std::path::Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes via a sibling temp file and rename so readers never observe a
/// partial file.
pub(crate) fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
