//! Evaluation manifests: two-column CSV `path,group_id`, header optional.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use crate::error::{read, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path exactly as written in the manifest; doubles as the image id.
    pub id: String,
    pub path: PathBuf,
    pub group: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// Query image ids; by default the first listed member of each group.
    pub queries: Vec<String>,
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let queries = first_of_each_group(&entries);
        Self::with_queries(entries, queries)
    }

    pub fn with_queries(entries: Vec<ManifestEntry>, queries: Vec<String>) -> Result<Self> {
        let mut ids = HashSet::new();
        for e in &entries {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::Manifest(format!("duplicate entry {:?}", e.id)));
            }
        }
        if let Some(q) = queries.iter().find(|q| !ids.contains(q.as_str())) {
            return Err(Error::Manifest(format!("query {q:?} is not an entry")));
        }
        Ok(Self { entries, queries })
    }

    /// Ids in each group, in manifest order.
    pub fn groups(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.entries {
            out.entry(e.group.as_str()).or_default().push(e.id.as_str());
        }
        out
    }

    pub fn group_of(&self, id: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.group.as_str())
    }

    /// Parses CSV text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Manifest(e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::Manifest(format!(
                    "row {}: expected path,group_id",
                    i + 1
                )));
            }
            if i == 0 && &rec[0] == "path" && &rec[1] == "group_id" {
                continue;
            }
            let id = rec[0].to_string();
            entries.push(ManifestEntry {
                path: base.join(&id),
                id,
                group: rec[1].to_string(),
            });
        }
        if entries.is_empty() {
            return Err(Error::Manifest("no entries".into()));
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&String::from_utf8_lossy(&bytes), base)
    }
}

fn first_of_each_group(entries: &[ManifestEntry]) -> Vec<String> {
    let mut seen = HashSet::new();
    entries
        .iter()
        .filter(|e| seen.insert(e.group.as_str()))
        .map(|e| e.id.clone())
        .collect()
}
