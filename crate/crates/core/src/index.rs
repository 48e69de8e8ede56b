//! Exact l2 full-scan index over E-SIMPLE vectors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::codebook::CodebookId;
use crate::error::{Error, Result};
use crate::esimple::ESimpleVector;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub image_id: String,
    pub vector: ESimpleVector,
    /// Opaque owner payload returned alongside results.
    pub owner_info: String,
    pub stored_path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    pub image_id: String,
    pub distance: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalIndex {
    words: usize,
    codebook_id: CodebookId,
    entries: Vec<IndexEntry>,
    by_id: BTreeMap<String, usize>,
}

fn check_field(value: &str, field: &'static str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidField { field });
    }
    Ok(())
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(crate::kmeans::squared_distance(a, b))
}

/// Orders by distance, then image id.
pub fn result_order(a: &RankedResult, b: &RankedResult) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.image_id.cmp(&b.image_id))
}

impl RetrievalIndex {
    pub fn new(words: usize, codebook_id: CodebookId) -> Self {
        Self {
            words,
            codebook_id,
            entries: Vec::new(),
            by_id: BTreeMap::new(),
        }
    }

    /// Vector length expected by this index.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn codebook_id(&self) -> CodebookId {
        self.codebook_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn get(&self, image_id: &str) -> Option<&IndexEntry> {
        self.by_id.get(image_id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.by_id.contains_key(image_id)
    }

    fn check_vector(&self, v: &ESimpleVector) -> Result<()> {
        if v.codebook_id != self.codebook_id {
            return Err(Error::CodebookMismatch {
                expected: self.codebook_id.0,
                actual: v.codebook_id.0,
            });
        }
        if v.len() != self.words {
            return Err(Error::DimensionMismatch {
                expected: self.words,
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Rejects duplicate ids, foreign codebooks and fields that would break
    /// the tab-separated index file.
    pub fn add(&mut self, entry: IndexEntry) -> Result<()> {
        self.check_vector(&entry.vector)?;
        check_field(&entry.image_id, "image_id")?;
        check_field(&entry.owner_info, "owner_info")?;
        check_field(&entry.stored_path, "stored_path")?;
        if entry.image_id.is_empty() {
            return Err(Error::InvalidField { field: "image_id" });
        }
        if self.by_id.contains_key(&entry.image_id) {
            return Err(Error::DuplicateId(entry.image_id));
        }
        self.by_id
            .insert(entry.image_id.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    /// Removes an entry, keeping the insertion order of the rest.
    pub fn remove(&mut self, image_id: &str) -> Option<IndexEntry> {
        let pos = self.by_id.remove(image_id)?;
        let entry = self.entries.remove(pos);
        for slot in self.by_id.values_mut() {
            if *slot > pos {
                *slot -= 1;
            }
        }
        Some(entry)
    }

    /// The `k` nearest entries, sorted by (distance, image id).
    pub fn query(&self, q: &ESimpleVector, k: usize) -> Result<Vec<RankedResult>> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        self.check_vector(q)?;
        let mut scored: Vec<RankedResult> = self
            .entries
            .iter()
            .map(|e| RankedResult {
                image_id: e.image_id.clone(),
                distance: l2_distance(&e.vector.values, &q.values),
                rank: 0,
            })
            .collect();
        scored.sort_by(result_order);
        scored.truncate(k);
        for (i, r) in scored.iter_mut().enumerate() {
            r.rank = i + 1;
        }
        Ok(scored)
    }

    /// Every entry, ranked.
    pub fn rank_all(&self, q: &ESimpleVector) -> Result<Vec<RankedResult>> {
        if self.entries.is_empty() {
            self.check_vector(q)?;
            return Ok(Vec::new());
        }
        self.query(q, self.entries.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(values: Vec<f64>) -> ESimpleVector {
        ESimpleVector {
            values,
            codebook_id: CodebookId(1),
        }
    }

    fn entry(id: &str, values: Vec<f64>) -> IndexEntry {
        IndexEntry {
            image_id: id.into(),
            vector: v(values),
            owner_info: "owner".into(),
            stored_path: "x.png".into(),
        }
    }

    #[test]
    fn add_get_and_duplicates() {
        let mut ix = RetrievalIndex::new(2, CodebookId(1));
        let e = entry("e1", vec![1.0, 0.0]);
        ix.add(e.clone()).unwrap();
        assert_eq!(ix.get("e1"), Some(&e));
        assert_eq!(ix.add(e), Err(Error::DuplicateId("e1".into())));
        let mut foreign = entry("e2", vec![0.0, 1.0]);
        foreign.vector.codebook_id = CodebookId(2);
        assert!(matches!(
            ix.add(foreign),
            Err(Error::CodebookMismatch { .. })
        ));
        assert!(matches!(
            ix.add(entry("e3", vec![0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ix.add(entry("a\tb", vec![0.0, 0.0])),
            Err(Error::InvalidField { .. })
        ));
    }

    #[test]
    fn query_ranks_and_ties() {
        let mut ix = RetrievalIndex::new(2, CodebookId(1));
        ix.add(entry("e2", vec![0.0, 1.0])).unwrap();
        ix.add(entry("e1", vec![1.0, 0.0])).unwrap();
        let r = ix.query(&v(vec![1.0, 0.0]), 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(
            (r[0].image_id.as_str(), r[0].distance, r[0].rank),
            ("e1", 0.0, 1)
        );

        let r = ix.query(&v(vec![0.5, 0.5]), 10).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].image_id, "e1");
        assert_eq!(r[1].image_id, "e2");
        assert_eq!(r[1].rank, 2);
        assert!(ix.query(&v(vec![0.5, 0.5]), 0).is_err());
    }

    #[test]
    fn remove_keeps_lookup_consistent() {
        let mut ix = RetrievalIndex::new(2, CodebookId(1));
        for id in ["a", "b", "c"] {
            ix.add(entry(id, vec![0.0, 1.0])).unwrap();
        }
        assert_eq!(ix.remove("a").unwrap().image_id, "a");
        assert!(ix.remove("a").is_none());
        assert_eq!(ix.get("c").unwrap().image_id, "c");
        assert_eq!(ix.len(), 2);
    }

    #[test]
    fn empty_index_returns_nothing() {
        let ix = RetrievalIndex::new(2, CodebookId(1));
        assert!(ix.query(&v(vec![1.0, 0.0]), 3).unwrap().is_empty());
        assert!(ix.rank_all(&v(vec![1.0, 0.0])).unwrap().is_empty());
    }
}
