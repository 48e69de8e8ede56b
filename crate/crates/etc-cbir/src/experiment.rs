//! Retrieval experiments: build a codebook from an independent image set,
//! index a labelled corpus (optionally encrypted with per-image owner keys),
//! rank every query against every stored image and score AP/mAP.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use etc_cbir_core::codebook::build_codebook;
use etc_cbir_core::prng::fisher_yates;
use etc_cbir_core::{
    average_precision, encrypt, esimple, keygen, mean_average_precision, Codebook,
    DescriptorParams, IndexEntry, KMeansConfig, KeySet, Raster, RetrievalIndex, SplitMix64,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io;
use crate::manifest::Manifest;

#[derive(Debug, Clone)]
pub struct CorpusImage {
    pub id: String,
    pub group: String,
    pub raster: Raster,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub words: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
    pub params: DescriptorParams,
    /// Label echoed in the report, usually the training directory.
    pub codebook_source: String,
}

impl ExperimentConfig {
    pub fn new(words: usize, seed: u64, codebook_source: impl Into<String>) -> Self {
        let km = KMeansConfig::new(words, seed);
        Self {
            words,
            seed,
            max_iters: km.max_iters,
            tol: km.tol,
            params: DescriptorParams::default(),
            codebook_source: codebook_source.into(),
        }
    }

    pub fn kmeans(&self) -> KMeansConfig {
        KMeansConfig {
            clusters: self.words,
            seed: self.seed,
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }
}

/// One owner key per stored image and one user key per query.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentKeys {
    pub owner: Vec<KeySet>,
    pub user: Vec<KeySet>,
}

impl ExperimentKeys {
    /// Owner keys from `SplitMix64(seed)`, user keys from `SplitMix64(!seed)`,
    /// each passed through `keygen`.
    pub fn from_seed(seed: u64, images: usize, queries: usize) -> Self {
        let mut owner = SplitMix64::new(seed);
        let mut user = SplitMix64::new(!seed);
        Self {
            owner: (0..images).map(|_| keygen(owner.next_u64())).collect(),
            user: (0..queries).map(|_| keygen(user.next_u64())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAp {
    pub id: String,
    pub ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub map: f64,
    pub per_query: Vec<QueryAp>,
    pub m: usize,
    pub codebook_source: String,
    pub seed: u64,
    pub encrypted: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ApReport,
    /// Full ranked id list for each query, in query order.
    pub rankings: Vec<Vec<String>>,
    pub codebook: Codebook,
}

fn prepare(raster: &Raster, key: Option<KeySet>) -> Result<Raster> {
    let aligned = raster.crop_to_block_multiple()?;
    Ok(match key {
        Some(k) => encrypt(&aligned, k)?,
        None => aligned,
    })
}

/// Ranks and scores against an existing codebook.
pub fn evaluate(
    corpus: &[CorpusImage],
    queries: &[String],
    cb: &Codebook,
    keys: Option<&ExperimentKeys>,
) -> Result<(Vec<QueryAp>, Vec<Vec<String>>)> {
    if let Some(k) = keys {
        if k.owner.len() != corpus.len() || k.user.len() != queries.len() {
            return Err(Error::Manifest(
                "key count does not match corpus/query count".into(),
            ));
        }
    }
    let vectors: Vec<_> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, img)| -> Result<_> {
            Ok(esimple(
                &prepare(&img.raster, keys.map(|k| k.owner[i]))?,
                cb,
            )?)
        })
        .collect::<Result<_>>()?;

    let mut index = RetrievalIndex::new(cb.len(), cb.id);
    let mut by_id = BTreeMap::new();
    for (i, (img, v)) in corpus.iter().zip(vectors).enumerate() {
        index.add(IndexEntry {
            image_id: img.id.clone(),
            vector: v,
            owner_info: String::new(),
            stored_path: String::new(),
        })?;
        by_id.insert(img.id.as_str(), i);
    }

    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for img in corpus {
        groups
            .entry(img.group.as_str())
            .or_default()
            .push(img.id.as_str());
    }

    let per_query: Vec<(QueryAp, Vec<String>)> = queries
        .par_iter()
        .enumerate()
        .map(|(qi, qid)| -> Result<_> {
            let &i = by_id
                .get(qid.as_str())
                .ok_or_else(|| Error::Manifest(format!("query {qid:?} not in corpus")))?;
            let q = esimple(&prepare(&corpus[i].raster, keys.map(|k| k.user[qi]))?, cb)?;
            let ranking: Vec<String> = index
                .rank_all(&q)?
                .into_iter()
                .map(|r| r.image_id)
                .collect();
            let ap = average_precision(&ranking, &groups[corpus[i].group.as_str()])?;
            Ok((
                QueryAp {
                    id: qid.clone(),
                    ap,
                },
                ranking,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(per_query.into_iter().unzip())
}

/// Builds a codebook from `training`, then runs [`evaluate`].
pub fn run_on_rasters(
    corpus: &[CorpusImage],
    queries: &[String],
    training: &[Raster],
    cfg: &ExperimentConfig,
    keys: Option<&ExperimentKeys>,
) -> Result<ExperimentOutcome> {
    let (cb, _) = build_codebook(training, &cfg.params, &cfg.kmeans(), &cfg.codebook_source)?;
    let (cb, _) = crate::codebook_file::seal(cb);
    let (per_query, rankings) = evaluate(corpus, queries, &cb, keys)?;
    let aps: Vec<f64> = per_query.iter().map(|q| q.ap).collect();
    Ok(ExperimentOutcome {
        report: ApReport {
            map: mean_average_precision(&aps)?,
            per_query,
            m: cfg.words,
            codebook_source: cfg.codebook_source.clone(),
            seed: cfg.seed,
            encrypted: keys.is_some(),
        },
        rankings,
        codebook: cb,
    })
}

/// Image files (png/jpg/jpeg) directly inside `dir`, sorted by name.
pub fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_images(paths: &[PathBuf]) -> Result<Vec<Raster>> {
    paths.par_iter().map(|p| image_io::load(p)).collect()
}

/// Manifest-driven experiment with a codebook trained on `codebook_source`.
/// When `key_seed` is set, stored images and queries are encrypted with keys
/// from [`ExperimentKeys::from_seed`].
pub fn run_experiment(
    manifest: &Manifest,
    codebook_source: &Path,
    cfg: &ExperimentConfig,
    key_seed: Option<u64>,
) -> Result<ExperimentOutcome> {
    let training = load_images(&image_files(codebook_source)?)?;
    let paths: Vec<PathBuf> = manifest.entries.iter().map(|e| e.path.clone()).collect();
    let corpus: Vec<CorpusImage> = load_images(&paths)?
        .into_iter()
        .zip(&manifest.entries)
        .map(|(raster, e)| CorpusImage {
            id: e.id.clone(),
            group: e.group.clone(),
            raster,
        })
        .collect();
    let keys = key_seed.map(|s| ExperimentKeys::from_seed(s, corpus.len(), manifest.queries.len()));
    run_on_rasters(&corpus, &manifest.queries, &training, cfg, keys.as_ref())
}

/// mAP when every query's ranking is an independent random shuffle of the
/// corpus.
pub fn shuffled_baseline(corpus: &[CorpusImage], queries: &[String], seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for img in corpus {
        groups
            .entry(img.group.as_str())
            .or_default()
            .push(img.id.as_str());
    }
    let mut aps = Vec::with_capacity(queries.len());
    for q in queries {
        let img = corpus
            .iter()
            .find(|c| &c.id == q)
            .ok_or_else(|| Error::Manifest(format!("query {q:?} not in corpus")))?;
        let mut ranking: Vec<&str> = corpus.iter().map(|c| c.id.as_str()).collect();
        fisher_yates(&mut ranking, &mut rng);
        aps.push(average_precision(&ranking, &groups[img.group.as_str()])?);
    }
    Ok(mean_average_precision(&aps)?)
}
