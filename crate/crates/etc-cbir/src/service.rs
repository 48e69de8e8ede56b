//! The untrusted third party as an HTTP service.
//!
//! It stores encrypted uploads, computes their E-SIMPLE vectors with a
//! codebook trained on independent plain images, and answers queries by l2
//! ranking. It never sees a key: nothing here can turn a stored image back
//! into its plain form.
//!
//! Endpoints:
//! * `POST /images`: multipart `image`, `image_id`, `owner_info` -> 201
//! * `POST /query`: multipart `image`, optional `k` -> ranked results
//! * `GET /images/{id}`: stored bytes as uploaded
//! * `GET /health`

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::{DefaultBodyLimit, Multipart, Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use etc_cbir_core::{esimple, Codebook, ESimpleVector, IndexEntry, RetrievalIndex};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::{codebook_file, image_io, index_file};

pub const DEFAULT_TOP_K: usize = 10;
const MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub codebook: PathBuf,
    /// Index file, created on first upload when missing.
    pub index: PathBuf,
    pub storage: PathBuf,
    pub top_k: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            codebook: PathBuf::from("codebook.txt"),
            index: PathBuf::from("index.txt"),
            storage: PathBuf::from("storage"),
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl ServiceConfig {
    /// Applies `key=value` lines (`listen`, `codebook`, `index`, `storage`,
    /// `top_k`). Blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        const WHAT: &str = "service config";
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(WHAT, i + 1, "expected key=value"))?;
            let v = v.trim();
            match k.trim() {
                "listen" => {
                    self.listen = v
                        .parse()
                        .map_err(|e| Error::parse(WHAT, i + 1, format!("listen: {e}")))?
                }
                "codebook" => self.codebook = v.into(),
                "index" => self.index = v.into(),
                "storage" => self.storage = v.into(),
                "top_k" => {
                    self.top_k = v
                        .parse()
                        .map_err(|e| Error::parse(WHAT, i + 1, format!("top_k: {e}")))?
                }
                other => return Err(Error::parse(WHAT, i + 1, format!("unknown key {other:?}"))),
            }
        }
        Ok(())
    }
}

pub struct AppState {
    codebook: Codebook,
    index: RwLock<RetrievalIndex>,
    index_path: PathBuf,
    storage: PathBuf,
    top_k: usize,
}

impl AppState {
    /// Loads the codebook and, if present, the index; checks they agree.
    pub fn open(cfg: &ServiceConfig) -> Result<Self> {
        let codebook = codebook_file::load(&cfg.codebook)?;
        let index = if cfg.index.exists() {
            let ix = index_file::load(&cfg.index)?;
            if ix.codebook_id() != codebook.id || ix.words() != codebook.len() {
                return Err(etc_cbir_core::Error::CodebookMismatch {
                    expected: codebook.id.0,
                    actual: ix.codebook_id().0,
                }
                .into());
            }
            ix
        } else {
            RetrievalIndex::new(codebook.len(), codebook.id)
        };
        std::fs::create_dir_all(&cfg.storage).map_err(|e| Error::io(&cfg.storage, e))?;
        Ok(Self {
            codebook,
            index: RwLock::new(index),
            index_path: cfg.index.clone(),
            storage: cfg.storage.clone(),
            top_k: cfg.top_k.max(1),
        })
    }

    /// Copy of the current index.
    pub fn snapshot(&self) -> RetrievalIndex {
        self.index.read().expect("index lock poisoned").clone()
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }
}

#[derive(Debug)]
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Default)]
struct Form {
    image: Option<Vec<u8>>,
    fields: Vec<(String, String)>,
}

impl Form {
    fn text(&self, name: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

async fn read_form(mut mp: Multipart) -> ApiResult<Form> {
    let mut form = Form::default();
    while let Some(field) = mp
        .next_field()
        .await
        .map_err(|e| bad_request(format!("multipart: {e}")))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field
            .bytes()
            .await
            .map_err(|e| bad_request(format!("multipart field {name}: {e}")))?;
        if name == "image" {
            form.image = Some(bytes.to_vec());
        } else {
            let text = String::from_utf8(bytes.to_vec())
                .map_err(|_| bad_request(format!("field {name} is not UTF-8")))?;
            form.fields.push((name, text));
        }
    }
    Ok(form)
}

struct Described {
    vector: ESimpleVector,
    lossy: bool,
    format: image::ImageFormat,
}

/// Decodes an upload and computes its descriptor off the async runtime.
async fn describe(state: &Arc<AppState>, bytes: Arc<Vec<u8>>) -> ApiResult<Described> {
    let state = state.clone();
    tokio::task::spawn_blocking(move || -> ApiResult<Described> {
        let decoded = image_io::decode(&bytes).map_err(|e| bad_request(e.to_string()))?;
        let aligned = decoded
            .raster
            .crop_to_block_multiple()
            .map_err(|e| bad_request(e.to_string()))?;
        let vector = esimple(&aligned, &state.codebook).map_err(internal)?;
        Ok(Described {
            vector,
            lossy: decoded.lossy,
            format: decoded.format,
        })
    })
    .await
    .map_err(internal)?
}

fn storage_name(image_id: &str, format: image::ImageFormat) -> String {
    let hex: String = image_id.bytes().map(|b| format!("{b:02x}")).collect();
    format!("{hex}.{}", image_io::file_extension(format))
}

#[derive(Serialize)]
struct Uploaded {
    image_id: String,
    stored_path: String,
    lossy: bool,
}

async fn upload(State(state): State<Arc<AppState>>, mp: Multipart) -> ApiResult<Response> {
    let form = read_form(mp).await?;
    let image_id = form
        .text("image_id")
        .filter(|s| !s.is_empty())
        .ok_or_else(|| bad_request("missing image_id"))?
        .to_string();
    let owner_info = form.text("owner_info").unwrap_or_default().to_string();
    let bytes = Arc::new(form.image.ok_or_else(|| bad_request("missing image"))?);

    if state
        .index
        .read()
        .expect("index lock poisoned")
        .contains(&image_id)
    {
        return Err(ApiError(
            StatusCode::CONFLICT,
            format!("duplicate id {image_id:?}"),
        ));
    }
    let described = describe(&state, bytes.clone()).await?;
    let lossy = described.lossy;

    let st = state.clone();
    let id = image_id.clone();
    let stored_path = tokio::task::spawn_blocking(move || -> ApiResult<String> {
        let path = st.storage.join(storage_name(&id, described.format));
        let stored = path.to_string_lossy().into_owned();
        let mut index = st.index.write().expect("index lock poisoned");
        index
            .add(IndexEntry {
                image_id: id.clone(),
                vector: described.vector,
                owner_info,
                stored_path: stored.clone(),
            })
            .map_err(|e| match e {
                etc_cbir_core::Error::DuplicateId(_) => {
                    ApiError(StatusCode::CONFLICT, e.to_string())
                }
                other => bad_request(other.to_string()),
            })?;
        let persisted = std::fs::write(&path, bytes.as_slice())
            .map_err(|e| Error::io(&path, e))
            .and_then(|_| index_file::save(&st.index_path, &index));
        if let Err(e) = persisted {
            index.remove(&id);
            return Err(internal(e));
        }
        Ok(stored)
    })
    .await
    .map_err(internal)??;

    tracing::info!(image_id = %image_id, lossy, "stored upload");
    Ok((
        StatusCode::CREATED,
        Json(Uploaded {
            image_id,
            stored_path,
            lossy,
        }),
    )
        .into_response())
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct QueryHit {
    pub rank: usize,
    pub image_id: String,
    pub owner_info: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct QueryResponse {
    pub results: Vec<QueryHit>,
    pub k: usize,
    pub lossy: bool,
}

async fn query(
    State(state): State<Arc<AppState>>,
    mp: Multipart,
) -> ApiResult<Json<QueryResponse>> {
    let form = read_form(mp).await?;
    let k = match form.text("k") {
        Some(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| bad_request(format!("bad k {s:?}")))?,
        None => state.top_k,
    };
    let bytes = Arc::new(form.image.ok_or_else(|| bad_request("missing image"))?);
    let described = describe(&state, bytes).await?;

    let index = state.index.read().expect("index lock poisoned");
    let results = index
        .query(&described.vector, k)
        .map_err(internal)?
        .into_iter()
        .map(|r| QueryHit {
            owner_info: index
                .get(&r.image_id)
                .map(|e| e.owner_info.clone())
                .unwrap_or_default(),
            rank: r.rank,
            image_id: r.image_id,
            distance: r.distance,
        })
        .collect();
    Ok(Json(QueryResponse {
        results,
        k,
        lossy: described.lossy,
    }))
}

async fn fetch(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Response> {
    let stored = state
        .index
        .read()
        .expect("index lock poisoned")
        .get(&id)
        .map(|e| e.stored_path.clone())
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown id {id:?}")))?;
    let bytes = tokio::fs::read(&stored).await.map_err(internal)?;
    let mime = image::guess_format(&bytes)
        .map(|f| f.to_mime_type())
        .unwrap_or("application/octet-stream");
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/images", post(upload))
        .route("/images/{id}", get(fetch))
        .route("/query", post(query))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

pub async fn serve(cfg: ServiceConfig) -> anyhow::Result<()> {
    let state = Arc::new(AppState::open(&cfg)?);
    let listener = tokio::net::TcpListener::bind(cfg.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, words = state.codebook.len(), "serving");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// Reads the file named by `ETC_CBIR_CONFIG`, if set.
pub fn config_from_env(base: ServiceConfig) -> Result<ServiceConfig> {
    let mut cfg = base;
    if let Some(path) = std::env::var_os("ETC_CBIR_CONFIG") {
        let path = Path::new(&path);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_kv(&text)?;
    }
    Ok(cfg)
}
