//! Local HTTP API over a variant manifest: manifest snapshots, variant images,
//! rating capture and on-demand rankings.
//!
//! | Method | Path | Result |
//! |---|---|---|
//! | GET | `/api/manifest` | manifest JSON with an `ETag`; `304` on `If-None-Match` |
//! | GET | `/api/images/{id}/variants/{method}` | PNG bytes, `404` JSON error if unknown |
//! | POST | `/api/ratings` | `201` + stored record; `422` bad input; `404` unknown variant |
//! | GET | `/api/rankings?method=&scope=&rater=&document=` | ranking reports; `409` if nothing to rank |
//!
//! Reads are served from immutable snapshots. Writes go through a single
//! writer and are persisted (temporary file + rename) before `201` is sent.

use std::future::Future;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, Method as HttpMethod, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;
use tokio::sync::Mutex;
use tower_http::cors::{Any, CorsLayer};

use crate::error::{Error, Result};
use crate::io::{encode_image, load_image, OutputFormat};
use crate::manifest::{now_utc, read_manifest, resolve_path, write_manifest, RatingEntry, VariantManifest};
use crate::rank::{Category, RatingsTable, Scope};
use crate::report::{rank_table, RankMethod, RankingReport, ReportOptions};
use crate::warn::Warning;

pub const DEFAULT_PORT: u16 = 8765;

struct Snapshot {
    manifest: Arc<VariantManifest>,
    json: String,
    etag: String,
}

impl Snapshot {
    fn new(manifest: VariantManifest) -> Self {
        let json = manifest.to_json();
        let etag = format!("\"{}\"", hex::encode(Sha256::digest(json.as_bytes())));
        Snapshot {
            manifest: Arc::new(manifest),
            json,
            etag,
        }
    }
}

/// Shared service state: the current snapshot and the single writer.
pub struct AppState {
    manifest_path: PathBuf,
    snapshot: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
}

impl AppState {
    pub fn load(manifest_path: impl Into<PathBuf>) -> Result<Arc<Self>> {
        let manifest_path = manifest_path.into();
        let manifest = read_manifest(&manifest_path)?;
        Ok(Arc::new(AppState {
            manifest_path,
            snapshot: RwLock::new(Arc::new(Snapshot::new(manifest))),
            writer: Mutex::new(()),
        }))
    }

    fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    pub fn manifest(&self) -> Arc<VariantManifest> {
        self.snapshot().manifest.clone()
    }

    pub fn manifest_path(&self) -> &Path {
        &self.manifest_path
    }

    /// Persists the current snapshot.
    pub async fn flush(&self) -> Result<()> {
        let _guard = self.writer.lock().await;
        let manifest = self.manifest();
        let path = self.manifest_path.clone();
        tokio::task::spawn_blocking(move || write_manifest(&manifest, path))
            .await
            .map_err(|e| Error::Io(std::io::Error::other(e)))?
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: message.into() })).into_response()
}

async fn get_manifest(State(state): State<Arc<AppState>>, headers: HeaderMap) -> Response {
    let snap = state.snapshot();
    let etag = HeaderValue::from_str(&snap.etag).expect("hex etag is a valid header");
    let fresh = headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == snap.etag || t.trim() == "*"));
    if fresh {
        return (StatusCode::NOT_MODIFIED, [(header::ETAG, etag)]).into_response();
    }
    (
        StatusCode::OK,
        [
            (header::ETAG, etag),
            (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
        ],
        snap.json.clone(),
    )
        .into_response()
}

async fn get_variant(
    State(state): State<Arc<AppState>>,
    UrlPath((id, method)): UrlPath<(String, String)>,
) -> Response {
    let manifest = state.manifest();
    let Some(variant) = manifest.find_variant(&id, &method) else {
        return error(StatusCode::NOT_FOUND, format!("no variant for image `{id}` and method `{method}`"));
    };
    let path = resolve_path(&state.manifest_path, &variant.output_path);
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = tokio::task::spawn_blocking(move || -> Result<Vec<u8>> {
        if is_png {
            return Ok(std::fs::read(&path)?);
        }
        let loaded = load_image(&path)?;
        let format = if loaded.bit_depth > 8 { OutputFormat::Png16 } else { OutputFormat::Png8 };
        encode_image(&loaded.image, format)
    })
    .await;
    match bytes {
        Ok(Ok(bytes)) => ([(header::CONTENT_TYPE, "image/png")], bytes).into_response(),
        Ok(Err(e)) => error(StatusCode::NOT_FOUND, format!("variant file unavailable: {e}")),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Body of `POST /api/ratings`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingSubmission {
    pub rater: String,
    pub image_id: String,
    pub method: String,
    pub category: String,
}

async fn post_rating(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let sub: RatingSubmission = match serde_json::from_slice(&body) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid rating submission: {e}")),
    };
    if sub.rater.trim().is_empty() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, "rater must not be empty");
    }
    let category: Category = match sub.category.parse() {
        Ok(c) => c,
        Err(_) => {
            return error(
                StatusCode::UNPROCESSABLE_ENTITY,
                format!("unknown category `{}` (expected X, A, B or N)", sub.category),
            )
        }
    };

    let _guard = state.writer.lock().await;
    let mut manifest = (*state.manifest()).clone();
    let entry = RatingEntry {
        rater: sub.rater,
        image_id: sub.image_id,
        method: sub.method,
        category,
        timestamp: now_utc(),
    };
    if let Err(e) = manifest.upsert_rating(entry.clone()) {
        return error(StatusCode::NOT_FOUND, e.to_string());
    }
    let path = state.manifest_path.clone();
    let persisted = {
        let manifest = manifest.clone();
        tokio::task::spawn_blocking(move || write_manifest(&manifest, path)).await
    };
    match persisted {
        Ok(Ok(())) => {}
        Ok(Err(e)) => return error(StatusCode::INTERNAL_SERVER_ERROR, format!("cannot persist rating: {e}")),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
    *state.snapshot.write().expect("snapshot lock") = Arc::new(Snapshot::new(manifest));
    (StatusCode::CREATED, Json(entry)).into_response()
}

#[derive(Debug, Default, Deserialize)]
pub struct RankingQuery {
    pub method: Option<String>,
    pub scope: Option<String>,
    pub rater: Option<String>,
    pub document: Option<String>,
}

/// Payload shared by `GET /api/rankings` and `rank --json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingResponse {
    pub reports: Vec<RankingReport>,
}

/// Rankings from a manifest's ratings. Unrated cells count as N with a warning.
/// `rater` / `document` restrict the ratings considered.
pub fn manifest_rankings(
    manifest: &VariantManifest,
    method: RankMethod,
    scope: Scope,
    rater: Option<&str>,
    document: Option<&str>,
) -> Result<RankingResponse> {
    let records: Vec<_> = manifest
        .rating_records()
        .into_iter()
        .filter(|r| rater.is_none_or(|x| r.rater == x) && document.is_none_or(|x| r.document == x))
        .collect();
    if records.is_empty() {
        return Err(Error::EmptyInput("no ratings match the requested scope"));
    }
    let mut raters: Vec<String> = Vec::new();
    for r in &records {
        if !raters.contains(&r.rater) {
            raters.push(r.rater.clone());
        }
    }
    let full = manifest.ratings_table();
    let documents: Vec<String> = full
        .documents()
        .iter()
        .filter(|d| document.is_none_or(|x| *d == x))
        .cloned()
        .collect();
    let mut table = RatingsTable::new(raters, documents, full.methods().to_vec());
    for r in &records {
        table.set(&r.rater, &r.document, &r.method, r.category)?;
    }
    let missing = table.fill_missing(Category::N);
    let mut reports = rank_table(&table, method, scope, &ReportOptions::default())?;
    if missing > 0 {
        for rep in &mut reports {
            rep.warnings.insert(0, Warning::MissingCells { count: missing });
        }
    }
    Ok(RankingResponse { reports })
}

async fn get_rankings(State(state): State<Arc<AppState>>, Query(q): Query<RankingQuery>) -> Response {
    let method = match q.method.as_deref().unwrap_or("ensemble").parse::<RankMethod>() {
        Ok(m) => m,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    };
    let scope = match q.scope.as_deref().unwrap_or("overall").parse::<Scope>() {
        Ok(s) => s,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    };
    let manifest = state.manifest();
    match manifest_rankings(&manifest, method, scope, q.rater.as_deref(), q.document.as_deref()) {
        Ok(resp) => Json(resp).into_response(),
        Err(e) => error(StatusCode::CONFLICT, format!("cannot rank: {e}")),
    }
}

/// Router with CORS enabled for any origin (the service binds to loopback).
pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([HttpMethod::GET, HttpMethod::POST])
        .allow_headers(Any)
        .expose_headers([header::ETAG]);
    Router::new()
        .route("/api/manifest", get(get_manifest))
        .route("/api/images/{id}/variants/{method}", get(get_variant))
        .route("/api/ratings", post(post_rating))
        .route("/api/rankings", get(get_rankings))
        .layer(cors)
        .with_state(state)
}

/// Binds the listener; a port already in use is reported as such.
pub async fn bind(addr: SocketAddr) -> Result<TcpListener> {
    TcpListener::bind(addr).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            Error::Io(std::io::Error::new(e.kind(), format!("port {} is already in use", addr.port())))
        } else {
            Error::Io(e)
        }
    })
}

/// Serves until `shutdown` resolves, then persists the manifest.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<()> {
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    state.flush().await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::{ImageRecord, VariantRecord};
    use crate::io::ProfileNote;

    fn manifest() -> VariantManifest {
        let mut m = VariantManifest::new();
        for id in ["d1", "d2"] {
            m.upsert_image(ImageRecord {
                id: id.into(),
                source_path: format!("{id}.png"),
                pixel_dims: [4, 4],
                assumed_profile: ProfileNote::AssumedSrgb,
            });
            for method in ["original", "vividness", "histeq"] {
                m.upsert_variant(VariantRecord {
                    image_id: id.into(),
                    method: method.into(),
                    params_digest: "d".into(),
                    output_path: format!("{id}_{method}.png"),
                })
                .unwrap();
            }
        }
        m
    }

    fn rate(m: &mut VariantManifest, rater: &str, doc: &str, method: &str, c: Category) {
        m.upsert_rating(RatingEntry {
            rater: rater.into(),
            image_id: doc.into(),
            method: method.into(),
            category: c,
            timestamp: now_utc(),
        })
        .unwrap();
    }

    #[test]
    fn rankings_fill_gaps_with_warning() {
        let mut m = manifest();
        rate(&mut m, "ann", "d1", "vividness", Category::X);
        let resp = manifest_rankings(&m, RankMethod::Centroids, Scope::Overall, None, None).unwrap();
        let rep = &resp.reports[0];
        assert_eq!(rep.rows[0].method, "vividness");
        assert_eq!(rep.warnings, vec![Warning::MissingCells { count: 5 }]);
    }

    #[test]
    fn rankings_without_ratings_fail() {
        let m = manifest();
        assert!(manifest_rankings(&m, RankMethod::Mj, Scope::Overall, None, None).is_err());
        let mut m = manifest();
        rate(&mut m, "ann", "d1", "vividness", Category::X);
        assert!(manifest_rankings(&m, RankMethod::Mj, Scope::PerRater, Some("bob"), None).is_err());
        let r = manifest_rankings(&m, RankMethod::Mj, Scope::PerRater, Some("ann"), None).unwrap();
        assert_eq!(r.reports.len(), 1);
        assert_eq!(r.reports[0].label, "ann");
    }

    #[test]
    fn etag_tracks_content() {
        let a = Snapshot::new(manifest());
        let b = Snapshot::new(manifest());
        assert_eq!(a.etag, b.etag);
        let mut m = manifest();
        rate(&mut m, "ann", "d1", "histeq", Category::N);
        assert_ne!(Snapshot::new(m).etag, a.etag);
    }
}
