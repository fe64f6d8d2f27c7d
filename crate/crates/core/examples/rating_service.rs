// Drives the rating API in-process: fetch the manifest, post a rating, read rankings.
//
// `legibility serve --out <dir>` exposes the same router on loopback.

use axum::body::Body;
use axum::http::{header, Request};
use http_body_util::BodyExt;
use legibility::io::ProfileNote;
use legibility::manifest::{self, ImageRecord, VariantManifest, VariantRecord};
use legibility::service::{router, AppState};
use tower::ServiceExt;

async fn call(app: &axum::Router, req: Request<Body>) -> Result<(u16, String), Box<dyn std::error::Error>> {
    let resp = app.clone().oneshot(req).await?;
    let status = resp.status().as_u16();
    let body = resp.into_body().collect().await?.to_bytes();
    Ok((status, String::from_utf8_lossy(&body).into_owned()))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut m = VariantManifest::new();
    m.upsert_image(ImageRecord {
        id: "doc".into(),
        source_path: "doc.png".into(),
        pixel_dims: [8, 8],
        assumed_profile: ProfileNote::AssumedSrgb,
    });
    for method in ["original", "lsv"] {
        m.upsert_variant(VariantRecord {
            image_id: "doc".into(),
            method: method.into(),
            params_digest: "00".into(),
            output_path: format!("doc_{method}.png"),
        })?;
    }
    let path = dir.path().join(manifest::MANIFEST_FILENAME);
    manifest::write_manifest(&m, &path)?;
    let app = router(AppState::load(&path)?);

    let rt = tokio::runtime::Builder::new_current_thread().build()?;
    rt.block_on(async {
        let (status, body) = call(&app, Request::get("/api/manifest").body(Body::empty())?).await?;
        println!("GET /api/manifest -> {status}, {} bytes", body.len());

        for (method, category) in [("lsv", "X"), ("original", "B")] {
            let json = format!(r#"{{"rater":"ann","image_id":"doc","method":"{method}","category":"{category}"}}"#);
            let req = Request::post("/api/ratings").header(header::CONTENT_TYPE, "application/json").body(Body::from(json))?;
            let (status, _) = call(&app, req).await?;
            println!("POST /api/ratings {method}={category} -> {status}");
        }

        let (status, body) = call(&app, Request::get("/api/rankings?method=centroids").body(Body::empty())?).await?;
        println!("GET /api/rankings -> {status}\n{body}");
        Ok::<_, Box<dyn std::error::Error>>(())
    })?;
    println!("manifest on disk now holds {} ratings", manifest::read_manifest(&path)?.ratings.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("rating_service");
}
