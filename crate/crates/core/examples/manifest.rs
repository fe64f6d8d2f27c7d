// Builds a variant manifest, records ratings and ranks from it.

use legibility::enhance::{EnhancementRecipe, Method};
use legibility::io::ProfileNote;
use legibility::manifest::{self, ImageRecord, RatingEntry, VariantManifest, VariantRecord};
use legibility::rank::{Category, Scope};
use legibility::report::RankMethod;
use legibility::service::manifest_rankings;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut m = VariantManifest::new();
    m.upsert_image(ImageRecord {
        id: "P.Herc.118".into(),
        source_path: "crops/P.Herc.118.tif".into(),
        pixel_dims: [640, 480],
        assumed_profile: ProfileNote::EmbeddedSrgb,
    });
    for &method in Method::DEFAULT_SET {
        m.upsert_variant(VariantRecord {
            image_id: "P.Herc.118".into(),
            method: method.name().into(),
            params_digest: EnhancementRecipe::new(method).digest(),
            output_path: format!("P.Herc.118_{method}.png"),
        })?;
    }
    let grades = [("lsv", Category::X), ("vividness", Category::A), ("original", Category::B)];
    for rater in ["ann", "bob"] {
        for (method, category) in grades {
            m.upsert_rating(RatingEntry {
                rater: rater.into(),
                image_id: "P.Herc.118".into(),
                method: method.into(),
                category,
                timestamp: manifest::now_utc(),
            })?;
        }
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join(manifest::MANIFEST_FILENAME);
    manifest::write_manifest(&m, &path)?;
    let back = manifest::read_manifest(&path)?;
    println!("{} images, {} variants, {} ratings", back.images.len(), back.variants.len(), back.ratings.len());

    // Unrated variants count as N (no use), with a warning.
    let ranked = manifest_rankings(&back, RankMethod::Mj, Scope::Overall, None, None)?;
    print!("{}", ranked.reports[0].to_text());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("manifest");
}
