//! The variant manifest: source images, generated variants and collected ratings.
//!
//! Stored as pretty-printed JSON with a fixed key order. Relative paths are
//! resolved against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::ProfileNote;
use crate::rank::{Category, RatingRecord, RatingsTable};

pub const MANIFEST_FILENAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: String,
    pub source_path: String,
    /// `[width, height]`.
    pub pixel_dims: [usize; 2],
    pub assumed_profile: ProfileNote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantRecord {
    pub image_id: String,
    pub method: String,
    pub params_digest: String,
    pub output_path: String,
}

fn ser_timestamp<S: Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Millis, true))
}

fn de_timestamp<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DateTime<Utc>, D::Error> {
    let s = String::deserialize(d)?;
    DateTime::parse_from_rfc3339(&s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| serde::de::Error::custom(format!("timestamp `{s}` is not ISO-8601: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingEntry {
    pub rater: String,
    pub image_id: String,
    pub method: String,
    pub category: Category,
    #[serde(serialize_with = "ser_timestamp", deserialize_with = "de_timestamp")]
    pub timestamp: DateTime<Utc>,
}

/// Current time at millisecond precision, as stored in the manifest.
pub fn now_utc() -> DateTime<Utc> {
    let now = Utc::now();
    DateTime::from_timestamp_millis(now.timestamp_millis()).expect("current time is representable")
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct VariantManifest {
    pub images: Vec<ImageRecord>,
    pub variants: Vec<VariantRecord>,
    pub ratings: Vec<RatingEntry>,
}

fn manifest_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Manifest {
        field: field.into(),
        message: message.into(),
    }
}

fn section<T: DeserializeOwned>(root: &mut serde_json::Map<String, Value>, key: &str) -> Result<Vec<T>> {
    let Some(value) = root.remove(key) else {
        return Err(manifest_err(key, "missing"));
    };
    let Value::Array(items) = value else {
        return Err(manifest_err(key, "must be an array"));
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, v)| serde_json::from_value(v).map_err(|e| manifest_err(format!("{key}[{i}]"), e.to_string())))
        .collect()
}

impl VariantManifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses and validates manifest JSON; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(mut root) = value else {
            return Err(manifest_err("<root>", "must be a JSON object"));
        };
        let manifest = VariantManifest {
            images: section(&mut root, "images")?,
            variants: section(&mut root, "variants")?,
            ratings: section(&mut root, "ratings")?,
        };
        if let Some(key) = root.keys().next() {
            return Err(manifest_err(key.as_str(), "unknown field"));
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for (i, img) in self.images.iter().enumerate() {
            if img.id.is_empty() {
                return Err(manifest_err(format!("images[{i}].id"), "must not be empty"));
            }
            if !ids.insert(img.id.as_str()) {
                return Err(manifest_err(format!("images[{i}].id"), format!("duplicate image id `{}`", img.id)));
            }
        }
        let mut keys = HashSet::new();
        for (i, v) in self.variants.iter().enumerate() {
            if !ids.contains(v.image_id.as_str()) {
                return Err(manifest_err(
                    format!("variants[{i}].image_id"),
                    format!("unknown image `{}`", v.image_id),
                ));
            }
            if !keys.insert((v.image_id.as_str(), v.method.as_str(), v.params_digest.as_str())) {
                return Err(manifest_err(
                    format!("variants[{i}]"),
                    format!("duplicate variant ({}, {}, {})", v.image_id, v.method, v.params_digest),
                ));
            }
        }
        let mut rated = HashSet::new();
        for (i, r) in self.ratings.iter().enumerate() {
            if self.find_variant(&r.image_id, &r.method).is_none() {
                return Err(manifest_err(
                    format!("ratings[{i}]"),
                    format!("no variant for image `{}` and method `{}`", r.image_id, r.method),
                ));
            }
            if !rated.insert((r.rater.as_str(), r.image_id.as_str(), r.method.as_str())) {
                return Err(manifest_err(
                    format!("ratings[{i}]"),
                    format!("duplicate rating by `{}` for ({}, {})", r.rater, r.image_id, r.method),
                ));
            }
        }
        Ok(())
    }

    pub fn image(&self, id: &str) -> Option<&ImageRecord> {
        self.images.iter().find(|i| i.id == id)
    }

    /// Adds or replaces the image with the same id.
    pub fn upsert_image(&mut self, record: ImageRecord) {
        match self.images.iter_mut().find(|i| i.id == record.id) {
            Some(slot) => *slot = record,
            None => self.images.push(record),
        }
    }

    /// Adds a variant, replacing one with the same image, method and digest.
    pub fn upsert_variant(&mut self, record: VariantRecord) -> Result<()> {
        if self.image(&record.image_id).is_none() {
            return Err(manifest_err("image_id", format!("unknown image `{}`", record.image_id)));
        }
        let same = |v: &VariantRecord| {
            v.image_id == record.image_id && v.method == record.method && v.params_digest == record.params_digest
        };
        match self.variants.iter_mut().find(|v| same(v)) {
            Some(slot) => *slot = record,
            None => self.variants.push(record),
        }
        Ok(())
    }

    /// Most recently added variant for an image and method.
    pub fn find_variant(&self, image_id: &str, method: &str) -> Option<&VariantRecord> {
        self.variants
            .iter()
            .rev()
            .find(|v| v.image_id == image_id && v.method == method)
    }

    /// Stores a rating, replacing an earlier one by the same rater for the same variant.
    /// Returns whether a rating was replaced.
    pub fn upsert_rating(&mut self, entry: RatingEntry) -> Result<bool> {
        if self.find_variant(&entry.image_id, &entry.method).is_none() {
            return Err(manifest_err(
                "method",
                format!("no variant for image `{}` and method `{}`", entry.image_id, entry.method),
            ));
        }
        let slot = self
            .ratings
            .iter_mut()
            .find(|r| r.rater == entry.rater && r.image_id == entry.image_id && r.method == entry.method);
        Ok(match slot {
            Some(slot) => {
                *slot = entry;
                true
            }
            None => {
                self.ratings.push(entry);
                false
            }
        })
    }

    /// Distinct variant methods in order of first appearance.
    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for v in &self.variants {
            if !out.contains(&v.method) {
                out.push(v.method.clone());
            }
        }
        out
    }

    /// Ratings grid over every rater, every image with variants, and every variant method.
    /// Cells without a rating stay empty.
    pub fn ratings_table(&self) -> RatingsTable {
        let mut raters: Vec<String> = Vec::new();
        for r in &self.ratings {
            if !raters.contains(&r.rater) {
                raters.push(r.rater.clone());
            }
        }
        let documents: Vec<String> = self
            .images
            .iter()
            .filter(|i| self.variants.iter().any(|v| v.image_id == i.id))
            .map(|i| i.id.clone())
            .collect();
        let mut table = RatingsTable::new(raters, documents, self.methods());
        for r in &self.ratings {
            table
                .set(&r.rater, &r.image_id, &r.method, r.category)
                .expect("validated ratings reference known variants");
        }
        table
    }

    pub fn rating_records(&self) -> Vec<RatingRecord> {
        self.ratings
            .iter()
            .map(|r| RatingRecord {
                rater: r.rater.clone(),
                document: r.image_id.clone(),
                method: r.method.clone(),
                category: r.category,
            })
            .collect()
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<VariantManifest> {
    VariantManifest::from_json(&fs::read_to_string(path)?)
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_manifest(manifest: &VariantManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    manifest.validate()?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(manifest.to_json().as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Resolves a manifest path entry against the manifest's directory.
pub fn resolve_path(manifest_path: &Path, entry: &str) -> PathBuf {
    let p = Path::new(entry);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}
