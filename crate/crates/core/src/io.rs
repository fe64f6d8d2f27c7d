//! Image decoding and encoding with colour-profile handling.
//!
//! Inputs are normalised to `[0, 1]` sRGB-encoded planes. Embedded sRGB
//! profiles pass through; other RGB matrix-shaper profiles are converted to
//! sRGB; anything else is assumed sRGB with a note. Outputs always carry an
//! embedded sRGB profile.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Seek, Write};
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::codecs::tiff::{TiffDecoder, TiffEncoder};
use image::{DynamicImage, ExtendedColorType, ImageDecoder, ImageEncoder, ImageFormat, ImageReader};
use moxcms::{ColorProfile, DataColorSpace, Layout, TransformOptions, Xyzd};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{ColorEncoding, Plane, PlanarImage};

static SRGB_ICC: LazyLock<Vec<u8>> =
    LazyLock::new(|| ColorProfile::new_srgb().encode().expect("built-in sRGB profile encodes"));

/// The ICC profile embedded in every written file.
pub fn srgb_icc_profile() -> &'static [u8] {
    &SRGB_ICC
}

/// How the colour space of a decoded file was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileNote {
    /// No embedded profile; sRGB assumed.
    AssumedSrgb,
    /// Embedded profile matches sRGB.
    EmbeddedSrgb,
    /// Embedded RGB matrix-shaper profile, converted to sRGB on load.
    Converted,
    /// Embedded profile could not be used; sRGB assumed.
    UnsupportedAssumedSrgb,
}

impl ProfileNote {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileNote::AssumedSrgb => "assumed-srgb",
            ProfileNote::EmbeddedSrgb => "embedded-srgb",
            ProfileNote::Converted => "converted",
            ProfileNote::UnsupportedAssumedSrgb => "unsupported-assumed-srgb",
        }
    }
}

impl fmt::Display for ProfileNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct LoadedImage {
    pub image: PlanarImage,
    pub profile: ProfileNote,
    pub bit_depth: u8,
}

fn decode_error(path: &Path, source: image::ImageError) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        source,
    }
}

fn open_decoder(path: &Path) -> Result<(DynamicImage, Option<Vec<u8>>)> {
    let reader = ImageReader::open(path)?
        .with_guessed_format()
        .map_err(Error::Io)?;
    if reader.format() == Some(ImageFormat::Tiff) {
        // ImageReader applies decoder limits, which hides the TIFF ICC tag.
        let mut decoder = TiffDecoder::new(BufReader::new(File::open(path)?)).map_err(|e| decode_error(path, e))?;
        let icc = decoder.icc_profile().map_err(|e| decode_error(path, e))?;
        let img = DynamicImage::from_decoder(decoder).map_err(|e| decode_error(path, e))?;
        return Ok((img, icc));
    }
    let mut decoder = reader.into_decoder().map_err(|e| decode_error(path, e))?;
    let icc = decoder.icc_profile().map_err(|e| decode_error(path, e))?;
    let img = DynamicImage::from_decoder(decoder).map_err(|e| decode_error(path, e))?;
    Ok((img, icc))
}

/// Interleaved RGB in `[0, 1]` plus the source bit depth.
fn normalized_rgb(img: DynamicImage, path: &Path) -> Result<(Vec<f64>, u8)> {
    use DynamicImage as D;
    match img {
        D::ImageLuma8(_) | D::ImageLumaA8(_) | D::ImageRgb8(_) | D::ImageRgba8(_) => {
            Ok((img.to_rgb8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect(), 8))
        }
        D::ImageLuma16(_) | D::ImageLumaA16(_) | D::ImageRgb16(_) | D::ImageRgba16(_) => {
            Ok((img.to_rgb16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(), 16))
        }
        other => Err(Error::UnsupportedBitDepth {
            path: path.to_path_buf(),
            detail: format!("{:?} (only 8- and 16-bit integer images are supported)", other.color()),
        }),
    }
}

fn close(a: Xyzd, b: Xyzd) -> bool {
    (a.x - b.x).abs() < 1e-3 && (a.y - b.y).abs() < 1e-3 && (a.z - b.z).abs() < 1e-3
}

fn is_srgb(p: &ColorProfile) -> bool {
    let s = ColorProfile::new_srgb();
    close(p.red_colorant, s.red_colorant)
        && close(p.green_colorant, s.green_colorant)
        && close(p.blue_colorant, s.blue_colorant)
}

/// Applies an embedded profile to interleaved RGB in place.
fn apply_profile(icc: &[u8], rgb: &mut [f64]) -> ProfileNote {
    let Ok(profile) = ColorProfile::new_from_slice(icc) else {
        log::warn!("embedded ICC profile could not be parsed; assuming sRGB");
        return ProfileNote::UnsupportedAssumedSrgb;
    };
    if profile.color_space != DataColorSpace::Rgb || !profile.is_matrix_shaper() {
        log::warn!("embedded ICC profile is not an RGB matrix-shaper; assuming sRGB");
        return ProfileNote::UnsupportedAssumedSrgb;
    }
    if is_srgb(&profile) {
        return ProfileNote::EmbeddedSrgb;
    }
    let options = TransformOptions {
        prefer_fixed_point: false,
        ..TransformOptions::default()
    };
    let transform = match profile.create_transform_f64(Layout::Rgb, &ColorProfile::new_srgb(), Layout::Rgb, options) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("cannot convert embedded ICC profile ({e}); assuming sRGB");
            return ProfileNote::UnsupportedAssumedSrgb;
        }
    };
    let src = rgb.to_vec();
    if let Err(e) = transform.transform(&src, rgb) {
        log::warn!("ICC conversion failed ({e}); assuming sRGB");
        rgb.copy_from_slice(&src);
        return ProfileNote::UnsupportedAssumedSrgb;
    }
    for v in rgb.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    ProfileNote::Converted
}

/// Decodes a PNG, TIFF or JPEG file into sRGB-encoded planes in `[0, 1]`.
/// Alpha is dropped and grey is replicated to three channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let (img, icc) = open_decoder(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (mut rgb, bit_depth) = normalized_rgb(img, path)?;
    let profile = match icc {
        Some(bytes) => apply_profile(&bytes, &mut rgb),
        None => ProfileNote::AssumedSrgb,
    };
    Ok(LoadedImage {
        image: PlanarImage::from_interleaved(w, h, ColorEncoding::SrgbEncoded, &rgb)?,
        profile,
        bit_depth,
    })
}

/// Decodes a single-channel plane in `[0, 1]` (masks, non-visible bands). Colour inputs are reduced to luma.
pub fn load_plane(path: impl AsRef<Path>) -> Result<Plane> {
    let path = path.as_ref();
    let (img, _) = open_decoder(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.to_luma16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect();
    Plane::new(w, h, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Png8,
    Png16,
    Tiff8,
    Tiff16,
    Jpeg { quality: u8 },
}

pub const DEFAULT_JPEG_QUALITY: u8 = 95;

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Png8 | OutputFormat::Png16 => "png",
            OutputFormat::Tiff8 | OutputFormat::Tiff16 => "tif",
            OutputFormat::Jpeg { .. } => "jpg",
        }
    }

    pub fn bit_depth(self) -> u8 {
        match self {
            OutputFormat::Png16 | OutputFormat::Tiff16 => 16,
            _ => 8,
        }
    }

    /// Parses `png`, `png16`, `tiff`, `tiff16`, `jpeg`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "png" | "png8" => Ok(OutputFormat::Png8),
            "png16" => Ok(OutputFormat::Png16),
            "tif" | "tiff" | "tiff8" => Ok(OutputFormat::Tiff8),
            "tiff16" => Ok(OutputFormat::Tiff16),
            "jpg" | "jpeg" => Ok(OutputFormat::Jpeg {
                quality: DEFAULT_JPEG_QUALITY,
            }),
            other => Err(Error::invalid(format!(
                "unknown output format `{other}` (expected png, png16, tiff, tiff16 or jpeg)"
            ))),
        }
    }
}

/// Round-half-up quantisation of a `[0, 1]` value to `0..=max`.
pub fn quantize(v: f64, max: u16) -> u16 {
    (v * max as f64 + 0.5).floor() as u16
}

fn checked_interleaved(img: &PlanarImage) -> Result<Vec<f64>> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    if let Some((index, value)) = img.first_out_of_unit_range() {
        return Err(Error::OutOfRange { index, value });
    }
    Ok(img.to_interleaved())
}

fn write_encoded<W: Write + Seek>(img: &PlanarImage, format: OutputFormat, sink: W, path: &Path) -> Result<()> {
    let values = checked_interleaved(img)?;
    let (w, h) = (img.width() as u32, img.height() as u32);
    let encode_err = |source| Error::Encode {
        path: path.to_path_buf(),
        source,
    };
    let bytes8 = || values.iter().map(|&v| quantize(v, 255) as u8).collect::<Vec<u8>>();
    let bytes16 = || {
        values
            .iter()
            .flat_map(|&v| quantize(v, 65535).to_ne_bytes())
            .collect::<Vec<u8>>()
    };
    let icc = SRGB_ICC.clone();
    let result = match format {
        OutputFormat::Png8 | OutputFormat::Png16 => {
            let mut enc = PngEncoder::new(sink);
            enc.set_icc_profile(icc).expect("PNG supports ICC profiles");
            if format == OutputFormat::Png8 {
                enc.write_image(&bytes8(), w, h, ExtendedColorType::Rgb8)
            } else {
                enc.write_image(&bytes16(), w, h, ExtendedColorType::Rgb16)
            }
        }
        OutputFormat::Tiff8 | OutputFormat::Tiff16 => {
            let mut enc = TiffEncoder::new(sink);
            enc.set_icc_profile(icc).expect("TIFF supports ICC profiles");
            if format == OutputFormat::Tiff8 {
                enc.write_image(&bytes8(), w, h, ExtendedColorType::Rgb8)
            } else {
                enc.write_image(&bytes16(), w, h, ExtendedColorType::Rgb16)
            }
        }
        OutputFormat::Jpeg { quality } => {
            let mut enc = JpegEncoder::new_with_quality(sink, quality);
            enc.set_icc_profile(icc).expect("JPEG supports ICC profiles");
            enc.write_image(&bytes8(), w, h, ExtendedColorType::Rgb8)
        }
    };
    result.map_err(encode_err)
}

/// Encodes an sRGB image in `[0, 1]` to `path`, embedding the sRGB profile.
/// Out-of-range values are an error; clipping belongs to the pipeline.
pub fn save_image(img: &PlanarImage, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    // validate before touching the filesystem
    checked_interleaved(img)?;
    let mut file = BufWriter::new(File::create(path)?);
    write_encoded(img, format, &mut file, path)?;
    file.flush()?;
    Ok(())
}

/// Encodes to an in-memory buffer.
pub fn encode_image(img: &PlanarImage, format: OutputFormat) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    write_encoded(img, format, &mut buf, Path::new("<memory>"))?;
    Ok(buf.into_inner())
}

/// `<stem>_<method>.<ext>`.
pub fn variant_filename(stem: &str, method: &str, format: OutputFormat) -> String {
    format!("{stem}_{method}.{}", format.extension())
}

/// File stem used for variant names; falls back to `image`.
pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

/// Output path of one variant under `dir`.
pub fn variant_path(dir: &Path, source: &Path, method: &str, format: OutputFormat) -> PathBuf {
    dir.join(variant_filename(&file_stem(source), method, format))
}
