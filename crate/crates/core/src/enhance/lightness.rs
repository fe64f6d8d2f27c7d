//! Per-pixel CIELAB operators: lightness stretching, polarity, vividness, lsv,
//! hue rotation, chroma sign change, global histogram equalisation and
//! cross-spectral colourisation.

use crate::color::{self, HsvPixel, LabPixel};
use crate::enhance::{Warned, Warning};
use crate::error::{Error, Result};
use crate::raster::{ColorEncoding, Plane, PlanarImage};

/// Locus of blue on the CIELAB hue circle, in degrees.
pub const BLUE_HUE_DEGREES: f64 = 246.0;

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Stretches `L*` affinely onto `[0, 100]`; `a*`, `b*` are untouched.
///
/// A constant-lightness image is returned unchanged with [`Warning::ConstantLightness`].
pub fn stretchlim(img: &PlanarImage) -> Result<Warned<PlanarImage>> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    let (lo, hi) = min_max(img.plane(0));
    if img.is_empty() || hi - lo <= 0.0 {
        return Ok(Warned::with_warning(img.clone(), Warning::ConstantLightness));
    }
    let mut out = img.clone();
    let scale = 100.0 / (hi - lo);
    for l in out.plane_mut(0) {
        *l = ((*l - lo) * scale).clamp(0.0, 100.0);
    }
    Ok(Warned::clean(out))
}

/// `L' = 100 - L`.
pub fn negative_lightness(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    let mut out = img.clone();
    for l in out.plane_mut(0) {
        *l = 100.0 - *l;
    }
    Ok(out)
}

/// `a' = -a`, `b' = -b`: rotates every hue by half a turn, turning brown papyrus blue.
pub fn chroma_sign_flip(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    let mut out = img.clone();
    for c in 1..3 {
        for v in out.plane_mut(c) {
            *v = -*v;
        }
    }
    Ok(out)
}

/// Replaces lightness by vividness, clipped at 100. Neutral pixels are unchanged.
pub fn vividness_enhance(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    Ok(img.map_pixels(ColorEncoding::Cielab, |p| {
        let lab = LabPixel::from(p);
        [lab.vividness().min(100.0), lab.a, lab.b]
    }))
}

/// Lightness from the mean of the complemented `L*` and `|V + S - 1|`.
///
/// Both terms are normalised to `[0, 1]` before fusion; `a*`, `b*` come from the
/// plain CIELAB conversion of the input.
pub fn lsv_enhance(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    Ok(img.map_pixels(ColorEncoding::Cielab, |rgb| {
        let lab = color::srgb_pixel_to_lab(rgb);
        let hsv = HsvPixel::from_rgb(rgb);
        let n_l = (100.0 - lab[0]) / 100.0;
        let n_vs = (hsv.v + hsv.s - 1.0).abs();
        let mean = ((n_l + n_vs) / 2.0).clamp(0.0, 1.0);
        [100.0 * (1.0 - mean.sqrt()), lab[1], lab[2]]
    }))
}

/// Chroma-weighted circular mean hue in degrees over the pixels selected by `mask`
/// (non-zero entries), or `None` when the selection carries no net chroma.
pub fn weighted_mean_hue(img: &PlanarImage, mask: Option<&Plane>) -> Result<Option<f64>> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    if let Some(m) = mask {
        if m.dims() != img.dims() {
            return Err(Error::DimensionMismatch {
                expected: img.dims(),
                found: m.dims(),
            });
        }
    }
    // sum of C * (cos h, sin h) is the sum of (a, b)
    let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
    for i in 0..img.len() {
        if mask.is_some_and(|m| m.data()[i] == 0.0) {
            continue;
        }
        let p = LabPixel::from(img.pixel_at(i));
        sa += p.a;
        sb += p.b;
        sc += p.chroma();
    }
    if sc == 0.0 || sa.hypot(sb) <= 1e-12 * sc {
        return Ok(None);
    }
    Ok(Some(LabPixel::new(0.0, sa, sb).hue_degrees()))
}

/// Rotates every hue by `target - h_p`, where `h_p` is the chroma-weighted mean hue
/// of the masked region. `L*` and chroma are preserved.
pub fn hue_shift(
    img: &PlanarImage,
    target_hue_degrees: f64,
    mask: Option<&Plane>,
) -> Result<Warned<PlanarImage>> {
    let Some(mean) = weighted_mean_hue(img, mask)? else {
        return Ok(Warned::with_warning(img.clone(), Warning::Achromatic));
    };
    let theta = (target_hue_degrees - mean).to_radians();
    let (s, c) = theta.sin_cos();
    Ok(Warned::clean(img.map_pixels(ColorEncoding::Cielab, |[l, a, b]| {
        [l, a * c - b * s, a * s + b * c]
    })))
}

/// Right-closed bin of `l` among `bins` equal bins over `[0, 100]`.
pub fn lightness_bin(l: f64, bins: usize) -> usize {
    let width = 100.0 / bins as f64;
    let idx = (l / width).ceil() - 1.0;
    if idx <= 0.0 {
        0
    } else {
        (idx as usize).min(bins - 1)
    }
}

/// Histogram of `L*` with right-closed bins over `[0, 100]`.
pub fn lightness_histogram(img: &PlanarImage, bins: usize) -> Vec<f64> {
    let mut hist = vec![0.0; bins];
    for &l in img.plane(0) {
        hist[lightness_bin(l, bins)] += 1.0;
    }
    hist
}

/// Global histogram equalisation of `L*`: `L' = 100 * cdf(L)`.
///
/// A constant image maps entirely to 100.
pub fn histeq_lightness(img: &PlanarImage, bins: usize) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    if bins < 2 {
        return Err(Error::invalid("histogram equalisation needs at least 2 bins"));
    }
    let hist = lightness_histogram(img, bins);
    let total = img.len() as f64;
    let mut cdf = Vec::with_capacity(bins);
    let mut acc = 0.0;
    for h in hist {
        acc += h;
        cdf.push(acc / total);
    }
    let mut out = img.clone();
    for l in out.plane_mut(0) {
        *l = 100.0 * cdf[lightness_bin(*l, bins)];
    }
    Ok(out)
}

/// Inserts a non-visible band as the lightness of a visible-light image, keeping its
/// chromatic channels, and converts back to clipped sRGB.
pub fn cross_spectral_colorize(vis: &PlanarImage, nonvis: &Plane) -> Result<PlanarImage> {
    let lab = cross_spectral_lab(vis, nonvis)?;
    Ok(color::lab_to_srgb(&lab)?.clamp(0.0, 1.0))
}

/// The CIELAB stage of [`cross_spectral_colorize`]: `L = 100 * nonvis`, `a*`, `b*` from `vis`.
pub fn cross_spectral_lab(vis: &PlanarImage, nonvis: &Plane) -> Result<PlanarImage> {
    vis.expect_encoding(ColorEncoding::SrgbEncoded)?;
    if vis.dims() != nonvis.dims() {
        return Err(Error::DimensionMismatch {
            expected: vis.dims(),
            found: nonvis.dims(),
        });
    }
    let mut lab = color::srgb_to_lab(vis)?;
    for (l, &n) in lab.plane_mut(0).iter_mut().zip(nonvis.data()) {
        *l = 100.0 * n;
    }
    Ok(lab)
}
