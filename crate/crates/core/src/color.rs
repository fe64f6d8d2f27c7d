//! Colour-space mathematics: transfer functions, the XYZ bridge, CIELAB (D65) and HSV.
//!
//! All conversions are computed from primaries and the D65 chromaticity rather than from
//! rounded published matrices, so the neutral axis maps exactly onto the reference white
//! and the sRGB / AdobeRGB pair share it bit-for-bit up to floating-point rounding.
//!
//! Transfer functions are extended sign-symmetrically below zero so that out-of-gamut
//! intermediate values never produce NaN.

use std::sync::LazyLock;

use crate::error::Result;
use crate::raster::{ColorEncoding, Plane, PlanarImage};

pub type Mat3 = [[f64; 3]; 3];

/// CIE 1931 chromaticity of D65.
pub const D65_XY: (f64, f64) = (0.3127, 0.3290);

/// AdobeRGB (1998) encoding exponent, 563/256.
pub const ADOBE_RGB_GAMMA: f64 = 2.199_218_75;

const SRGB_PRIMARIES: [(f64, f64); 3] = [(0.64, 0.33), (0.30, 0.60), (0.15, 0.06)];
const ADOBE_RGB_PRIMARIES: [(f64, f64); 3] = [(0.64, 0.33), (0.21, 0.71), (0.15, 0.06)];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

/// D65 reference white in XYZ with `Y = 1`.
pub static D65_WHITE: LazyLock<[f64; 3]> = LazyLock::new(|| xy_to_xyz(D65_XY));

pub static SRGB_TO_XYZ: LazyLock<Mat3> =
    LazyLock::new(|| rgb_to_xyz_matrix(SRGB_PRIMARIES, *D65_WHITE));
pub static XYZ_TO_SRGB: LazyLock<Mat3> = LazyLock::new(|| invert(&SRGB_TO_XYZ));
pub static ADOBE_RGB_TO_XYZ: LazyLock<Mat3> =
    LazyLock::new(|| rgb_to_xyz_matrix(ADOBE_RGB_PRIMARIES, *D65_WHITE));
pub static XYZ_TO_ADOBE_RGB: LazyLock<Mat3> = LazyLock::new(|| invert(&ADOBE_RGB_TO_XYZ));

fn xy_to_xyz((x, y): (f64, f64)) -> [f64; 3] {
    [x / y, 1.0, (1.0 - x - y) / y]
}

/// Linear RGB -> XYZ matrix for the given primaries, scaled so RGB (1,1,1) hits `white`.
pub fn rgb_to_xyz_matrix(primaries: [(f64, f64); 3], white: [f64; 3]) -> Mat3 {
    let cols = primaries.map(xy_to_xyz);
    let p: Mat3 = [
        [cols[0][0], cols[1][0], cols[2][0]],
        [cols[0][1], cols[1][1], cols[2][1]],
        [cols[0][2], cols[1][2], cols[2][2]],
    ];
    let s = mul_vec(&invert(&p), white);
    let mut m = p;
    for row in &mut m {
        for (c, v) in row.iter_mut().enumerate() {
            *v *= s[c];
        }
    }
    m
}

pub fn mul_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mul_mat(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Inverse of a non-singular 3x3 matrix by cofactors.
pub fn invert(m: &Mat3) -> Mat3 {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let cof = [
        [c(1, 2, 1, 2), -c(1, 2, 0, 2), c(1, 2, 0, 1)],
        [-c(0, 2, 1, 2), c(0, 2, 0, 2), -c(0, 2, 0, 1)],
        [c(0, 1, 1, 2), -c(0, 1, 0, 2), c(0, 1, 0, 1)],
    ];
    let det = m[0][0] * cof[0][0] + m[0][1] * cof[0][1] + m[0][2] * cof[0][2];
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = cof[j][i] / det;
        }
    }
    inv
}

/// sRGB electro-optical transfer function (encoded -> linear).
pub fn srgb_decode(v: f64) -> f64 {
    let a = v.abs();
    let lin = if a <= 0.04045 {
        a / 12.92
    } else {
        ((a + 0.055) / 1.055).powf(2.4)
    };
    lin.copysign(v)
}

/// Inverse of [`srgb_decode`].
pub fn srgb_encode(v: f64) -> f64 {
    let a = v.abs();
    let enc = if a <= 0.003_130_8 {
        a * 12.92
    } else {
        1.055 * a.powf(1.0 / 2.4) - 0.055
    };
    enc.copysign(v)
}

pub fn adobe_rgb_decode(v: f64) -> f64 {
    v.abs().powf(ADOBE_RGB_GAMMA).copysign(v)
}

pub fn adobe_rgb_encode(v: f64) -> f64 {
    v.abs().powf(1.0 / ADOBE_RGB_GAMMA).copysign(v)
}

/// CIELAB coordinates of a single pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabPixel {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabPixel {
    pub fn new(l: f64, a: f64, b: f64) -> Self {
        LabPixel { l, a, b }
    }

    pub fn chroma(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Hue angle in `[0, 360)`; zero on the neutral axis.
    pub fn hue_degrees(&self) -> f64 {
        if self.a == 0.0 && self.b == 0.0 {
            return 0.0;
        }
        let h = self.b.atan2(self.a).to_degrees();
        let h = if h < 0.0 { h + 360.0 } else { h };
        if h >= 360.0 { 0.0 } else { h }
    }

    /// Joint lightness-chroma magnitude, the l2-norm of `(L*, a*, b*)`.
    pub fn vividness(&self) -> f64 {
        (self.l * self.l + self.a * self.a + self.b * self.b).sqrt()
    }
}

impl From<[f64; 3]> for LabPixel {
    fn from(p: [f64; 3]) -> Self {
        LabPixel::new(p[0], p[1], p[2])
    }
}

impl From<LabPixel> for [f64; 3] {
    fn from(p: LabPixel) -> Self {
        [p.l, p.a, p.b]
    }
}

/// HSV coordinates of a single pixel. Hue is in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl HsvPixel {
    pub fn from_rgb(rgb: [f64; 3]) -> Self {
        let [r, g, b] = rgb;
        let v = r.max(g).max(b);
        let min = r.min(g).min(b);
        let delta = v - min;
        let s = if v == 0.0 { 0.0 } else { delta / v };
        let h = if delta == 0.0 {
            0.0
        } else if v == r {
            60.0 * ((g - b) / delta).rem_euclid(6.0)
        } else if v == g {
            60.0 * ((b - r) / delta + 2.0)
        } else {
            60.0 * ((r - g) / delta + 4.0)
        };
        HsvPixel { h, s, v }
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let f3 = f * f * f;
    if f3 > LAB_EPSILON {
        f3
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

pub fn xyz_to_lab(xyz: [f64; 3]) -> [f64; 3] {
    let w = *D65_WHITE;
    let fx = lab_f(xyz[0] / w[0]);
    let fy = lab_f(xyz[1] / w[1]);
    let fz = lab_f(xyz[2] / w[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn lab_to_xyz(lab: [f64; 3]) -> [f64; 3] {
    let w = *D65_WHITE;
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let y = if lab[0] > LAB_KAPPA * LAB_EPSILON {
        fy * fy * fy
    } else {
        lab[0] / LAB_KAPPA
    };
    [lab_f_inv(fx) * w[0], y * w[1], lab_f_inv(fz) * w[2]]
}

pub fn srgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    xyz_to_lab(mul_vec(&SRGB_TO_XYZ, rgb.map(srgb_decode)))
}

pub fn lab_pixel_to_srgb(lab: [f64; 3]) -> [f64; 3] {
    mul_vec(&XYZ_TO_SRGB, lab_to_xyz(lab)).map(srgb_encode)
}

/// sRGB-encoded -> AdobeRGB-encoded coordinates of the same colour, unclipped.
pub fn srgb_pixel_to_adobe_rgb(rgb: [f64; 3]) -> [f64; 3] {
    let xyz = mul_vec(&SRGB_TO_XYZ, rgb.map(srgb_decode));
    mul_vec(&XYZ_TO_ADOBE_RGB, xyz).map(adobe_rgb_encode)
}

pub fn adobe_rgb_pixel_to_srgb(rgb: [f64; 3]) -> [f64; 3] {
    let xyz = mul_vec(&ADOBE_RGB_TO_XYZ, rgb.map(adobe_rgb_decode));
    mul_vec(&XYZ_TO_SRGB, xyz).map(srgb_encode)
}

/// sRGB-encoded -> CIELAB (D65).
pub fn srgb_to_lab(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    Ok(img.map_pixels(ColorEncoding::Cielab, srgb_pixel_to_lab))
}

/// CIELAB (D65) -> sRGB-encoded. Out-of-gamut results are left unclipped.
pub fn lab_to_srgb(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    Ok(img.map_pixels(ColorEncoding::SrgbEncoded, lab_pixel_to_srgb))
}

/// sRGB-encoded -> HSV planes `[H, S, V]`, with `S = 0` where `V = 0`.
pub fn rgb_to_hsv(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    Ok(img.map_pixels(ColorEncoding::Hsv, |p| {
        let hsv = HsvPixel::from_rgb(p);
        [hsv.h, hsv.s, hsv.v]
    }))
}

pub fn srgb_to_linear(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    Ok(img.map_pixels(ColorEncoding::LinearRgb, |p| p.map(srgb_decode)))
}

pub fn linear_to_srgb(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::LinearRgb)?;
    Ok(img.map_pixels(ColorEncoding::SrgbEncoded, |p| p.map(srgb_encode)))
}

/// Re-expresses sRGB values in AdobeRGB (1998) coordinates, clips to `[0, 1]` and keeps
/// the sRGB tag, so a viewer reads the narrower-gamut values under the sRGB profile.
pub fn expand_gamut(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    Ok(img.map_pixels(ColorEncoding::SrgbEncoded, |p| {
        srgb_pixel_to_adobe_rgb(p).map(|v| v.clamp(0.0, 1.0))
    }))
}

/// Converts any RGB or CIELAB encoding to sRGB-encoded values (unclipped).
///
/// HSV has no inverse here because only `S` and `V` are carried with full meaning.
pub fn to_srgb(img: &PlanarImage) -> Result<PlanarImage> {
    match img.encoding() {
        ColorEncoding::SrgbEncoded => Ok(img.clone()),
        ColorEncoding::LinearRgb => linear_to_srgb(img),
        ColorEncoding::AdobeRgbEncoded => {
            Ok(img.map_pixels(ColorEncoding::SrgbEncoded, adobe_rgb_pixel_to_srgb))
        }
        ColorEncoding::Cielab => lab_to_srgb(img),
        other => Err(crate::Error::UnsupportedEncoding(other)),
    }
}

/// Chroma, hue and vividness planes of a CIELAB image.
#[derive(Debug, Clone, PartialEq)]
pub struct LabDerived {
    pub chroma: Plane,
    pub hue: Plane,
    pub vividness: Plane,
}

pub fn lab_derived(img: &PlanarImage) -> Result<LabDerived> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    let (w, h) = img.dims();
    let n = img.len();
    let (mut chroma, mut hue, mut vivid) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for p in img.pixels().map(LabPixel::from) {
        chroma.push(p.chroma());
        hue.push(p.hue_degrees());
        vivid.push(p.vividness());
    }
    Ok(LabDerived {
        chroma: Plane::new(w, h, chroma)?,
        hue: Plane::new(w, h, hue)?,
        vividness: Plane::new(w, h, vivid)?,
    })
}
