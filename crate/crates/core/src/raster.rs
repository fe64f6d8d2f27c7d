//! Floating-point rasters tagged with a colour encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Colour encoding carried by every [`PlanarImage`]. The whitepoint is always D65.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorEncoding {
    /// Gamma-encoded sRGB (IEC 61966-2.1), channels nominally in [0, 1].
    SrgbEncoded,
    /// Linear-light RGB with sRGB primaries.
    LinearRgb,
    /// Gamma-encoded AdobeRGB (1998).
    AdobeRgbEncoded,
    /// CIELAB planes `L*`, `a*`, `b*`.
    Cielab,
    /// HSV planes `H` (degrees), `S`, `V`.
    Hsv,
}

impl ColorEncoding {
    pub fn as_str(self) -> &'static str {
        match self {
            ColorEncoding::SrgbEncoded => "srgb-encoded",
            ColorEncoding::LinearRgb => "linear-rgb",
            ColorEncoding::AdobeRgbEncoded => "adobe-rgb-encoded",
            ColorEncoding::Cielab => "cielab",
            ColorEncoding::Hsv => "hsv",
        }
    }
}

impl fmt::Display for ColorEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single-channel raster, used for masks, non-visible-band inputs and derived planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "plane of {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// An H x W x 3 double-precision raster stored as three channel planes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    encoding: ColorEncoding,
    planes: [Vec<f64>; 3],
}

impl PlanarImage {
    pub fn new(
        width: usize,
        height: usize,
        encoding: ColorEncoding,
        planes: [Vec<f64>; 3],
    ) -> Result<Self> {
        let n = width * height;
        if planes.iter().any(|p| p.len() != n) {
            return Err(Error::invalid(format!(
                "every plane of a {width}x{height} image needs {n} samples"
            )));
        }
        Ok(PlanarImage {
            width,
            height,
            encoding,
            planes,
        })
    }

    pub fn filled(width: usize, height: usize, encoding: ColorEncoding, value: [f64; 3]) -> Self {
        let n = width * height;
        PlanarImage {
            width,
            height,
            encoding,
            planes: [vec![value[0]; n], vec![value[1]; n], vec![value[2]; n]],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        encoding: ColorEncoding,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Self {
        let n = width * height;
        let mut planes = [
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        ];
        for y in 0..height {
            for x in 0..width {
                let p = f(x, y);
                for c in 0..3 {
                    planes[c].push(p[c]);
                }
            }
        }
        PlanarImage {
            width,
            height,
            encoding,
            planes,
        }
    }

    /// Builds an image from interleaved `[c0, c1, c2, c0, ...]` samples.
    pub fn from_interleaved(
        width: usize,
        height: usize,
        encoding: ColorEncoding,
        samples: &[f64],
    ) -> Result<Self> {
        if samples.len() != width * height * 3 {
            return Err(Error::invalid("interleaved buffer length does not match dimensions"));
        }
        Ok(Self::from_fn(width, height, encoding, |x, y| {
            let i = (y * width + x) * 3;
            [samples[i], samples[i + 1], samples[i + 2]]
        }))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encoding(&self) -> ColorEncoding {
        self.encoding
    }

    /// Fails with [`Error::EncodingMismatch`] unless the image carries `expected`.
    pub fn expect_encoding(&self, expected: ColorEncoding) -> Result<()> {
        if self.encoding == expected {
            Ok(())
        } else {
            Err(Error::EncodingMismatch {
                expected,
                found: self.encoding,
            })
        }
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        &self.planes[channel]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        &mut self.planes[channel]
    }

    pub fn planes(&self) -> &[Vec<f64>; 3] {
        &self.planes
    }

    pub fn into_planes(self) -> [Vec<f64>; 3] {
        self.planes
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixel_at(y * self.width + x)
    }

    pub fn pixel_at(&self, index: usize) -> [f64; 3] {
        [
            self.planes[0][index],
            self.planes[1][index],
            self.planes[2][index],
        ]
    }

    pub fn set_pixel_at(&mut self, index: usize, value: [f64; 3]) {
        for (c, v) in value.into_iter().enumerate() {
            self.planes[c][index] = v;
        }
    }

    pub fn pixels(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.pixel_at(i))
    }

    /// Interleaved copy of the samples, row-major.
    pub fn to_interleaved(&self) -> Vec<f64> {
        self.pixels().flatten().collect()
    }

    /// Applies `f` to every pixel, producing an image tagged `encoding`.
    pub fn map_pixels(&self, encoding: ColorEncoding, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let n = self.len();
        let mut planes = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let out = f(self.pixel_at(i));
            for (plane, v) in planes.iter_mut().zip(out) {
                plane[i] = v;
            }
        }
        PlanarImage {
            width: self.width,
            height: self.height,
            encoding,
            planes,
        }
    }

    /// Re-tags the buffer without touching its values.
    pub fn retag(mut self, encoding: ColorEncoding) -> Self {
        self.encoding = encoding;
        self
    }

    /// Clamps every sample into `[lo, hi]`.
    pub fn clamp(mut self, lo: f64, hi: f64) -> Self {
        for plane in &mut self.planes {
            for v in plane.iter_mut() {
                *v = v.clamp(lo, hi);
            }
        }
        self
    }

    /// Index and value of the first sample outside `[0, 1]`, if any.
    pub fn first_out_of_unit_range(&self) -> Option<(usize, f64)> {
        self.planes
            .iter()
            .flat_map(|p| p.iter().copied().enumerate())
            .find(|(_, v)| !(0.0..=1.0).contains(v))
    }

    /// Returns a copy of channel `channel` as a [`Plane`].
    pub fn channel(&self, channel: usize) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.planes[channel].clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_layout_is_row_major() {
        let img = PlanarImage::from_fn(3, 2, ColorEncoding::SrgbEncoded, |x, y| {
            [x as f64, y as f64, 0.0]
        });
        assert_eq!(img.pixel(2, 1), [2.0, 1.0, 0.0]);
        assert_eq!(img.pixel_at(5), [2.0, 1.0, 0.0]);
        let inter = img.to_interleaved();
        let back = PlanarImage::from_interleaved(3, 2, ColorEncoding::SrgbEncoded, &inter).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn mismatched_plane_lengths_rejected() {
        let r = PlanarImage::new(2, 2, ColorEncoding::Cielab, [vec![0.0; 4], vec![0.0; 3], vec![0.0; 4]]);
        assert!(r.is_err());
        assert!(Plane::new(2, 2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn expect_encoding_reports_both_tags() {
        let img = PlanarImage::filled(1, 1, ColorEncoding::Hsv, [0.0; 3]);
        let err = img.expect_encoding(ColorEncoding::Cielab).unwrap_err();
        assert_eq!(err.to_string(), "encoding mismatch: expected cielab, found hsv");
    }
}
