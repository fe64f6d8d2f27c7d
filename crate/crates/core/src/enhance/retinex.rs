//! Multiscale retinex with tail-clipping colour balance, in RGB and in CIELAB.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::color::{self, LabPixel};
use crate::error::{Error, Result};
use crate::raster::{ColorEncoding, PlanarImage};

/// Floor applied before taking logarithms.
pub const LOG_EPSILON: f64 = 1.0 / 65536.0;

/// Below this spread the balanced channel is treated as constant.
const FLAT_SPREAD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetinexParams {
    /// Gaussian surround standard deviations in pixels, strictly increasing.
    pub scales: Vec<f64>,
    /// Fraction saturated at each tail by the colour balance.
    pub clip_percent: f64,
}

impl Default for RetinexParams {
    fn default() -> Self {
        RetinexParams {
            scales: vec![15.0, 80.0, 250.0],
            clip_percent: 0.025,
        }
    }
}

impl RetinexParams {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::invalid("retinex needs at least one scale"));
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("retinex scales must be positive"));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("retinex scales must be strictly increasing"));
        }
        if !(0.0..0.5).contains(&self.clip_percent) {
            return Err(Error::invalid("retinex clip_percent must lie in [0, 0.5)"));
        }
        Ok(())
    }
}

/// Normalised, truncated (3 sigma) Gaussian kernel.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Half-sample symmetric reflection of `i` into `0..n`.
pub fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n { m } else { 2 * n - 1 - m }
}

/// Direct convolution is used up to this many taps; wider kernels go through the FFT.
const MAX_DIRECT_TAPS: usize = 64;

/// One-dimensional convolution operator for lines of a fixed length.
///
/// Wide kernels are folded onto the mirrored period `2n` and applied as a circular
/// convolution in the frequency domain, so the cost no longer depends on sigma.
enum LineFilter {
    Direct(Vec<f64>),
    Spectral {
        spectrum: Vec<Complex<f64>>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
}

impl LineFilter {
    fn new(kernel: &[f64], n: usize) -> Self {
        if kernel.len() <= n && kernel.len() <= MAX_DIRECT_TAPS {
            return LineFilter::Direct(kernel.to_vec());
        }
        let period = 2 * n;
        let r = (kernel.len() / 2) as isize;
        let mut folded = vec![Complex::new(0.0, 0.0); period];
        for (k, w) in kernel.iter().enumerate() {
            folded[(k as isize - r).rem_euclid(period as isize) as usize].re += w;
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(period);
        let inverse = planner.plan_fft_inverse(period);
        forward.process(&mut folded);
        let scale = 1.0 / period as f64;
        folded.iter_mut().for_each(|c| *c *= scale);
        LineFilter::Spectral {
            spectrum: folded,
            forward,
            inverse,
        }
    }

    fn apply_direct(kernel: &[f64], line: &[f64], out: &mut [f64]) {
        let n = line.len();
        let r = (kernel.len() / 2) as isize;
        for (i, o) in out.iter_mut().enumerate() {
            *o = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * line[reflect(i as isize + k as isize - r, n)])
                .sum();
        }
    }

    /// Filters each consecutive `n`-sample line of `data`.
    fn apply_lines(&self, data: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; data.len()];
        match self {
            LineFilter::Direct(kernel) => {
                for (line, o) in data.chunks(n).zip(out.chunks_mut(n)) {
                    Self::apply_direct(kernel, line, o);
                }
            }
            LineFilter::Spectral {
                spectrum,
                forward,
                inverse,
            } => {
                // Two real lines share one complex transform: the kernel is real, so the
                // real and imaginary parts are filtered independently.
                let period = 2 * n;
                let mut buf = vec![Complex::new(0.0, 0.0); period];
                let mut scratch = vec![
                    Complex::new(0.0, 0.0);
                    forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())
                ];
                for (pair, o) in data.chunks(period).zip(out.chunks_mut(period)) {
                    let (a, b) = pair.split_at(n);
                    for (j, c) in buf.iter_mut().enumerate() {
                        let src = if j < n { j } else { period - 1 - j };
                        *c = Complex::new(a[src], b.get(src).copied().unwrap_or(0.0));
                    }
                    forward.process_with_scratch(&mut buf, &mut scratch);
                    buf.iter_mut().zip(spectrum).for_each(|(c, k)| *c *= k);
                    inverse.process_with_scratch(&mut buf, &mut scratch);
                    let (oa, ob) = o.split_at_mut(n);
                    for i in 0..n {
                        oa[i] = buf[i].re;
                    }
                    for (i, v) in ob.iter_mut().enumerate() {
                        *v = buf[i].im;
                    }
                }
            }
        }
        out
    }
}

fn transpose(data: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = data[y * width + x];
        }
    }
    out
}

/// Separable Gaussian blur of a `width x height` plane with mirrored borders.
pub fn gaussian_blur(plane: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let rows = LineFilter::new(&kernel, width).apply_lines(plane, width);
    let cols = LineFilter::new(&kernel, height).apply_lines(&transpose(&rows, width, height), height);
    transpose(&cols, height, width)
}

/// Multiscale retinex of one plane: mean over scales of `log(x) - log(G * x)`.
/// Values are floored at [`LOG_EPSILON`] first.
pub fn multiscale_retinex(plane: &[f64], width: usize, height: usize, scales: &[f64]) -> Vec<f64> {
    let x: Vec<f64> = plane.iter().map(|v| v.max(LOG_EPSILON)).collect();
    let log_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let mut acc = vec![0.0; x.len()];
    for &sigma in scales {
        let blurred = gaussian_blur(&x, width, height, sigma);
        for ((a, lx), b) in acc.iter_mut().zip(&log_x).zip(&blurred) {
            *a += lx - b.max(LOG_EPSILON).ln();
        }
    }
    let n = scales.len() as f64;
    acc.iter_mut().for_each(|v| *v /= n);
    acc
}

/// Simplest colour balance: saturate `clip_percent` of the samples at each tail and
/// rescale the rest affinely onto `[0, 1]`. A flat channel maps to 0.5.
pub fn simplest_color_balance(values: &[f64], clip_percent: f64) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = ((clip_percent * n as f64).floor() as usize).min((n - 1) / 2);
    let (lo, hi) = (sorted[k], sorted[n - 1 - k]);
    if hi - lo <= FLAT_SPREAD {
        return vec![0.5; n];
    }
    values
        .iter()
        .map(|v| (v.clamp(lo, hi) - lo) / (hi - lo))
        .collect()
}

/// Per-channel MSR followed by tail-clipping colour balance; output is sRGB in `[0, 1]`.
pub fn msrcr_rgb(img: &PlanarImage, params: &RetinexParams) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    params.validate()?;
    let (w, h) = img.dims();
    let planes: Vec<Vec<f64>> = img
        .planes()
        .par_iter()
        .map(|p| simplest_color_balance(&multiscale_retinex(p, w, h, &params.scales), params.clip_percent))
        .collect();
    let [r, g, b]: [Vec<f64>; 3] = planes.try_into().expect("three channels");
    PlanarImage::new(w, h, ColorEncoding::SrgbEncoded, [r, g, b])
}

/// CIELAB retinex planes: MSR and balance applied to `V*`, `a*`, `b*`, renormalised to
/// `[0, 100]`, `[-128, 127]`, `[-128, 127]`. The processed `V*` is the new lightness.
///
/// `a*` and `b*` are offset by 128 into a positive domain before the logarithm.
pub fn retinex_cielab_planes(img: &PlanarImage, params: &RetinexParams) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::SrgbEncoded)?;
    params.validate()?;
    let lab = color::srgb_to_lab(img)?;
    let (w, h) = img.dims();
    let vivid: Vec<f64> = lab.pixels().map(|p| LabPixel::from(p).vividness() / 100.0).collect();
    let opp = |c: usize| -> Vec<f64> { lab.plane(c).iter().map(|v| (v + 128.0) / 255.0).collect() };
    let inputs = [vivid, opp(1), opp(2)];
    let ranges = [(0.0, 100.0), (-128.0, 127.0), (-128.0, 127.0)];
    let planes: Vec<Vec<f64>> = inputs
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(p, &(lo, hi))| {
            simplest_color_balance(&multiscale_retinex(p, w, h, &params.scales), params.clip_percent)
                .into_iter()
                .map(|u| lo + (hi - lo) * u)
                .collect()
        })
        .collect();
    let [l, a, b]: [Vec<f64>; 3] = planes.try_into().expect("three channels");
    PlanarImage::new(w, h, ColorEncoding::Cielab, [l, a, b])
}

/// Retinex in CIELAB, converted back to clipped sRGB.
pub fn retinex_cielab(img: &PlanarImage, params: &RetinexParams) -> Result<PlanarImage> {
    let planes = retinex_cielab_planes(img, params)?;
    Ok(color::lab_to_srgb(&planes)?.clamp(0.0, 1.0))
}

/// `V' = 100 - V`, `a' = -a`, `b' = -b` on retinex CIELAB planes.
pub fn blue_negative(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    Ok(img.map_pixels(ColorEncoding::Cielab, |[v, a, b]| [100.0 - v, -a, -b]))
}
