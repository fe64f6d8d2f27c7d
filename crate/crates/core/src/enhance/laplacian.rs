//! Local Laplacian filtering of CIELAB lightness (fast, intensity-sampled variant).
//!
//! Lightness is scaled to `[0, 1]`, remapped around `levels` reference
//! intensities, and each output Laplacian coefficient is interpolated between
//! the two remappings that bracket the Gaussian-pyramid value at that pixel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{ColorEncoding, PlanarImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLaplacianParams {
    /// Amplitude threshold separating detail from edges, on the `[0, 1]` scale.
    pub sigma: f64,
    /// Detail exponent; above 1 smooths, below 1 enhances.
    pub alpha: f64,
    /// Edge slope; 1 keeps the tone range.
    pub beta: f64,
    /// Reference intensities sampled over `[0, 1]`.
    pub levels: usize,
}

impl Default for LocalLaplacianParams {
    fn default() -> Self {
        LocalLaplacianParams {
            sigma: 0.4,
            alpha: 2.0,
            beta: 1.0,
            levels: 16,
        }
    }
}

impl LocalLaplacianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.alpha > 0.0 && self.beta >= 0.0) {
            return Err(Error::invalid("local Laplacian needs sigma > 0, alpha > 0, beta >= 0"));
        }
        if self.levels < 2 {
            return Err(Error::invalid("local Laplacian needs at least 2 intensity levels"));
        }
        Ok(())
    }

    /// Point remapping around reference intensity `g`.
    pub fn remap(&self, i: f64, g: f64) -> f64 {
        let d = i - g;
        let a = d.abs();
        if a <= self.sigma {
            g + d.signum() * self.sigma * (a / self.sigma).powf(self.alpha)
        } else {
            g + d.signum() * (self.beta * (a - self.sigma) + self.sigma)
        }
    }
}

const TAPS: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[derive(Clone)]
struct Level {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

/// Truncated, renormalised 5-tap blur along one axis.
fn blur_axis(src: &Level, horizontal: bool) -> Level {
    let (w, h) = (src.w, src.h);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (k, &t) in TAPS.iter().enumerate() {
                let off = k as isize - 2;
                let (sx, sy) = if horizontal { (x as isize + off, y as isize) } else { (x as isize, y as isize + off) };
                if sx >= 0 && sy >= 0 && (sx as usize) < w && (sy as usize) < h {
                    acc += t * src.data[sy as usize * w + sx as usize];
                    norm += t;
                }
            }
            out[y * w + x] = acc / norm;
        }
    }
    Level { w, h, data: out }
}

fn downsample(src: &Level) -> Level {
    let b = blur_axis(&blur_axis(src, true), false);
    let (w, h) = (src.w.div_ceil(2), src.h.div_ceil(2));
    let data = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| b.data[2 * y * b.w + 2 * x])
        .collect();
    Level { w, h, data }
}

/// 1-D weights of coarse samples contributing to fine position `t`.
fn up_weights(t: usize, coarse_len: usize) -> impl Iterator<Item = (usize, f64)> {
    (0..TAPS.len()).filter_map(move |k| {
        let s = t as isize + k as isize - 2;
        (s >= 0 && s % 2 == 0 && ((s / 2) as usize) < coarse_len).then(|| ((s / 2) as usize, TAPS[k]))
    })
}

fn upsample(src: &Level, w: usize, h: usize) -> Level {
    let mut rows = vec![0.0; w * src.h];
    for y in 0..src.h {
        for x in 0..w {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (c, t) in up_weights(x, src.w) {
                acc += t * src.data[y * src.w + c];
                norm += t;
            }
            rows[y * w + x] = acc / norm;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let weights: Vec<(usize, f64)> = up_weights(y, src.h).collect();
        let norm: f64 = weights.iter().map(|e| e.1).sum();
        for x in 0..w {
            out[y * w + x] = weights.iter().map(|&(c, t)| t * rows[c * w + x]).sum::<f64>() / norm;
        }
    }
    Level { w, h, data: out }
}

fn pyramid_depth(w: usize, h: usize) -> usize {
    let mut depth = 1;
    let (mut w, mut h) = (w, h);
    while w.min(h) > 8 {
        w = w.div_ceil(2);
        h = h.div_ceil(2);
        depth += 1;
    }
    depth
}

fn gaussian_pyramid(base: Level, depth: usize) -> Vec<Level> {
    let mut levels = vec![base];
    for _ in 1..depth {
        let next = downsample(levels.last().expect("nonempty"));
        levels.push(next);
    }
    levels
}

fn laplacian_pyramid(base: Level, depth: usize) -> Vec<Level> {
    let g = gaussian_pyramid(base, depth);
    let mut out = Vec::with_capacity(depth);
    for l in 0..depth - 1 {
        let up = upsample(&g[l + 1], g[l].w, g[l].h);
        let data = g[l].data.iter().zip(&up.data).map(|(a, b)| a - b).collect();
        out.push(Level { w: g[l].w, h: g[l].h, data });
    }
    out.push(g[depth - 1].clone());
    out
}

fn collapse(mut pyr: Vec<Level>) -> Level {
    let mut acc = pyr.pop().expect("nonempty pyramid");
    while let Some(detail) = pyr.pop() {
        let up = upsample(&acc, detail.w, detail.h);
        let data = detail.data.iter().zip(&up.data).map(|(a, b)| a + b).collect();
        acc = Level { w: detail.w, h: detail.h, data };
    }
    acc
}

/// Local Laplacian filter on `L*`; `a*`, `b*` unchanged. Output lightness is clipped to `[0, 100]`.
pub fn local_laplacian_lightness(img: &PlanarImage, params: &LocalLaplacianParams) -> Result<PlanarImage> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    params.validate()?;
    if img.is_empty() {
        return Err(Error::EmptyInput("local Laplacian needs a non-empty image"));
    }
    let (w, h) = img.dims();
    let input = Level {
        w,
        h,
        data: img.plane(0).iter().map(|l| l / 100.0).collect(),
    };
    let depth = pyramid_depth(w, h);
    let gauss = gaussian_pyramid(input.clone(), depth);
    let step = 1.0 / (params.levels - 1) as f64;

    let remapped: Vec<Vec<Level>> = (0..params.levels)
        .map(|k| {
            let g = k as f64 * step;
            let data = input.data.iter().map(|&i| params.remap(i, g)).collect();
            laplacian_pyramid(Level { w, h, data }, depth)
        })
        .collect();

    let mut out: Vec<Level> = Vec::with_capacity(depth);
    for l in 0..depth - 1 {
        let gl = &gauss[l];
        let data = gl
            .data
            .iter()
            .enumerate()
            .map(|(p, &g)| {
                let pos = (g.clamp(0.0, 1.0) / step).min((params.levels - 1) as f64);
                let k = (pos.floor() as usize).min(params.levels - 2);
                let t = pos - k as f64;
                (1.0 - t) * remapped[k][l].data[p] + t * remapped[k + 1][l].data[p]
            })
            .collect();
        out.push(Level { w: gl.w, h: gl.h, data });
    }
    out.push(gauss[depth - 1].clone());
    let result = collapse(out);

    let mut lab = img.clone();
    for (dst, v) in lab.plane_mut(0).iter_mut().zip(result.data) {
        *dst = (100.0 * v).clamp(0.0, 100.0);
    }
    Ok(lab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> Level {
        Level {
            w,
            h,
            data: (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect(),
        }
    }

    #[test]
    fn pyramid_collapse_is_exact() {
        let base = level(37, 21, |x, y| ((x * 13 + y * 7) % 11) as f64 / 10.0);
        let back = collapse(laplacian_pyramid(base.clone(), pyramid_depth(37, 21)));
        for (a, b) in base.data.iter().zip(&back.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resampling_preserves_constants() {
        let c = level(9, 5, |_, _| 0.3);
        assert!(downsample(&c).data.iter().all(|v| (v - 0.3).abs() < 1e-15));
        assert!(upsample(&c, 17, 10).data.iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn remap_shape() {
        let p = LocalLaplacianParams::default();
        assert_eq!(p.remap(0.5, 0.5), 0.5);
        // details shrink for alpha > 1
        assert!((p.remap(0.6, 0.5) - 0.5).abs() < 0.1);
        // edges keep their slope for beta = 1
        assert!((p.remap(1.0, 0.0) - 1.0).abs() < 1e-12);
        assert!((p.remap(0.0, 1.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn constant_image_is_fixed() {
        let img = PlanarImage::filled(20, 12, ColorEncoding::Cielab, [42.0, 3.0, -7.0]);
        let out = local_laplacian_lightness(&img, &LocalLaplacianParams::default()).unwrap();
        assert!(out.plane(0).iter().all(|v| (v - 42.0).abs() < 1e-9));
        assert_eq!(out.plane(1), img.plane(1));
    }

    #[test]
    fn smoothing_reduces_fine_detail() {
        let img = PlanarImage::from_fn(32, 32, ColorEncoding::Cielab, |x, y| {
            [50.0 + if (x + y) % 2 == 0 { 4.0 } else { -4.0 }, 0.0, 0.0]
        });
        let out = local_laplacian_lightness(&img, &LocalLaplacianParams::default()).unwrap();
        let spread = |p: &[f64]| p.iter().copied().fold(f64::MIN, f64::max) - p.iter().copied().fold(f64::MAX, f64::min);
        assert!(spread(out.plane(0)) < spread(img.plane(0)));
    }

    #[test]
    fn rejects_bad_params() {
        let p = LocalLaplacianParams { levels: 1, ..Default::default() };
        assert!(p.validate().is_err());
        let p = LocalLaplacianParams { sigma: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
