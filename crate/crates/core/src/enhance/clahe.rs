//! Contrast-limited adaptive histogram equalisation of CIELAB lightness.
//!
//! Lightness is quantised to 256 levels, one clipped histogram per tile of a
//! `rows x cols` grid is turned into a mapping `100 * cdf`, and every pixel blends
//! the mappings of the (up to four) nearest tile centres bilinearly.

use serde::{Deserialize, Serialize};

use crate::enhance::{Warned, Warning};
use crate::error::{Error, Result};
use crate::raster::{ColorEncoding, PlanarImage};

pub const CLAHE_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaheParams {
    /// Tile grid as `(rows, cols)`.
    pub grid: (usize, usize),
    /// Normalised clip limit in `[0, 1]`.
    pub clip_limit: f64,
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            grid: (8, 8),
            clip_limit: 0.01,
        }
    }
}

/// Quantised lightness level in `0..256`.
pub fn lightness_level(l: f64) -> usize {
    ((l.clamp(0.0, 100.0) / 100.0) * (CLAHE_BINS - 1) as f64).round() as usize
}

/// Pixel span `[start, end)` of tile `index` out of `count` along an axis of `len` pixels.
pub fn tile_span(index: usize, count: usize, len: usize) -> (usize, usize) {
    (index * len / count, (index + 1) * len / count)
}

fn tile_centers(count: usize, len: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let (s, e) = tile_span(i, count, len);
            (s + e - 1) as f64 / 2.0
        })
        .collect()
}

/// Absolute clip height for a tile of `pixels` pixels.
pub fn clip_height(pixels: usize, clip_limit: f64) -> usize {
    let min_clip = pixels.div_ceil(CLAHE_BINS);
    min_clip + (clip_limit * (pixels - min_clip) as f64).round() as usize
}

/// Clips `hist` at `clip` and hands the excess back to the bins, uniformly first and
/// then one count at a time with a stride, so the total is preserved.
pub fn clip_histogram(hist: &mut [usize], clip: usize) {
    let bins = hist.len();
    let mut excess: usize = hist.iter().map(|&h| h.saturating_sub(clip)).sum();
    if excess == 0 {
        return;
    }
    for h in hist.iter_mut() {
        *h = (*h).min(clip);
    }
    let incr = excess / bins;
    let upper = clip - incr;
    for h in hist.iter_mut() {
        if *h > upper {
            excess -= clip - *h;
            *h = clip;
        } else {
            *h += incr;
            excess -= incr;
        }
    }
    while excess > 0 {
        let before = excess;
        let step = (bins / excess).max(1);
        let mut k = 0;
        while k < bins && excess > 0 {
            if hist[k] < clip {
                hist[k] += 1;
                excess -= 1;
            }
            k += step;
        }
        if excess == before {
            // every bin is at the clip height; cannot happen while clip >= pixels / bins
            break;
        }
    }
}

/// Tile mapping `level -> 100 * cdf(level)` from a clipped histogram.
pub fn tile_mapping(levels: &[usize], clip_limit: f64) -> Vec<f64> {
    let mut hist = vec![0usize; CLAHE_BINS];
    for &v in levels {
        hist[v] += 1;
    }
    clip_histogram(&mut hist, clip_height(levels.len(), clip_limit));
    let total = levels.len() as f64;
    let mut acc = 0usize;
    hist.iter()
        .map(|&h| {
            acc += h;
            (100.0 * acc as f64 / total).min(100.0)
        })
        .collect()
}

fn axis_weights(pos: f64, centers: &[f64]) -> [(usize, f64); 2] {
    let last = centers.len() - 1;
    if pos <= centers[0] {
        return [(0, 1.0), (0, 0.0)];
    }
    if pos >= centers[last] {
        return [(last, 1.0), (last, 0.0)];
    }
    let i = centers.iter().rposition(|&c| c <= pos).unwrap_or(0);
    let t = (pos - centers[i]) / (centers[i + 1] - centers[i]);
    [(i, 1.0 - t), (i + 1, t)]
}

/// Tiles `(row, col)` and bilinear weights that contribute to pixel `(x, y)`.
///
/// Interior pixels (between the outermost tile centres on both axes) get four
/// entries, edge bands two and corners one. Weights sum to one.
pub fn blend_weights(
    x: usize,
    y: usize,
    dims: (usize, usize),
    grid: (usize, usize),
) -> Vec<((usize, usize), f64)> {
    let (w, h) = dims;
    let rows = tile_centers(grid.0, h);
    let cols = tile_centers(grid.1, w);
    let wy = axis_weights(y as f64, &rows);
    let wx = axis_weights(x as f64, &cols);
    let mut out: Vec<((usize, usize), f64)> = Vec::with_capacity(4);
    for (r, a) in wy {
        for (c, b) in wx {
            if let Some(e) = out.iter_mut().find(|e| e.0 == (r, c)) {
                e.1 += a * b;
            } else {
                out.push(((r, c), a * b));
            }
        }
    }
    out
}

/// CLAHE on `L*`; `a*`, `b*` unchanged. Grids larger than the image are reduced to fit.
pub fn clahe_lightness(img: &PlanarImage, params: ClaheParams) -> Result<Warned<PlanarImage>> {
    img.expect_encoding(ColorEncoding::Cielab)?;
    if params.grid.0 == 0 || params.grid.1 == 0 {
        return Err(Error::invalid("CLAHE grid must be at least 1x1"));
    }
    if !(0.0..=1.0).contains(&params.clip_limit) {
        return Err(Error::invalid("CLAHE clip limit must lie in [0, 1]"));
    }
    if img.is_empty() {
        return Err(Error::EmptyInput("CLAHE needs a non-empty image"));
    }
    let (w, h) = img.dims();
    let grid = (params.grid.0.min(h), params.grid.1.min(w));
    let mut warned = Warned::clean(());
    if grid != params.grid {
        warned.warnings.push(Warning::GridReduced {
            requested: params.grid,
            used: grid,
        });
    }

    let levels: Vec<usize> = img.plane(0).iter().map(|&l| lightness_level(l)).collect();
    let mut maps = Vec::with_capacity(grid.0 * grid.1);
    for r in 0..grid.0 {
        let (y0, y1) = tile_span(r, grid.0, h);
        for c in 0..grid.1 {
            let (x0, x1) = tile_span(c, grid.1, w);
            let tile: Vec<usize> = (y0..y1)
                .flat_map(|y| levels[y * w + x0..y * w + x1].iter().copied())
                .collect();
            maps.push(tile_mapping(&tile, params.clip_limit));
        }
    }

    let mut out = img.clone();
    let lplane = out.plane_mut(0);
    for y in 0..h {
        for x in 0..w {
            let level = levels[y * w + x];
            let v: f64 = blend_weights(x, y, (w, h), grid)
                .into_iter()
                .map(|((r, c), wt)| wt * maps[r * grid.1 + c][level])
                .sum();
            lplane[y * w + x] = v.clamp(0.0, 100.0);
        }
    }
    Ok(Warned {
        value: out,
        warnings: warned.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_gives_constant_output() {
        let img = PlanarImage::filled(40, 24, ColorEncoding::Cielab, [37.0, 5.0, -5.0]);
        let out = clahe_lightness(&img, ClaheParams::default()).unwrap();
        assert!(out.warnings.is_empty());
        let first = out.value.plane(0)[0];
        assert!(out.value.plane(0).iter().all(|&v| (v - first).abs() < 1e-9));
        assert_eq!(out.value.plane(1), img.plane(1));
    }

    #[test]
    fn clipping_preserves_total_and_respects_limit() {
        let mut hist = vec![0usize; CLAHE_BINS];
        hist[10] = 900;
        hist[200] = 124;
        let clip = clip_height(1024, 0.01);
        clip_histogram(&mut hist, clip);
        assert_eq!(hist.iter().sum::<usize>(), 1024);
        assert!(hist.iter().all(|&h| h <= clip));
    }

    #[test]
    fn small_image_reduces_grid() {
        let img = PlanarImage::from_fn(5, 3, ColorEncoding::Cielab, |x, y| [(x * 10 + y * 7) as f64, 0.0, 0.0]);
        let out = clahe_lightness(&img, ClaheParams::default()).unwrap();
        assert_eq!(
            out.warnings,
            vec![Warning::GridReduced {
                requested: (8, 8),
                used: (3, 5)
            }]
        );
        assert!(out.value.plane(0).iter().all(|v| (0.0..=100.0).contains(v)));
    }

    #[test]
    fn weights_sum_to_one_and_count_by_region() {
        let dims = (64, 64);
        let grid = (8, 8);
        assert_eq!(blend_weights(0, 0, dims, grid).len(), 1);
        assert_eq!(blend_weights(30, 1, dims, grid).len(), 2);
        assert_eq!(blend_weights(30, 30, dims, grid).len(), 4);
        for (x, y) in [(0, 0), (5, 60), (63, 63), (17, 44)] {
            let s: f64 = blend_weights(x, y, dims, grid).iter().map(|e| e.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_params_rejected() {
        let img = PlanarImage::filled(8, 8, ColorEncoding::Cielab, [50.0, 0.0, 0.0]);
        assert!(clahe_lightness(&img, ClaheParams { grid: (0, 8), clip_limit: 0.01 }).is_err());
        assert!(clahe_lightness(&img, ClaheParams { grid: (8, 8), clip_limit: 1.5 }).is_err());
    }
}
