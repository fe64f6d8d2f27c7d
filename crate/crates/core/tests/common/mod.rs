//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use legibility::{ColorEncoding, PlanarImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Published IEC 61966-2-1 sRGB (D65) to XYZ matrix.
pub const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// Published XYZ (D65) to Adobe RGB (1998) linear matrix.
pub const XYZ_TO_ADOBE: [[f64; 3]; 3] = [
    [2.0413690, -0.5649464, -0.3446944],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0134474, -0.1183897, 1.0154096],
];

pub fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

pub fn srgb_eotf(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// CIE 1976 `L*` of a relative luminance.
pub fn cie_lightness(y: f64) -> f64 {
    let (eps, kappa) = (216.0 / 24389.0, 24389.0 / 27.0);
    if y > eps {
        116.0 * y.cbrt() - 16.0
    } else {
        kappa * y
    }
}

/// sRGB pixel to Adobe RGB (1998) encoded, via the published matrices.
pub fn adobe_oracle(rgb: [f64; 3]) -> [f64; 3] {
    let xyz = mat_vec(&SRGB_TO_XYZ, rgb.map(srgb_eotf));
    mat_vec(&XYZ_TO_ADOBE, xyz).map(|v| v.clamp(0.0, 1.0).powf(256.0 / 563.0))
}

/// Direct O(n^2) DFT magnitudes.
pub fn dft_magnitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let phi = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                re += v * phi.cos();
                im += v * phi.sin();
            }
            re.hypot(im)
        })
        .collect()
}

/// Spatial flatness computed from the direct DFT, with near-zero magnitudes as zero.
pub fn spatial_flatness_oracle(x: &[f64]) -> f64 {
    let mags = dft_magnitudes(x);
    let n = mags.len() as f64;
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let sum: f64 = mags.iter().sum();
    if mags.iter().any(|&m| m <= 1e-9 * peak) {
        return 1.0;
    }
    let log_mean = mags.iter().map(|m| m.ln()).sum::<f64>() / n;
    1.0 - n * log_mean.exp() / sum
}

/// Textbook tie-corrected Kendall's W by direct summation.
/// `scores[j][i]` is judge `j`'s score for item `i`; higher scores rank lower here,
/// which does not affect W.
pub fn kendall_w_oracle(scores: &[Vec<f64>]) -> f64 {
    let m = scores.len() as f64;
    let n = scores[0].len();
    let mut totals = vec![0.0; n];
    let mut ties = 0.0;
    for row in scores {
        for i in 0..n {
            let below = row.iter().filter(|&&v| v < row[i]).count() as f64;
            let equal = row.iter().filter(|&&v| v == row[i]).count() as f64;
            totals[i] += below + (equal + 1.0) / 2.0;
        }
        let mut seen: Vec<f64> = Vec::new();
        for &v in row {
            if !seen.contains(&v) {
                seen.push(v);
                let t = row.iter().filter(|&&u| u == v).count() as f64;
                ties += t.powi(3) - t;
            }
        }
    }
    let mean = totals.iter().sum::<f64>() / n as f64;
    let s: f64 = totals.iter().map(|r| (r - mean).powi(2)).sum();
    let nf = n as f64;
    12.0 * s / (m * m * (nf.powi(3) - nf) - m * ties)
}

/// Number of (input, item pair) disagreements of a best-first order with rating vectors.
pub fn kendall_distance(order: &[usize], inputs: &[Vec<f64>]) -> usize {
    let mut d = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            d += inputs.iter().filter(|r| r[order[j]] > r[order[i]]).count();
        }
    }
    d
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Random sRGB image with a sprinkling of exactly neutral pixels.
pub fn random_srgb(rng: &mut ChaCha8Rng, width: usize, height: usize) -> PlanarImage {
    PlanarImage::from_fn(width, height, ColorEncoding::SrgbEncoded, |_, _| {
        if rng.random_bool(0.1) {
            let g = rng.random::<f64>();
            [g, g, g]
        } else {
            [rng.random(), rng.random(), rng.random()]
        }
    })
}

/// Random CIELAB image with in-range lightness, mixed neutral and chromatic pixels.
pub fn random_lab(rng: &mut ChaCha8Rng, width: usize, height: usize) -> PlanarImage {
    PlanarImage::from_fn(width, height, ColorEncoding::Cielab, |_, _| {
        let l = rng.random_range(0.0..100.0);
        if rng.random_bool(0.2) {
            [l, 0.0, 0.0]
        } else {
            [l, rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0)]
        }
    })
}

/// A papyrus-like crop: brown ground with fibre texture, soft-edged ink strokes, mild noise.
pub fn papyrus_crop(rng: &mut ChaCha8Rng, width: usize, height: usize) -> PlanarImage {
    let strokes: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| (rng.random_range(0.0..width as f64), rng.random_range(0.0..height as f64), rng.random_range(-1.0..1.0)))
        .collect();
    PlanarImage::from_fn(width, height, ColorEncoding::SrgbEncoded, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let fibre = 0.03 * (yf * 0.7 + (xf * 0.05).sin() * 3.0).sin();
        let ink = strokes
            .iter()
            .map(|&(cx, cy, slope)| {
                let d = ((yf - cy) - slope * (xf - cx)).abs() / (1.0 + slope * slope).sqrt();
                let along = ((xf - cx).powi(2) + (yf - cy).powi(2)).sqrt();
                if along < 10.0 { (-d * d / 2.0).exp() } else { 0.0 }
            })
            .fold(0.0, f64::max);
        let n = rng.random_range(-0.01..0.01);
        [
            0.70 + fibre - 0.42 * ink + n,
            0.55 + fibre - 0.35 * ink + n,
            0.36 + 0.5 * fibre - 0.22 * ink + n,
        ]
    })
}

/// Successive lower medians of a rating multiset, written independently of the library.
pub fn median_sequence(ratings: &[u32]) -> Vec<u32> {
    let mut pool = ratings.to_vec();
    pool.sort_unstable();
    let mut seq = Vec::new();
    while !pool.is_empty() {
        let k = (pool.len() - 1) / 2;
        seq.push(pool.remove(k));
    }
    seq
}

/// Three raters, one document, four methods. Centroids and Majority Judgment
/// disagree on `original` versus `stretchlim`.
pub const THREE_RATER_CSV: &str = "\
rater,document,method,category
r1,doc,original,X
r1,doc,stretchlim,N
r1,doc,vividness,X
r1,doc,negvividness,B
r2,doc,original,N
r2,doc,stretchlim,B
r2,doc,vividness,A
r2,doc,negvividness,A
r3,doc,original,N
r3,doc,stretchlim,B
r3,doc,vividness,X
r3,doc,negvividness,A
";

/// Hand-worked results for [`THREE_RATER_CSV`], per method name.
pub struct Expected {
    pub method: &'static str,
    pub spread: [usize; 4],
    /// Totals 6, 5, 11, 8 over 4 methods: centroid = total - 30/4.
    pub centroid: f64,
    /// Row sum 3t over column sum 30 - t.
    pub rod: f64,
    pub mj: &'static str,
    pub mj_category: &'static str,
}

pub const THREE_RATER_EXPECTED: [Expected; 4] = [
    Expected { method: "original", spread: [1, 0, 0, 2], centroid: -1.5, rod: 18.0 / 24.0, mj: "1.0104", mj_category: "No use +" },
    Expected { method: "stretchlim", spread: [0, 0, 2, 1], centroid: -2.5, rod: 15.0 / 25.0, mj: "2.0102", mj_category: "Secondary use -" },
    Expected { method: "vividness", spread: [2, 1, 0, 0], centroid: 3.5, rod: 33.0 / 19.0, mj: "4.0304", mj_category: "Exclusive -" },
    Expected { method: "negvividness", spread: [0, 2, 1, 0], centroid: 0.5, rod: 24.0 / 22.0, mj: "3.0203", mj_category: "Primary use -" },
];

pub const THREE_RATER_CENTROID_ORDER: [&str; 4] = ["vividness", "negvividness", "original", "stretchlim"];
pub const THREE_RATER_MJ_ORDER: [&str; 4] = ["vividness", "negvividness", "stretchlim", "original"];

/// Ensemble ratings from rating vectors: normalised pairwise dominance averaged
/// over the inputs, then row sum over column sum.
pub fn ensemble_oracle(inputs: &[Vec<f64>]) -> Vec<f64> {
    let n = inputs[0].len();
    let mut mean = vec![vec![0.0; n]; n];
    for r in inputs {
        let d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (r[i] - r[j]).max(0.0)).collect()).collect();
        let total: f64 = d.iter().flatten().sum();
        for i in 0..n {
            for j in 0..n {
                mean[i][j] += d[i][j] / total / inputs.len() as f64;
            }
        }
    }
    (0..n)
        .map(|i| {
            let row: f64 = mean[i].iter().sum();
            let col: f64 = (0..n).map(|k| mean[k][i]).sum();
            if col == 0.0 { f64::INFINITY } else { row / col }
        })
        .collect()
}

/// Expected ensemble ratings for [`THREE_RATER_EXPECTED`] in the same order.
pub fn three_rater_ensemble() -> Vec<f64> {
    let centroid: Vec<f64> = THREE_RATER_EXPECTED.iter().map(|e| e.centroid).collect();
    let mj: Vec<f64> = THREE_RATER_EXPECTED.iter().map(|e| e.mj.parse().unwrap()).collect();
    ensemble_oracle(&[centroid, mj])
}
