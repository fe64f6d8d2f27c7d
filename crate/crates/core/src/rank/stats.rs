//! Agreement and spread statistics: Kendall's W, spatial flatness, Shannon entropy.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceResult {
    pub w: f64,
    pub chi2: f64,
    pub degrees_of_freedom: usize,
    pub p: f64,
    /// Sum over judges of `sum(t^3 - t)` across tie groups.
    pub tie_correction: f64,
    pub judges: usize,
    pub items: usize,
}

/// Ascending ranks `1..=n`, tied values sharing their mean rank.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let mid = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    ranks
}

fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .chunk_by(|a, b| a == b)
        .map(|g| {
            let t = g.len() as f64;
            t * t * t - t
        })
        .sum()
}

/// Tie-corrected Kendall's W. Each row of `scores` is one judge's scores for every item.
///
/// Scores are converted to mid-ranks, so rank vectors and raw scores give the same result.
pub fn kendall_w(scores: &[Vec<f64>]) -> Result<ConcordanceResult> {
    let judges = scores.len();
    let items = scores.first().map_or(0, Vec::len);
    if judges < 2 || items < 2 {
        return Err(Error::invalid(format!(
            "Kendall's W needs at least 2 judges and 2 items, got {judges} x {items}"
        )));
    }
    if scores.iter().any(|r| r.len() != items) {
        return Err(Error::invalid("every judge must score every item"));
    }
    if scores.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::invalid("Kendall's W scores may not be NaN"));
    }

    let (m, n) = (judges as f64, items as f64);
    let mut rank_sums = vec![0.0; items];
    let mut ties = 0.0;
    for row in scores {
        for (sum, r) in rank_sums.iter_mut().zip(mid_ranks(row)) {
            *sum += r;
        }
        ties += tie_term(row);
    }
    let mean = m * (n + 1.0) / 2.0;
    let s: f64 = rank_sums.iter().map(|r| (r - mean).powi(2)).sum();
    let denom = m * m * (n * n * n - n) - m * ties;
    if denom <= 0.0 {
        return Err(Error::Degenerate("every judge ties every item".into()));
    }
    let w = (12.0 * s / denom).clamp(0.0, 1.0);
    let chi2 = 12.0 * s / (m * n * (n + 1.0) - ties / (n - 1.0));
    let df = items - 1;
    let p = ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(chi2);
    Ok(ConcordanceResult {
        w,
        chi2,
        degrees_of_freedom: df,
        p,
        tie_correction: ties,
        judges,
        items,
    })
}

fn check_histogram(hist: &[f64], what: &'static str) -> Result<f64> {
    if hist.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid(format!("{what} needs finite nonnegative bins")));
    }
    let total: f64 = hist.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyInput("histogram has no mass"));
    }
    Ok(total)
}

/// DFT magnitudes of a real sequence.
pub fn dft_magnitudes(x: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

/// `1 - GM / AM` of the histogram's DFT magnitudes: 0 for an impulse, 1 for a uniform histogram.
///
/// Magnitudes at rounding-noise level relative to the peak count as zero.
pub fn spatial_flatness(hist: &[f64]) -> Result<f64> {
    if hist.len() < 2 {
        return Err(Error::invalid("spatial flatness needs at least 2 bins"));
    }
    check_histogram(hist, "spatial flatness")?;
    let mags = dft_magnitudes(hist);
    let n = mags.len() as f64;
    let peak = mags.iter().copied().fold(0.0, f64::max);
    let floor = n * f64::EPSILON * peak;
    let am = mags.iter().sum::<f64>() / n;
    if mags.iter().any(|&m| m <= floor) {
        return Ok(1.0);
    }
    let gm = (mags.iter().map(|m| m.ln()).sum::<f64>() / n).exp();
    Ok((1.0 - gm / am).clamp(0.0, 1.0))
}

/// Shannon entropy in bits of the normalised histogram.
pub fn shannon_entropy(hist: &[f64]) -> Result<f64> {
    let total = check_histogram(hist, "entropy")?;
    Ok(hist
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mid_ranks_average_ties() {
        assert_eq!(mid_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
        assert_eq!(tie_term(&[1.0, 2.0, 2.0, 2.0]), 24.0);
    }

    #[test]
    fn w_perfect_and_reversed() {
        let r = vec![1.0, 2.0, 3.0, 4.0];
        let perfect = kendall_w(&[r.clone(), r.clone(), r]).unwrap();
        assert_eq!(perfect.w, 1.0);
        assert_eq!(perfect.degrees_of_freedom, 3);
        assert!((perfect.chi2 - 9.0).abs() < 1e-12);

        let rev = kendall_w(&[vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]]).unwrap();
        assert_eq!(rev.w, 0.0);
        assert_eq!(rev.p, 1.0);
    }

    #[test]
    fn w_rejects_degenerate() {
        assert!(kendall_w(&[vec![1.0, 2.0]]).is_err());
        assert!(kendall_w(&[vec![1.0], vec![1.0]]).is_err());
        assert!(kendall_w(&[vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        assert!(kendall_w(&[vec![1.0, 2.0], vec![2.0]]).is_err());
    }

    #[test]
    fn flatness_endpoints() {
        assert_eq!(spatial_flatness(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(spatial_flatness(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(spatial_flatness(&[0.0, 0.0]).is_err());
        assert!(spatial_flatness(&[1.0]).is_err());
    }

    #[test]
    fn flatness_is_shift_invariant() {
        let h = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let shifted = [9.0, 3.0, 1.0, 4.0, 1.0, 5.0];
        let a = spatial_flatness(&h).unwrap();
        let b = spatial_flatness(&shifted).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn entropy_cases() {
        assert!((shannon_entropy(&[1.0; 4]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[0.0, 7.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.25, 0.25]).unwrap() - 1.5).abs() < 1e-15);
        assert!(shannon_entropy(&[0.0, 0.0]).is_err());
    }
}
