//! Rating-to-ranking methods and their aggregation.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::warn::{Warned, Warning};

/// Square score matrix with a zero diagonal and nonnegative entries, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid(format!("score matrix needs {} entries, got {}", n * n, data.len())));
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!("score ({i}, {j}) = {v} is not a finite nonnegative value")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::invalid(format!("score matrix diagonal ({i}, {i}) must be zero")));
                }
            }
        }
        Ok(ScoreMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        ScoreMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("score matrix rows must all have length n"));
        }
        ScoreMatrix::new(n, rows.concat())
    }

    /// `S_ij = totals_i` for `i != j`.
    pub fn from_totals(totals: &[f64]) -> Result<Self> {
        let n = totals.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    data[i * n + j] = totals[i];
                }
            }
        }
        ScoreMatrix::new(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        ScoreMatrix::new(self.n, self.data.iter().map(|v| v * c).collect())
    }

    pub fn add_assign(&mut self, other: &ScoreMatrix) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: (self.n, self.n),
                found: (other.n, other.n),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub(crate) fn add_row_score(&mut self, i: usize, score: f64) {
        for j in 0..self.n {
            if j != i {
                self.data[i * self.n + j] += score;
            }
        }
    }
}

/// Ratings per item and the ranks derived from them (1 = best, ties share a rank).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankVector {
    pub ratings: Vec<f64>,
    pub ranks: Vec<usize>,
}

fn cmp_desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// Competition ranks (1, 2, 2, 4) under `cmp`, where `Less` means "better".
pub fn competition_ranks<T>(items: &[T], cmp: impl Fn(&T, &T) -> Ordering) -> Vec<usize> {
    (0..items.len())
        .map(|i| 1 + items.iter().filter(|o| cmp(o, &items[i]) == Ordering::Less).count())
        .collect()
}

impl RankVector {
    /// Ranks by descending rating.
    pub fn from_ratings(ratings: Vec<f64>) -> Self {
        let ranks = competition_ranks(&ratings, |a, b| cmp_desc(*a, *b));
        RankVector { ratings, ranks }
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    /// Item indices from best to worst; ties keep index order.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| (self.ranks[i], i));
        idx
    }

    /// Rank-derived scores `n + 1 - k`.
    pub fn rank_scores(&self) -> Vec<f64> {
        let n = self.len();
        self.ranks.iter().map(|&k| (n + 1 - k) as f64).collect()
    }
}

fn require_items(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("ranking needs at least 2 items, got {n}")));
    }
    Ok(())
}

/// Centroids: `r = (S - S^T) e / n`, optionally rounded to integers.
pub fn centroid_ratings(s: &ScoreMatrix, round_output: bool) -> Result<RankVector> {
    let n = s.n();
    require_items(n)?;
    let ratings = (0..n)
        .map(|i| {
            let r = (0..n).map(|j| s.get(i, j) - s.get(j, i)).sum::<f64>() / n as f64;
            if round_output {
                r.round()
            } else {
                r
            }
        })
        .collect();
    Ok(RankVector::from_ratings(ratings))
}

/// ROD: offence (row sums) over defence (column sums).
pub fn rod_ratings(s: &ScoreMatrix) -> Result<Warned<RankVector>> {
    let n = s.n();
    require_items(n)?;
    let mut warnings = Vec::new();
    let ratings = s
        .row_sums()
        .into_iter()
        .zip(s.col_sums())
        .enumerate()
        .map(|(item, (o, d))| {
            if d > 0.0 {
                o / d
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                warnings.push(Warning::UndefinedRatio { item });
                0.0
            }
        })
        .collect();
    Ok(Warned {
        value: RankVector::from_ratings(ratings),
        warnings,
    })
}

/// Largest category value accepted by Majority Judgment (two decimal digits per group).
pub const MAJORITY_MAX_VALUE: u32 = 99;

/// Iterated-median grade of one item, compared exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MajorityValue {
    medians: Vec<u32>,
}

impl MajorityValue {
    pub fn new(ratings: &[u32]) -> Result<Self> {
        if ratings.is_empty() {
            return Err(Error::EmptyInput("majority judgment needs at least one rating"));
        }
        if let Some(&v) = ratings.iter().find(|&&v| v > MAJORITY_MAX_VALUE) {
            return Err(Error::invalid(format!(
                "majority judgment category value {v} exceeds {MAJORITY_MAX_VALUE}"
            )));
        }
        let mut rest = ratings.to_vec();
        rest.sort_unstable();
        let mut medians = Vec::with_capacity(rest.len());
        while !rest.is_empty() {
            medians.push(rest.remove((rest.len() - 1) / 2));
        }
        Ok(MajorityValue { medians })
    }

    pub fn medians(&self) -> &[u32] {
        &self.medians
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().expect("majority value formats as a decimal")
    }
}

impl fmt::Display for MajorityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (first, rest) = self.medians.split_first().expect("nonempty medians");
        write!(f, "{first}")?;
        if !rest.is_empty() {
            f.write_str(".")?;
            for m in rest {
                write!(f, "{m:02}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for MajorityValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorityJudgment {
    pub values: Vec<MajorityValue>,
    pub ranking: RankVector,
}

/// Majority Judgment over per-item category values; every item needs the same rater count.
pub fn majority_judgment(ratings: &[Vec<u32>]) -> Result<MajorityJudgment> {
    require_items(ratings.len())?;
    let raters = ratings[0].len();
    if ratings.iter().any(|r| r.len() != raters) {
        return Err(Error::invalid("majority judgment items must share the same raters"));
    }
    let values = ratings
        .iter()
        .map(|r| MajorityValue::new(r))
        .collect::<Result<Vec<_>>>()?;
    let ranks = competition_ranks(&values, |a, b| b.cmp(a));
    let ranking = RankVector {
        ratings: values.iter().map(MajorityValue::to_f64).collect(),
        ranks,
    };
    Ok(MajorityJudgment { values, ranking })
}

fn check_vectors(vectors: &[RankVector]) -> Result<usize> {
    let first = vectors
        .first()
        .ok_or(Error::EmptyInput("aggregation needs at least one rating vector"))?;
    let n = first.len();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("rating vectors must have equal lengths"));
    }
    if vectors.iter().flat_map(|v| &v.ratings).any(|r| r.is_nan() || *r == f64::NEG_INFINITY) {
        return Err(Error::invalid("rating vectors may not contain NaN or -inf"));
    }
    Ok(n)
}

/// Replaces `+inf` by the largest finite rating plus one.
pub fn finite_ratings(ratings: &[f64]) -> Vec<f64> {
    let max = ratings.iter().copied().filter(|r| r.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let cap = if max.is_finite() { max + 1.0 } else { 1.0 };
    ratings.iter().map(|&r| if r.is_finite() { r } else { cap }).collect()
}

/// Averaged, per-vector normalised positive-difference matrices.
pub fn pairwise_dominance(vectors: &[RankVector]) -> Result<Warned<ScoreMatrix>> {
    let n = check_vectors(vectors)?;
    let mut mean = vec![0.0; n * n];
    let mut warnings = Vec::new();
    for (p, v) in vectors.iter().enumerate() {
        let r = finite_ratings(&v.ratings);
        let dom: Vec<f64> = (0..n * n).map(|k| (r[k / n] - r[k % n]).max(0.0)).collect();
        let total: f64 = dom.iter().sum();
        if total == 0.0 {
            warnings.push(Warning::TotalTie { vector: p });
            continue;
        }
        for (m, d) in mean.iter_mut().zip(&dom) {
            *m += d / total / vectors.len() as f64;
        }
    }
    Ok(Warned {
        value: ScoreMatrix::new(n, mean)?,
        warnings,
    })
}

/// ROD applied to the averaged dominance matrix.
pub fn aggregate_ratings(vectors: &[RankVector]) -> Result<Warned<RankVector>> {
    let Warned { value: dom, mut warnings } = pairwise_dominance(vectors)?;
    let rod = rod_ratings(&dom)?;
    warnings.extend(rod.warnings);
    Ok(Warned {
        value: rod.value,
        warnings,
    })
}

/// Number of (input, pair) disagreements between `order` (best first) and the inputs.
pub fn pairwise_disagreement(order: &[usize], inputs: &[RankVector]) -> usize {
    let mut count = 0;
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            count += inputs.iter().filter(|v| v.ratings[b] > v.ratings[a]).count();
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kemenized {
    /// Aggregated ratings with ranks taken from the optimised order.
    pub ranking: RankVector,
    /// Item indices from best to worst after optimisation.
    pub order: Vec<usize>,
    pub swaps: usize,
    /// Scans performed, including the final scan without swaps.
    pub passes: usize,
}

/// Adjacent-swap optimisation of `aggregated` towards strict-majority agreement with `inputs`.
pub fn kemenize(aggregated: &RankVector, inputs: &[RankVector]) -> Result<Kemenized> {
    let n = aggregated.len();
    if inputs.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("kemenization inputs must rank the same items"));
    }
    let majority = |above: usize, below: usize| {
        2 * inputs.iter().filter(|v| v.ratings[above] > v.ratings[below]).count() > inputs.len()
    };
    let mut order = aggregated.order();
    let (mut swaps, mut passes) = (0, 0);
    loop {
        passes += 1;
        let mut changed = false;
        for i in 0..n.saturating_sub(1) {
            if majority(order[i + 1], order[i]) {
                order.swap(i, i + 1);
                swaps += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Items keep a shared rank only while they stay tied and adjacent.
    let mut ranks = vec![0; n];
    for (pos, &item) in order.iter().enumerate() {
        ranks[item] = if pos > 0 && aggregated.ratings[order[pos - 1]] == aggregated.ratings[item] {
            ranks[order[pos - 1]]
        } else {
            pos + 1
        };
    }
    Ok(Kemenized {
        ranking: RankVector {
            ratings: aggregated.ratings.clone(),
            ranks,
        },
        order,
        swaps,
        passes,
    })
}
