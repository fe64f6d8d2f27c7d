//! Ranking reports in the layout of an overall-ranking table: rank, method,
//! rating, spread of categories, and a method-specific last column.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rank::{
    aggregate_ratings, centroid_ratings, kemenize, majority_judgment, ratings_to_scores, rod_ratings,
    CategoryScale, MajorityValue, RankVector, RatingsTable, Scope,
};
use crate::warn::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    Centroids,
    Rod,
    Mj,
    /// Centroids and Majority Judgment aggregated by dominance + ROD, then Kemenized.
    Ensemble,
}

impl RankMethod {
    pub const ALL: [RankMethod; 4] = [RankMethod::Centroids, RankMethod::Rod, RankMethod::Mj, RankMethod::Ensemble];

    pub fn as_str(self) -> &'static str {
        match self {
            RankMethod::Centroids => "centroids",
            RankMethod::Rod => "rod",
            RankMethod::Mj => "mj",
            RankMethod::Ensemble => "ensemble",
        }
    }

    fn title(self) -> &'static str {
        match self {
            RankMethod::Centroids => "Ranking by Centroids method",
            RankMethod::Rod => "Ranking by ROD method",
            RankMethod::Mj => "Ranking by Majority Judgment method",
            RankMethod::Ensemble => "Aggregation of rankings by ROD method",
        }
    }
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RankMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown ranking method `{s}` (expected centroids, rod, mj or ensemble)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReportOptions {
    pub scale: CategoryScale,
    /// Round centroid ratings to integers.
    pub round_centroids: bool,
}

fn serialize_rating<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("Infinity")
    } else {
        s.serialize_str("-Infinity")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub rank: usize,
    pub method: String,
    #[serde(serialize_with = "serialize_rating")]
    pub rating: f64,
    /// Rating as printed in the text table (exact for Majority Judgment).
    pub rating_text: String,
    /// Category counts `[X, A, B, N]`.
    pub spread: [usize; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Method at this position after Kemenization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimized: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingReport {
    pub method: RankMethod,
    pub scope: Scope,
    /// `overall`, a rater id or a document id.
    pub label: String,
    pub rows: Vec<ReportRow>,
    pub warnings: Vec<Warning>,
}

/// Utility class of a majority value with a `+`/`-` marker for the upper or lower
/// part of the class: later medians above or below the majority grade.
pub fn majority_category(value: &MajorityValue, scale: &CategoryScale) -> String {
    let medians = value.medians();
    let class = scale.nearest(medians[0] as f64);
    let grade = scale.value(class);
    let marker = medians[1..]
        .iter()
        .find(|&&m| m != grade)
        .map(|&m| if m > grade { " +" } else { " -" })
        .unwrap_or("");
    format!("{}{}", class.label(), marker)
}

fn format_rating(v: f64, decimals: usize) -> String {
    if v == f64::INFINITY {
        "∞".into()
    } else {
        format!("{v:.decimals$}")
    }
}

fn rows_for(
    methods: &[String],
    ranking: &RankVector,
    spread: &[[usize; 4]],
    text: impl Fn(usize) -> String,
) -> Vec<ReportRow> {
    ranking
        .order()
        .into_iter()
        .map(|i| ReportRow {
            rank: ranking.ranks[i],
            method: methods[i].clone(),
            rating: ranking.ratings[i],
            rating_text: text(i),
            spread: spread[i],
            category: None,
            optimized: None,
        })
        .collect()
}

/// Builds one report per scope group.
pub fn rank_table(
    table: &RatingsTable,
    method: RankMethod,
    scope: Scope,
    opts: &ReportOptions,
) -> Result<Vec<RankingReport>> {
    let methods = table.methods();
    let scores = ratings_to_scores(table, scope, &opts.scale)?;
    let values = table.category_values(scope, &opts.scale)?;
    let counts = table.category_counts(scope);

    let mut reports = Vec::with_capacity(scores.len());
    for ((s, v), c) in scores.into_iter().zip(values).zip(counts) {
        let mut warnings = Vec::new();
        let rows = match method {
            RankMethod::Centroids => {
                let r = centroid_ratings(&s.value, opts.round_centroids)?;
                rows_for(methods, &r, &c.value, |i| format_rating(r.ratings[i], 1))
            }
            RankMethod::Rod => {
                let r = rod_ratings(&s.value)?.collect_into(&mut warnings);
                rows_for(methods, &r, &c.value, |i| format_rating(r.ratings[i], 3))
            }
            RankMethod::Mj => {
                let mj = majority_judgment(&v.value)?;
                let mut rows = rows_for(methods, &mj.ranking, &c.value, |i| mj.values[i].to_string());
                for row in &mut rows {
                    let i = methods.iter().position(|m| *m == row.method).expect("known method");
                    row.category = Some(majority_category(&mj.values[i], &opts.scale));
                }
                rows
            }
            RankMethod::Ensemble => {
                let inputs = [
                    centroid_ratings(&s.value, opts.round_centroids)?,
                    majority_judgment(&v.value)?.ranking,
                ];
                let agg = aggregate_ratings(&inputs)?.collect_into(&mut warnings);
                let k = kemenize(&agg, &inputs)?;
                let mut rows = rows_for(methods, &agg, &c.value, |i| format_rating(agg.ratings[i], 3));
                for (row, &item) in rows.iter_mut().zip(&k.order) {
                    row.optimized = Some(methods[item].clone());
                }
                rows
            }
        };
        reports.push(RankingReport {
            method,
            scope,
            label: s.label,
            rows,
            warnings,
        });
    }
    Ok(reports)
}

impl RankingReport {
    /// Aligned text table.
    pub fn to_text(&self) -> String {
        let mut header = vec!["Rank", "Method", "Rating", "Spread X/A/B/N"];
        match self.method {
            RankMethod::Mj => header.push("Category"),
            RankMethod::Ensemble => header.push("Optimization"),
            _ => {}
        }
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let [x, a, b, n] = r.spread;
                let mut cells = vec![r.rank.to_string(), r.method.clone(), r.rating_text.clone(), format!("{x}/{a}/{b}/{n}")];
                if let Some(extra) = r.category.as_ref().or(r.optimized.as_ref()) {
                    cells.push(extra.clone());
                }
                cells
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }

        let mut out = String::new();
        let _ = writeln!(out, "{} ({}: {})", self.method.title(), self.scope, self.label);
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}", w = w))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let header: Vec<String> = header.into_iter().map(String::from).collect();
        let _ = writeln!(out, "{}", line(&header));
        for row in &body {
            let _ = writeln!(out, "{}", line(row));
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}
