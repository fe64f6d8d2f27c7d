//! Ranking methods over utility ratings and agreement statistics.
//!
//! ```
//! use legibility::rank::{centroid_ratings, rod_ratings, ScoreMatrix};
//!
//! let s = ScoreMatrix::from_totals(&[6.0, 4.0, 2.0]).unwrap();
//! assert_eq!(centroid_ratings(&s, false).unwrap().ratings, vec![2.0, 0.0, -2.0]);
//! assert_eq!(rod_ratings(&s).unwrap().value.ratings, vec![2.0, 1.0, 0.4]);
//! ```

pub mod methods;
pub mod stats;
pub mod table;

pub use methods::{
    aggregate_ratings, centroid_ratings, competition_ranks, finite_ratings, kemenize, majority_judgment,
    pairwise_disagreement, pairwise_dominance, rod_ratings, Kemenized, MajorityJudgment, MajorityValue,
    RankVector, ScoreMatrix, MAJORITY_MAX_VALUE,
};
pub use stats::{dft_magnitudes, kendall_w, mid_ranks, shannon_entropy, spatial_flatness, ConcordanceResult};
pub use table::{
    ratings_to_scores, read_ratings_csv, Category, CategoryScale, RatingRecord, RatingsTable, Scope, Scoped,
};
