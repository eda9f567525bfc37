//! Behavioral game-bot detection toolkit.
//!
//! Players of large online games fall into distinct play styles, and a single
//! global classifier tends to blur the human/bot boundary across them. This
//! crate groups players by behavioral similarity with k-means and trains one
//! SVM bot detector per group; unknown players are routed to the nearest
//! centroid and judged by that group's local model.
//!
//! The pipeline, end to end:
//!
//! 1. [`logmodel`] ingests five-minute behavior logs (CSV or JSONL).
//! 2. [`features`] derives per-interval efficiency features, aggregates each
//!    player to one vector, Z-score standardizes, projects onto a feature set.
//! 3. [`clustering`] fits k-means over the standardized vectors.
//! 4. [`svm`] trains an SMO-based soft-margin SVM per cluster.
//! 5. [`pipeline`] orchestrates under-sampling, training, routing,
//!    model persistence, and cluster-count selection over k = 4..14.
//! 6. [`metrics`] scores confusion matrices and per-play-style accuracy.
//! 7. [`datagen`] synthesizes labeled play logs for benchmarks.
//! 8. [`experiments`] runs the feature-set x method comparison grid.

pub mod clustering;
pub mod datagen;
pub mod experiments;
pub mod features;
pub mod logmodel;
pub mod metrics;
pub mod pipeline;
pub mod seed;
pub mod svm;
