//! Regional influenza surveillance signals from social-media text.
//!
//! `flusig` covers a complete desk-scale surveillance pipeline:
//!
//! - [`corpus`]: ingest posts and weekly influenza-like-illness (ILI)
//!   records, assign regions and seasons, aggregate weekly series, and
//!   generate seeded synthetic corpora for experiments.
//! - [`text`]: deterministic forward-maximum-matching segmentation and
//!   emoticon extraction.
//! - [`features`]: TF-IDF vectorization with information-gain feature
//!   selection and a dimension sweep.
//! - [`classifier`]: a kernel SVM trained by sequential minimal
//!   optimization, separating posts that truly describe influenza from
//!   noise.
//! - [`embeddings`]: skip-gram-with-negative-sampling word vectors per
//!   region, similarity queries, and region-exclusive word networks.
//! - [`sentiment`]: dictionary-based emotion scoring with degree adverbs
//!   and negation, intensity aggregation, and emoticon frequencies.
//! - [`analytics`]: treatment-incentive ratios, chi-square tests, Pearson
//!   correlation, prolonged-post flags, and the carry-forward volume
//!   correction.
//! - [`gam`]: negative-binomial generalized additive models with a
//!   penalized cubic-spline smooth of weekly post volume and a lag-2 ILI
//!   covariate.
//! - [`pipeline`]: config-driven orchestration backing the `flusig`
//!   command-line binary.
//!
//! Each capability has a runnable demo under `examples/`; see the README
//! for the tour.

pub mod analytics;
pub mod chart;
pub mod classifier;
pub mod corpus;
pub mod embeddings;
pub mod features;
pub mod gam;
pub mod pipeline;
pub mod sentiment;
pub mod special;
pub mod text;
