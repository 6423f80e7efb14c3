//! Queryable top-down hierarchical partitioning.
//!
//! A tree is built by recursively bisecting a point set with one of four
//! rules: a random hyperplane, the exact spectral split, a power-iteration
//! approximation of it, or 2-means. Vector inputs give trees whose internal
//! nodes store a hyperplane, so new points can be routed to a small bucket
//! for kNN classification and anomaly scoring. Trees can also be scored with
//! the Dasgupta hierarchy cost and leaf purity.

pub mod anomaly;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod similarity;
pub mod spectral;
pub mod splitrules;
pub mod tree;

pub use dataset::{ExplicitGraph, VectorDataset};
pub use error::{Error, Result};
pub use similarity::SimilarityView;
pub use splitrules::{BuildConfig, Rule, RuleTag, SplitPlan};
pub use tree::{build, BuildInput, HCTree};
