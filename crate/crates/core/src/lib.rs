//! Clustering from a pairwise similarity matrix by maximizing the
//! multilinear extension of a cluster-score set function over fuzzy covers.
//!
//! The pipeline is: similarity matrix → quadratic cluster score
//! ([`score`]) → initial fuzzy cover → local search ([`solve`]) → a hard
//! partition certified as a local maximizer. [`oracle`] holds brute-force
//! ground truth for small instances and [`lattice`] the partition-lattice
//! Möbius machinery for additively separable partition functions.

pub mod cover;
pub mod error;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod score;
pub mod solve;
pub mod subset;

pub use cover::{
    complement_score, derivative, embed_partition, full_gradient, global_score, point_score,
    reduced_score, reduced_value, score_contributions, support_condition, validate, CoverDraft,
    Diagnostics, FuzzyCover, Partition,
};
pub use error::{Error, Result};
pub use lattice::{
    coarsens, enumerate_partitions, is_modular, mobius_inversion_pf, mobius_partition,
    separable_from, separating_variant, zeta_pf, PartitionCode, PartitionFunction,
};
pub use score::{
    evaluate, mle_evaluate, mobius_transform, similarity_from_distances, zeta_transform,
    ClusterScore, Normalization, QuadraticScore, Score, ScoreFunction, SimilarityMatrix,
};
pub use solve::{
    init_restricted, init_score_proportional, init_uniform, is_local_maximizer, local_search,
    outlier_violations, round_up, Direction, InitMode, SearchTrace, SolverOptions, TraceRecord,
};
pub use subset::Subset;
