//! Robust incremental pose-graph optimization.
//!
//! This crate implements an outlier-robust smoothing back-end for pose-graph
//! SLAM. The core algorithm (`risam`) layers graduated non-convexity over an
//! incremental Bayes-tree solver: each update solves a short schedule of
//! progressively less convex robust costs, taking bounded dog-leg steps, so
//! gross outlier loop closures are rejected without giving up online
//! efficiency. Batch graduated optimization and classic M-estimator baselines
//! (Geman-McClure, Huber, Max-Mixture) are included alongside a benchmark
//! harness with synthetic grid-world datasets and incremental accuracy
//! metrics.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability, and the `risam` binary for the benchmark CLI.

pub mod bench;
pub mod dataset;
pub mod geometry;
pub mod graph;
pub mod kernels;
pub mod metrics;
pub mod optimizer;
pub mod tree;

pub use geometry::{LieGroup, Pose2, Pose3, R1};
pub use graph::{Factor, FactorGraph, Key, NoiseModel, Values};
pub use kernels::{Kernel, MuSchedule};
