//! Two-stage candidate-graph sparsification for the symmetric TSP.
//!
//! Stage 1 builds a high-recall *base* candidate graph as the union of two
//! heuristics: alpha-nearest edges ranked by minimum 1-trees with Held–Karp
//! node penalties, and a POPMUSIC-style generator that keeps every edge
//! appearing in locally optimized subtours. Stage 2 scores each base edge
//! with a linear model trained on exactly labeled instances and prunes via a
//! per-node softmax cumulative-mass rule, calibrated so validation coverage
//! stays above a target while retaining as few edges as possible.
//!
//! The crate ships everything needed to run that pipeline on a desk:
//!
//! - [`instances`]: TSPLIB instance I/O, the four supported distance
//!   conventions, and seeded synthetic generators for five spatial
//!   distributions.
//! - [`candidates`]: 1-trees, subgradient ascent, alpha values, the
//!   POPMUSIC-style generator, provenance-tagged unions, and candidate-file
//!   export for downstream solvers.
//! - [`oracle`]: exact tours at desk scale (exhaustive, bitmask DP, and
//!   branch-and-bound over the 1-tree bound) plus edge labeling.
//! - [`features`]: the 16 distance-type-agnostic edge features and train-set
//!   standardization.
//! - [`learn`]: weighted logistic-regression and squared-hinge SVM training,
//!   scoring, persistence, and feature-importance export.
//! - [`prune`]: the node-level softmax cumulative-mass selection rule and
//!   validation-set threshold calibration.
//! - [`localsearch`]: candidate-restricted tour construction and 2-opt/Or-opt
//!   improvement for measuring tour-quality impact.
//! - [`bench`]: the end-to-end experiment harness with reproducible seeded
//!   runs, metrics, and lost-edge provenance analysis.
//!
//! Every operation is deterministic under a fixed seed; see `examples/` for
//! one runnable program per capability and `FORMATS.md` for the file schemas.

pub mod bench;
pub mod candidates;
pub mod error;
pub mod features;
pub mod instances;
pub mod learn;
pub mod localsearch;
pub mod oracle;
pub mod prune;
pub mod seeding;

pub use error::{Error, Result};
