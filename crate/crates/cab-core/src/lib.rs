//! Dense error correction with the cross-and-bouquet model.
//!
//! The observation model is `y = A x0 + e0`, where the columns of `A` are
//! tightly clustered Gaussian vectors around a common unit mean (the
//! "bouquet") and `e0` is a sparse-to-dense error supported on the standard
//! basis (the "cross"). The toolkit provides:
//!
//! * seeded generation of problem instances ([`model`]),
//! * the extended l1 decoder `min |x|_1 + |e|_1  s.t.  A x + e = y`, solved
//!   as a linear program by a primal-dual interior-point method ([`solver`]),
//! * constructive recoverability certificates built from a separating
//!   hyperplane, both an iterative refinement and an exact LP check
//!   ([`certificate`]),
//! * competitor decoders: the orthogonal-complement l1 method and greedy
//!   matching pursuit ([`baselines`]),
//! * a Monte Carlo sweep harness with figure presets, CSV output, SVG
//!   charts and a channel-coding demo ([`experiments`]).
//!
//! Everything is deterministic for a fixed seed; trial-level parallelism is
//! provided by `rayon` behind the `parallel` feature (on by default) with a
//! sequential fallback when the feature is disabled.

pub mod baselines;
pub mod certificate;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numerics;
pub mod par;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, DenseVector};
