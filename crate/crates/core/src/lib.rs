//! Numerical robustness toolkit for two small algorithms that go wrong under
//! floating-point arithmetic:
//!
//! * proportional task rebalancing across cluster nodes, in a binary64 form that
//!   can lose tasks, an integer form that cannot, and an exact rational reference;
//! * the 3D orientation predicate, evaluated from a single base point, by a
//!   three-way majority vote, and exactly.
//!
//! Around both sit seeded, reproducible searches for counterexamples, a minimal
//! incremental convex hull with an exact validity checker, and an SMT-LIB2
//! emitter for the majority-vote disagreement query.

pub mod fuzz;
pub mod geometry;
pub mod hexfloat;
pub mod rational;
pub mod rebalance;
pub mod search;

mod batch;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

/// Version tag written into every machine-readable report.
pub const SCHEMA_VERSION: u32 = 1;

/// Name of the pseudo-random generator used by every seeded search.
///
/// Each iteration draws from its own ChaCha8 stream (`seed_from_u64(seed)`,
/// stream = iteration index), so results do not depend on how iterations are
/// split across workers.
pub const GENERATOR_NAME: &str = "chacha8/seed_from_u64+stream=iteration";
