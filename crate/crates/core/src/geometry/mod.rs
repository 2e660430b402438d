//! The 3D orientation predicate in three strengths, a minimal incremental
//! convex hull driven by any of them, and an exact hull validity checker.

mod exact;
mod hull;
mod point;
mod predicate;
mod validate;

pub use exact::{collinear_exact, orient_exact};
pub use hull::{
    incremental_hull, FailureReason, HullError, HullFacets, HullFailure, HullOutcome, HullPredicate,
};
pub use point::{parse_points, OrientationSign, Point3, PointError};
pub use predicate::{
    base_determinant, orient_base, orient_base_width, orient_majority, orient_majority_width, Base,
    FloatWidth, MajorityVote,
};
pub use validate::{validate_hull, CheckResult, ContainmentWitness, EulerCheck, ValidityReport};
