//! Exact-arithmetic toolkit for parametric geometry of numbers.
//!
//! The crate constructs sequences of integer points whose trajectories, with
//! respect to the parametric convex bodies
//! `C_u(Q) = { x : |x| <= Q, |x. u| <= Q^-(n-1) }`, realize a given
//! quasi-regular (n,0)-system within the uniform bound `2n^2`, and it
//! certifies that bound at desk scale.
//!
//! All lattice data (wedge coordinates, determinants, heights squared, dual
//! pairings) is computed exactly over arbitrary-precision integers; only
//! norms, logarithms and unit-vector entries become outward-rounded
//! intervals. Predicates decided on intervals escalate precision before
//! giving up.

pub mod construction;
pub mod exact_linalg;
pub mod interval;
pub mod minima;
pub mod rational;
pub mod systems;
pub mod verify;

pub use num_bigint;
pub use num_integer;
pub use num_rational;

pub use construction::{ConstructionResult, DirectionProxy, GrowthSequence};
pub use exact_linalg::{IntVector, Multivector, Subspace};
pub use interval::{Cert, Interval, IntervalError, PrecisionPolicy};
pub use minima::{BodyFamily, MinimaProfile, Trajectory};
pub use systems::{GraphSegment, MeshSequence, QuasiRegularSystem};
pub use verify::VerificationReport;
