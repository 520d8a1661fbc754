//! Numerical laboratory for tracking-type optimal control problems
//!
//! ```text
//! min ‖S(u) − y_d‖^p + ‖u − u_d‖^p   over u
//! ```
//!
//! with non-affine control-to-state maps `S`. Such problems are metric
//! projections onto the graph `{(S(u), u)}`; since that graph is not convex,
//! some targets `(y_d, u_d)` have several global solutions and the solution
//! set admits no continuous selection. The [`explorer`] module turns these
//! facts into reproducible experiments: affinity defects, ridge search for
//! nonunique targets, segment uniqueness checks and discontinuity witnesses.

pub mod error;
pub mod explorer;
pub mod maps;
pub mod problem;
pub mod report;
pub mod scenario;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
pub use maps::{AbsMap, AffineMap, ControlToStateMap, SharedMap, SquareMap};
pub use problem::{TargetTuple, TrackingProblem};
pub use solver::{Bounds, MultistartOptions, MultistartReport};
