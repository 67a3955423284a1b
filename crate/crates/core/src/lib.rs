//! Open-loop control ability of linear discrete-time systems.
//!
//! The controllability region of `x_{k+1} = A x_k + B u_k` under the unit
//! amplitude constraint `‖u_k‖∞ ≤ 1` is the zonotope generated by the
//! columns of `A^i B`. This crate builds those regions, measures them,
//! solves minimum-time steering problems over them with a small
//! bounded-variable simplex, and compares two plants by region containment.
//!
//! Brute-force reference implementations live in [`oracle`] and back both
//! the test-suite and the `verify` command of the CLI.

pub mod control;
mod error;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod par;
pub mod region;
pub mod rng;
pub mod zonotope;

pub use control::{
    compare_ability, min_time, simulate, strategy_space_dim, verify_theorem1, AbilityVerdict,
    BoundaryStatus, ControlSolution, Relation, TheoremReport, Trajectory,
};
pub use error::{Error, Result};
pub use model::{ConstraintKind, ConstraintSpec, LdtSystem, ModelFile, NormalizationSpec};
pub use par::Exec;
pub use region::{
    controllability_report, expansion_check, reach_region, recover_region, ControllabilityReport,
    ExpansionVerdict, RegionFamily, RegionKind,
};
pub use zonotope::{Polygon, ShapeReport, Zonotope};
