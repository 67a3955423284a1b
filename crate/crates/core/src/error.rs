use thiserror::Error;

/// Errors raised by model construction, geometry, the LP core and control queries.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("bound {index} of {what} must be positive and finite, got {value}")]
    NonPositiveBound {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("normalization requested target bounds but the model has none")]
    MissingTarget,
    #[error("constraint {0} is not implemented; only the unit amplitude constraint is supported")]
    NotImplemented(&'static str),
    #[error("direction must be finite and nonzero")]
    ZeroDirection,
    #[error("bad projection axes ({0}, {1}) for dimension {2}")]
    BadAxes(usize, usize, usize),
    #[error("polygon is not convex and counterclockwise")]
    NotConvex,
    #[error("generator entry {magnitude:e} at step {step} exceeds the growth guard")]
    UnstableGrowth { step: usize, magnitude: f64 },
    #[error("state matrix is singular")]
    SingularA,
    #[error("horizon {horizon} is shorter than the state dimension {n}")]
    HorizonTooShort { horizon: usize, n: usize },
    #[error("bad step range {0}..{1} for horizon {2}")]
    BadRange(usize, usize, usize),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("simplex hit the iteration limit ({0})")]
    IterationLimit(usize),
    #[error("internal solver error: {0}")]
    Internal(String),
    #[error("solver witness failed re-verification: {0}")]
    Verification(String),
    #[error("state not reachable within {max_steps} steps (violation {gap:e})")]
    NotReachable {
        max_steps: usize,
        direction: Option<Vec<f64>>,
        gap: f64,
    },
    #[error("state is not a member of the region at horizon {0}")]
    NotMember(usize),
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error("{0} generators exceed the enumeration cap of {1} sign bits")]
    TooManyGenerators(usize, u32),
    #[error("zonotope is not full-dimensional")]
    DegenerateZonotope,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
