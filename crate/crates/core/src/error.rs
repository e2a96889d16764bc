use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid units: {0}")]
    InvalidUnits(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid pole window: {0}")]
    InvalidPole(String),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("function has {0} pole window(s); use finite_part_quad")]
    PolesPresent(usize),
    #[error("non-finite sample at r = {r}")]
    NonFinite { r: f64 },
    #[error("pole at {center} rejected: {reason}")]
    NotAPole { center: f64, reason: String },
    #[error("no singularity at {center}")]
    NoSingularity { center: f64 },
    #[error("pole at {0} has no resolved Laurent coefficients")]
    UnresolvedPole(f64),
    #[error("function is not normalizable: {0}")]
    NonNormalizable(String),
    #[error("degenerate function: {0}")]
    DegenerateFunction(String),
    #[error("ansatz does not satisfy the perturbed Riccati identity: remainder std dev {std_dev:.3e} >= {tolerance:.1e}")]
    AnsatzNotConstant { std_dev: f64, tolerance: f64 },
    #[error("order {requested} needs orders 1..{requested} - 1 first, have {available}")]
    MissingPriorOrders { requested: usize, available: usize },
    #[error("order {requested} exceeds the configured maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("state mismatch: {0}")]
    StateMismatch(String),
    #[error("eigenvalue not bracketed: {0}")]
    NotBracketed(String),
    #[error("eigenfunction has {found} nodes, expected {expected}")]
    NodeMismatch { expected: usize, found: usize },
    #[error("wavefunction tail diverges: {0}")]
    DivergentTail(String),
    #[error("shooting failed to converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
