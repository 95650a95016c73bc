use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tree depth {depth} outside supported range 1..={max}")]
    DepthOutOfRange { depth: usize, max: usize },

    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("spatial dimension {0} is not supported (only dim = 1)")]
    UnsupportedDimension(usize),

    #[error("points live on different time grids (dt {left} vs {right})")]
    GridMismatch { left: f64, right: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("concatenation tail must start at the origin, starts at {0}")]
    TailNotAtOrigin(f64),

    #[error("malformed node address {0:?} (expected \"level:bits\")")]
    InvalidAddress(String),

    #[error("node {0} does not belong to the tree")]
    NodeOutOfRange(String),

    #[error("non-finite value at node {0}")]
    NonFinite(String),

    #[error("invalid stopping region: {0}")]
    InvalidRegion(String),

    #[error("stopping region marks the starting node; a strictly positive stopping time is required")]
    RegionNotPositive,

    #[error("evaluation node {0} lies strictly after the stopping region")]
    NotDominated(String),

    #[error("hitting box ({lo}, {hi}) does not contain the origin")]
    OriginOutsideBox { lo: f64, hi: f64 },

    #[error("hitting time bound {s} outside (0, {horizon}]")]
    HorizonOutOfRange { s: f64, horizon: f64 },

    #[error("drift bound L = {l} with step h = {h} gives L*h > 1; tilted probabilities leave [0, 1]")]
    DriftBoundViolated { l: f64, h: f64 },

    #[error("drift {mu} at node {node} exceeds the bound {l}")]
    DriftOutOfBounds { node: String, mu: f64, l: f64 },

    #[error("explicit scheme needs dt * L < 1, got dt = {dt}, L = {l}")]
    ContractionViolated { dt: f64, l: f64 },

    #[error("brute force limited to depth {max}, got {depth}")]
    DepthTooLarge { depth: usize, max: usize },

    #[error("process is not a supermartingale at node {node}: tilted mean exceeds value by {excess}")]
    NotSupermartingale { node: String, excess: f64 },

    #[error("process is not a martingale at node {node}: tilted mean differs by {gap}")]
    NotMartingale { node: String, gap: f64 },

    #[error("Skorokhod input must start at 0, got {0}")]
    SkorokhodStart(f64),

    #[error("penalty weight must be positive, got {0}")]
    NonPositivePenalty(f64),

    #[error("change-of-variable rate must be <= 0, got {0}")]
    PositiveRate(f64),

    #[error("negative parameter {name} = {value}")]
    NegativeParameter { name: &'static str, value: f64 },

    #[error("subsolution family is empty")]
    EmptyFamily,

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
