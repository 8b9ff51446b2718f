use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at byte {offset} is not an integer literal")]
    NonIntegerExponent { offset: usize },
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("metric file line {line}: {message}")]
    MetricFile { line: usize, message: String },
    #[error("conflicting symmetric assignment for g[{i}][{j}]: `{first}` vs `{second}`")]
    ConflictingAssignment {
        i: usize,
        j: usize,
        first: String,
        second: String,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("contraction slots {0} and {1} have the same variance")]
    VarianceClash(usize, usize),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("metric is singular at the evaluation point (det = {det:e})")]
    SingularMetric { det: f64 },
    #[error("metric is not Lorentzian at the evaluation point ({negative} negative eigenvalues)")]
    NotLorentzian { negative: usize },
    #[error("expression node cap exceeded ({nodes} > {cap}); lower the derivative order or simplify the metric")]
    NodeCap { nodes: usize, cap: usize },
    #[error("derivative order {0} exceeds the pipeline ceiling")]
    OrderTooHigh(usize),
    #[error("vector is not null: g(k,k) = {0:e}")]
    NotNull(f64),
    #[error("vector is zero")]
    ZeroVector,
    #[error("seed vector is degenerate with k")]
    DegenerateSeed,
    #[error("boost parameter must be non-zero")]
    ZeroBoost,
    #[error("spin matrix is not orthogonal (residual {0:e})")]
    NotOrthogonal(f64),
    #[error("frame field is not rigid near the point (residual {0:e})")]
    NotRigid(f64),
    #[error("operation requires dimension {required}, got {found}")]
    WrongDimension { required: usize, found: usize },
    #[error("tensor fails Weyl-like symmetries (residual {0:e})")]
    NotWeylLike(f64),
    #[error("tensor is not trace-free (trace {0:e})")]
    NotTraceFree(f64),
    #[error("tensor is zero")]
    ZeroTensor,
    #[error("bracket domain violation: bo(Q) = {bo_q} exceeds -bo(T)-1 = {limit}")]
    BracketDomain { bo_q: i32, limit: i32 },
    #[error("gauge fix degenerate: S01 = S22 at the point")]
    DegenerateGauge,
    #[error("unknown catalog entry `{0}`")]
    UnknownMetric(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
