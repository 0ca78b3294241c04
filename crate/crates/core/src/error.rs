use thiserror::Error;

pub type Result<T, E = HktError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HktError {
    #[error("point {point:?} lies outside the chart domain ({domain})")]
    Domain { point: Vec<f64>, domain: String },

    #[error("integrity violation at {point:?}: {what}")]
    Integrity { point: Vec<f64>, what: String },

    #[error("metric is singular at {point:?} (condition number {condition:e})")]
    SingularMetric { point: Vec<f64>, condition: f64 },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear map is not invertible (|det| = {det:e})")]
    NotInvertible { det: f64 },

    #[error("form is not of type (0,2) with respect to I1 (residual {residual:e} at {point:?})")]
    NotType02 { residual: f64, point: Vec<f64> },

    #[error("direction {0:?} is not a unit vector")]
    NotUnit([f64; 3]),

    #[error("no admissible points: the positivity inequality fails at all {0} sampled points")]
    NoAdmissiblePoints(usize),

    #[error("horizontal space has dimension {found}, expected {expected} (singular values {singular_values:?})")]
    RankDeficient {
        expected: usize,
        found: usize,
        singular_values: Vec<f64>,
    },

    #[error("level-set sampling gave up after {0} degenerate draws")]
    SamplingExhausted(usize),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("generator function {name}: {what}")]
    Generator { name: String, what: String },

    #[error("parse error on line {line}: {what}")]
    Parse { line: usize, what: String },

    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),

    #[error("root data: {0}")]
    RootData(String),

    #[error("Joyce decomposition: {0}")]
    Decomposition(String),

    #[error("sp(1) normalization failed: {0}")]
    Normalization(String),

    #[error("inconsistent torsion proportionality: {0}")]
    InconsistentTorsion(String),

    #[error("unknown example id `{0}`")]
    UnknownExample(String),

    #[error("configuration: {0}")]
    Config(String),
}
