use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("chirp requires a != 0 and b != 0 (got a = {a}, b = {b})")]
    ChirpParameters { a: f64, b: f64 },
    #[error("support length must be at least 2, got {0}")]
    Support(usize),
    #[error("tabulated generator needs at least 2 grid values, got {0}")]
    Grid(usize),
    #[error("generator parameters must be finite")]
    NonFinite,
    #[error("modulation requires a real-valued base generator")]
    ComplexBase,
    #[error("modulation frequency must be finite and nonzero, got {0}")]
    Modulation(f64),
    #[error("system {label} cannot be built from {generator}")]
    IncompatibleSystem { label: String, generator: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("causal signals need c_0 != 0")]
    ZeroLeadingCoefficient,
    #[error("coefficient list is empty")]
    Empty,
    #[error("index set requires n >= 1")]
    ZeroIndex,
    #[error("support length must be at least 2, got {0}")]
    Support(usize),
    #[error("coefficient c_{0} is required but not available")]
    MissingCoefficient(usize),
    #[error("alpha - beta must not be a multiple of pi (alpha = {alpha}, beta = {beta})")]
    DegenerateModulation { alpha: f64, beta: f64 },
    #[error("ambiguity construction needs N >= 2, got {0}")]
    TooShort(usize),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("sampling density must be 2 or 3, got {0}")]
    Density(usize),
    #[error("n_max must be at least 1")]
    EmptyPlan,
    #[error("interval {interval} has {found} points, expected {expected}")]
    IntervalSize { interval: usize, found: usize, expected: usize },
    #[error("sample offset {0} is not inside (0, 1)")]
    Offset(f64),
    #[error("SNR must be finite, got {0}")]
    Snr(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdcrError {
    #[error("expected sampling density {expected}, samples have {found}")]
    Density { expected: usize, found: usize },
    #[error("real reconstruction requires a real-valued generator")]
    ComplexGenerator,
    #[error("local reconstruction needs L >= 1 and samples up to interval L - 1 (L = {l}, available {available})")]
    LocalRange { l: usize, available: usize },
    #[error("degenerate sample at step {step}")]
    DegenerateSample { step: usize },
    #[error("ambiguous root at step {step}")]
    AmbiguousRoot { step: usize },
    #[error("sample design is not valid: {0}")]
    Samples(#[from] SamplingError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("coefficient lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("reference coefficients are all zero")]
    ZeroReference,
    #[error("empty error list")]
    Empty,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
}
