use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("all coefficients are zero")]
    DegenerateInput,

    #[error("matrix is near singular: pivot {pivot:e} at index {index}")]
    NearSingular { pivot: f64, index: usize },

    #[error("numerical failure after {iterations} iterations (residual {residual:e}): {context}")]
    NumericalFailure {
        iterations: usize,
        residual: f64,
        context: String,
    },

    #[error("distribution `{0}` has no finite variance; enable exploratory mode to use it")]
    NonConforming(String),

    #[error("sampling failure: {0}")]
    SamplingFailure(String),

    #[error("rejection rate {rate:.4} exceeds 99%; epsilon too large for the interval")]
    EpsilonTooLarge { rate: f64 },

    #[error("interval mismatch: [{}, {}] vs [{}, {}]", .expected.0, .expected.1, .found.0, .found.1)]
    IntervalMismatch {
        expected: (f64, f64),
        found: (f64, f64),
    },
}

pub type Result<T> = std::result::Result<T, Error>;
