use thiserror::Error;

/// Which modelling assumption a parameter set violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// Some arrival outcome must carry at least two customers with positive probability.
    NonTrivialArrivals,
    /// Total arrival rate must exceed the ALOHA throughput e^{-1}.
    Overload,
}

impl Assumption {
    pub fn number(self) -> u8 {
        match self {
            Assumption::NonTrivialArrivals => 1,
            Assumption::Overload => 2,
        }
    }

    pub fn phrase(self) -> &'static str {
        match self {
            Assumption::NonTrivialArrivals => {
                "the input process is non-trivial: some arrival outcome must have at least two customers"
            }
            Assumption::Overload => {
                "the total arrival rate exceeds the stability threshold e^-1"
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("assumption {} violated: {}", .0.number(), .0.phrase())]
    AssumptionViolated(Assumption),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scaling index R = {r} is smaller than max p_i = {max_p}")]
    ScalingTooSmall { r: f64, max_p: f64 },

    #[error("grid time {t} maps to slot {slot}, beyond horizon {horizon}")]
    GridOutOfRange { t: f64, slot: u64, horizon: u64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error("picard iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 for domain errors, 2 for usage and parse errors,
    /// 3 for internal numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::StepTooLarge(_) | Error::NoConvergence { .. } | Error::NumericFailure(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
