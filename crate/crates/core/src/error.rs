use thiserror::Error;

/// Errors raised by the estimators and samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the interval where the construction is defined.
    #[error("{name} = {value} is outside the admissible range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A requested time lies beyond the end of a driving function.
    #[error("time {t} is beyond the driver horizon {horizon}")]
    Range { t: f64, horizon: f64 },

    /// Invalid or inconsistent input that is not a plain interval violation.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A circle or polyline gets closer to the domain boundary than the averaging radius.
    #[error("clearance violation: {0}")]
    Clearance(String),

    /// A rejection sampler ran out of attempts.
    #[error("rejection budget of {budget} attempts exhausted: {advice}")]
    RejectionBudget { budget: usize, advice: &'static str },

    /// Grid would exceed the configured memory cap.
    #[error("grid size {n} exceeds the cap {cap}")]
    TooLarge { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Error {
    Error::Domain { name, value, range }
}
