use thiserror::Error;

/// Errors produced by curve construction, the solvers and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A curve was evaluated outside of its domain (negative or non-finite time).
    #[error("time {0} is outside the curve domain [0, inf)")]
    Domain(f64),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// An operation requiring a non-decreasing (or eventually non-decreasing)
    /// input was handed something else.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed input document; `field` is the path of the offending value.
    #[error("invalid input at `{field}`: {message}")]
    Parse { field: String, message: String },

    /// The aggregate long-term arrival rate reaches the server's top rate.
    #[error("unstable system: aggregate arrival rate {arrival} >= service rate {service}")]
    Instability { arrival: f64, service: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(t))
    }
}
