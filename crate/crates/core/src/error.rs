use alloc::string::String;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter or configuration value violates its invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Name of the offending field.
        name: &'static str,
        /// Human-readable constraint that failed.
        reason: String,
    },

    /// A tabulated drive was used without a declared period.
    #[error("tabulated drive has no declared period")]
    MissingPeriod,

    /// The adaptive step fell below the representable resolution.
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow {
        /// Time at which the step controller gave up.
        t: f64,
    },

    /// The state left the finite range.
    #[error("non-finite state at t = {t}")]
    NonFinite {
        /// Time of the first non-finite value.
        t: f64,
    },

    /// A series is too short for the requested operation.
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples {
        /// Minimum number of samples.
        needed: usize,
        /// Number of samples provided.
        got: usize,
    },

    /// An input or output signal is identically zero over the analysis window.
    #[error("degenerate signal: max |{axis}| = 0")]
    DegenerateSignal {
        /// Which axis was degenerate (`"x"` or `"y"`).
        axis: &'static str,
    },

    /// The loop has zero perimeter.
    #[error("zero perimeter")]
    ZeroPerimeter,

    /// The trajectory does not span a complete drive period.
    #[error("trajectory of length {horizon} does not span one period {period}")]
    ShortTrajectory {
        /// Covered time span.
        horizon: f64,
        /// Drive period.
        period: f64,
    },

    /// A parameter vector has the wrong dimension or leaves its bounds.
    #[error("invalid parameter vector: {0}")]
    InvalidTheta(String),
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
