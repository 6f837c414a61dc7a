use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input vector or matrix had the wrong length.
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape {
        /// Length the operation required.
        expected: usize,
        /// Length it was given.
        actual: usize,
    },

    /// The data handed to an operation is unusable (empty, ragged, non-finite).
    #[error("invalid data: {0}")]
    Data(String),

    /// A configuration value is outside its allowed range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The loss became non-finite during training.
    #[error("training diverged at epoch {epoch}")]
    Diverged {
        /// Zero-based epoch in which the loss blew up.
        epoch: usize,
    },

    /// A 1D-only operation was called on a multi-input network.
    #[error("operation needs a 1-input network, got {0} inputs")]
    Dimensionality(usize),

    /// A box or interval has zero or negative extent, or an index is out of range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Taylor expansion was asked for with a missing derivative.
    #[error("incomplete derivative chain: missing {0}")]
    IncompleteChain(String),

    /// `log` was applied to a non-positive value.
    #[error("log-domain error: h({x}) = {value} is not positive")]
    LogDomain {
        /// Probe location.
        x: f64,
        /// Value that `log` would have been applied to.
        value: f64,
    },

    /// Not enough samples to carry the difference table far enough.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// A function evaluation returned NaN or infinity.
    #[error("non-finite evaluation at x = {0}")]
    NonFinite(f64),

    /// A constructed segment would dip below zero, where the summing ReLU
    /// would clip it.
    #[error(
        "segment {segment} dips to {min_value} below zero; lift the target by at least {needed_lift}"
    )]
    OffsetInfeasible {
        /// Index of the first offending segment.
        segment: usize,
        /// Smallest line value inside that segment.
        min_value: f64,
        /// Constant lift that makes every segment feasible.
        needed_lift: f64,
    },
}

/// Result alias for this crate.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Shape { expected, actual })
    }
}
