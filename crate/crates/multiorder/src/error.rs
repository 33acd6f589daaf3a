//! Error type shared across the crate.

use thiserror::Error;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced while parsing inputs, fitting models, or running analyses.
///
/// Parse errors always carry the 1-based line number of the offending input
/// line so callers can point users at the exact problem.
#[derive(Debug, Error)]
pub enum Error {
    /// An input line could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parameter was outside its documented domain.
    #[error("invalid {parameter}: {message}")]
    InvalidParameter {
        parameter: &'static str,
        message: String,
    },

    /// The operation requires at least one observed path.
    #[error("path collection is empty")]
    EmptyCollection,

    /// No sub-path of the requested order exists in the data, so the layer
    /// cannot be estimated. `max_order` is the largest order the collection
    /// supports (the length of its longest path).
    #[error("no sub-paths of order {order}; the longest path supports order {max_order} at most")]
    EmptyLayer { order: usize, max_order: usize },

    /// A conditioning history had the wrong number of vertices for the layer
    /// it was offered to.
    #[error("history has {actual} vertices but the layer conditions on {expected}")]
    HistoryLength { expected: usize, actual: usize },

    /// A path traverses an edge that the supplied graph does not contain.
    /// The graph must be a superset of the edges observed in the paths.
    #[error("paths traverse edge {from} -> {to}, which the supplied graph lacks")]
    MissingEdge { from: String, to: String },

    /// A vertex label collides with a token the operation reserves for
    /// internal use.
    #[error("vertex label {label:?} is reserved by this operation")]
    ReservedLabel { label: String },

    /// An exact path count exceeded 128-bit integer range.
    #[error("path count at length {order} exceeds 128-bit integer range")]
    CountOverflow { order: usize },

    /// The two models of a likelihood-ratio test have identical degrees of
    /// freedom, leaving the test without a sampling distribution.
    #[error("test of order {alt_order} against order {null_order} has zero extra degrees of freedom")]
    DegenerateTest { null_order: usize, alt_order: usize },

    /// A model assigned probability zero to data it was fitted on, which
    /// indicates the model and collection are inconsistent.
    #[error("log-likelihood of order-{order} model is not finite on the fitted data")]
    NonFiniteLikelihood { order: usize },

    /// Power iteration did not reach the requested tolerance. The final
    /// iterate and its residual are preserved for inspection.
    #[error("power iteration stopped after {iterations} iterations with residual {residual:e}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    /// Repeated redraws failed to produce transition rows that are
    /// distinguishable across the histories ending at `vertex`.
    #[error("could not draw distinguishable transition rows at vertex {vertex} after {attempts} attempts")]
    RejectionExhausted { vertex: String, attempts: usize },
}
