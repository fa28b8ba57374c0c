//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by state algebra, circuit elements, post-selection, and
/// circuit-file handling.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Normalization was requested for a state with vanishing norm, usually
    /// because an upstream post-selection matched nothing.
    #[error("state has zero norm (norm² = {norm_sq:.3e})")]
    ZeroState { norm_sq: f64 },

    /// A state operation required a normalized input but received one with
    /// |norm − 1| beyond tolerance.
    #[error("state is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    /// Adaptive quadrature could not reach the requested tolerance within its
    /// evaluation budget.
    #[error("pump integral did not converge: {detail}")]
    QuadratureFailure { detail: String },

    /// A pair source was given all-zero amplitudes.
    #[error("degenerate source: all pair amplitudes are zero")]
    DegenerateSource,

    /// Two photons were routed onto the same mode by a relabeling element, or
    /// two states being tensored share a mode.
    #[error("mode collision on {mode}")]
    ModeCollision { mode: String },

    /// Coupler parameters do not form a unitary two-path transformation.
    #[error("non-unitary coupler: {detail}")]
    NonUnitaryCoupler { detail: String },

    /// A detection pattern matched nothing above the probability floor.
    #[error("detection pattern has zero probability")]
    ImpossiblePattern,

    /// The post-selected state does not factor into a bin register times a
    /// single colour pattern; tracing over colour would leave a mixed state.
    #[error("state is not colour-separable: patterns {first} and {second} both present")]
    NotColourSeparable { first: String, second: String },

    /// A basis ket does not carry exactly one photon per register path (or
    /// carries photons outside the register), so no bin register exists.
    #[error("ket {ket} does not define a bin register over the requested paths")]
    OccupancyMismatch { ket: String },

    /// Two bin registers of different arity were compared.
    #[error("register arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    /// Circuit description file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Circuit description parsed but failed validation.
    #[error("invalid circuit ({stanza}): {msg}")]
    Validation { stanza: String, msg: String },

    /// A parameter override or grid axis names no declared parameter.
    #[error("unknown parameter `{name}`")]
    UnknownParameter { name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
