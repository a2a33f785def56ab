//! Crate-wide error type.
//!
//! Numerical operations in this crate refuse to produce silently wrong
//! values: evaluating a field inside a core's exclusion disk, running a
//! loop through a singularity, or placing a vortex on a census boundary
//! are all hard errors rather than best-effort guesses.

use crate::geometry::Vec2;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A vortex configuration violates its invariants (even winding,
    /// core outside the domain, coincident cores, ...).
    #[error("invalid vortex configuration: {0}")]
    InvalidConfig(String),

    /// A polygonal loop violates its invariants (too few vertices,
    /// self-intersection, zero area, ...).
    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    /// Field evaluation requested inside the exclusion disk of a
    /// singular point.
    #[error("evaluation at {point} lies within eps_core = {eps:e} of singular point {singular}")]
    SingularEvaluation {
        point: Vec2,
        singular: Vec2,
        eps: f64,
    },

    /// A loop passes within `eps_core` of a singular point of the
    /// integrand; the line integral is refused.
    #[error("loop passes within eps_core = {eps:e} of singular point {singular} (distance {distance:e})")]
    SingularLoop {
        singular: Vec2,
        distance: f64,
        eps: f64,
    },

    /// Adaptive quadrature hit its maximum subdivision depth before
    /// reaching the requested tolerance.
    #[error("quadrature failed to reach tolerance {tol:e} within depth {max_depth} on segment {a} -> {b}")]
    QuadratureFailure {
        tol: f64,
        max_depth: usize,
        a: Vec2,
        b: Vec2,
    },

    /// A vortex core lies within `eps_core` of a loop boundary: the
    /// enclosure census is ambiguous there and is never guessed.
    #[error("core at {core} lies within eps_core = {eps:e} of the loop boundary (distance {distance:e})")]
    AmbiguousEnclosure { core: Vec2, distance: f64, eps: f64 },

    /// A density field returned a negative value.
    #[error("negative density {rho} at {point}")]
    InvalidDensity { rho: f64, point: Vec2 },

    /// The reduced density at a grid point is at or below the masking
    /// floor; the Berry connection is undefined there.
    #[error("density {rho:e} at grid node ({i}, {j}) is at or below the floor {floor:e}")]
    DensityFloor {
        i: usize,
        j: usize,
        rho: f64,
        floor: f64,
    },

    /// A discretized wave function violates its invariants.
    #[error("invalid wave function: {0}")]
    InvalidWaveFunction(String),

    /// Grid size beyond the supported caps for the given electron count.
    #[error("grid {nx}x{ny} exceeds the cap {cap}x{cap} for {n_electrons} electron(s)")]
    GridTooLarge {
        nx: usize,
        ny: usize,
        cap: usize,
        n_electrons: usize,
    },

    /// A mixture ensemble violates its probability invariants.
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    /// Boltzmann weights requested at a non-positive temperature.
    #[error("temperature must be strictly positive, got {0}")]
    InvalidTemperature(f64),

    /// A Monte Carlo scenario would draw an unreasonable number of cores.
    #[error("scenario too large: expected core count {expected:.3e} exceeds {limit:.1e}")]
    ScenarioTooLarge { expected: f64, limit: f64 },

    /// Nernst signal requested with a zero temperature gradient.
    #[error("temperature gradient magnitude must be nonzero")]
    InvalidGradient,

    /// Two independent routes to the same quantity disagree beyond the
    /// requested tolerance.
    #[error("cross-check failed: census value {census}, quadrature value {quadrature}, tolerance {tol:e}")]
    CrossCheckFailed {
        census: f64,
        quadrature: f64,
        tol: f64,
    },

    /// Malformed input text (config files, serialized objects).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
