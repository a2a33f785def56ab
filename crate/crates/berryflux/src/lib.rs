//! Berry-connection fields from spin-vortex configurations and
//! discretized few-electron wave functions, with topological
//! quantization checks and electromotive-force engines.
//!
//! The crate is organized around six concerns:
//!
//! - [`field`]: the spin-vortex angular field `chi`, its closed-form
//!   gradient, and the Berry-connection vector potential
//!   `A = -1/2 grad chi`, plus velocity and current fields.
//! - [`topology`]: polygonal loops, adaptive line integrals, exact
//!   enclosed-vortex census, and flux-quantization reports.
//! - [`manybody`]: the Berry connection evaluated directly from
//!   discretized one- and two-electron wave functions, phase
//!   factorization residuals, and density-matrix mixtures with
//!   Boltzmann weights.
//! - [`emf`]: the classical Faraday flux rule (total-derivative form
//!   versus induction + Lorentz decomposition) and the Berry-connection
//!   EMF of a moving loop, computed by two independent engines.
//! - [`nernst`]: a seeded Monte Carlo over random meron/antimeron
//!   gases that reproduces the closed-form Nernst-signal formula.
//! - [`config`] / [`runner`]: the strict, line-oriented scenario
//!   config format and the artifact-writing runner behind the
//!   `berryflux` binary.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example winding_census
//! cargo run --release --example flux_quantization
//! cargo run --release --example manybody_connection
//! cargo run --release --example faraday_flux_rule
//! cargo run --release --example moving_loop_emf
//! cargo run --release --example nernst_monte_carlo
//! ```
//!
//! The same engines are reachable through the thin CLI, driven by a
//! config file:
//!
//! ```bash
//! cargo run --release -- nernst --config scenario.cfg --out results/
//! ```

pub mod config;
pub mod emf;
pub mod error;
pub mod field;
pub mod geometry;
pub mod manybody;
pub mod nernst;
pub mod runner;
pub mod topology;
pub mod units;

pub use error::{Error, Result};
pub use field::{
    berry_connection_field, chi_gradient, current_density, velocity_field, ScalarField2D,
    VectorField2D, VortexConfig, VortexCore,
};
pub use geometry::{Domain, Vec2};
pub use topology::{
    line_integral, verify_quantization, winding_integral, winding_number, PolyLoop,
    QuantizationReport,
};
pub use units::{UnitMode, UnitSystem};
