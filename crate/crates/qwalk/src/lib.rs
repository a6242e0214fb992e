//! Discrete-time quantum walks on a circle, driven by a two-component coin
//! whose angles fluctuate randomly in time.
//!
//! The crate simulates the walk at three levels:
//!
//! * wavefunction dynamics for a single realization of the random angles
//!   ([`walk`]),
//! * density-operator dynamics, in physical space and mode-by-mode in
//!   Fourier space ([`density`]),
//! * the exactly averaged dynamics over the angle distribution, where each
//!   Fourier pair `(K, p)` evolves under a closed-form 4×4 map ([`noise`]).
//!
//! On top of the engines sit decoherence diagnostics ([`observables`]),
//! closed-form diffusion coefficients and eigenvalue asymptotics
//! ([`asymptotics`]), the continuous-limit generator ([`continuum`]), and
//! the discrete gauge machinery of the extended four-angle coin ([`gauge`]).
//!
//! Two noise cases are supported throughout: `Electric` draws the phase
//! angle ξ uniformly around π/2 at fixed θ=π/4, `Gravitational` draws the
//! mixing angle θ uniformly around π/4 at fixed ξ=π/2. Noise amplitude is
//! the interval width σ.

pub mod asymptotics;
pub mod continuum;
pub mod density;
pub mod gauge;
pub mod grid;
pub mod linalg;
pub mod noise;
pub mod observables;
pub mod quadrature;
pub mod walk;

pub use num_complex::Complex64;

pub use crate::linalg::C64;

/// Crate version, for embedding in exported result metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors shared across the crate.
///
/// `InvalidConfig` covers contract violations a caller can fix (bad σ,
/// mismatched grids, wrong basis tag). `SingularParameter` marks points
/// where a closed form genuinely diverges or loses meaning; the value is
/// reported, never silently clamped. `NumericalValidity` flags results
/// outside numerical tolerances (for example a reduced density operator
/// with a significantly negative eigenvalue). `DegenerateEigenpair` is
/// raised when eigenpair continuation cannot decide between two candidates.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("singular parameter: {0}")]
    SingularParameter(String),
    #[error("numerical validity: {0}")]
    NumericalValidity(String),
    #[error("degenerate leading eigenpair: candidates λ={lambda_a} and λ={lambda_b}")]
    DegenerateEigenpair {
        lambda_a: Complex64,
        lambda_b: Complex64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
