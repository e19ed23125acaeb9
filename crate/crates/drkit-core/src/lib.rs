//! Numerical kernels for harmonic analysis on Damek-Ricci spaces over
//! H-type groups: exact group operations, radial heat kernels, first-order
//! Riesz-transform kernels, Gelfand (spherical-type) transforms on the
//! nilpotent part, and the operator-valued multiplier symbols that control
//! the singular part of the Riesz kernels.
//!
//! The crate is organized bottom-up:
//!
//! * [`jet`] — truncated Taylor series (jets) used for exact repeated
//!   differentiation of radial profiles;
//! * [`quad`] — adaptive Gauss-Kronrod quadrature, Gauss-Legendre and
//!   Gauss-Laguerre rules, and endpoint/half-line substitutions;
//! * [`specfun`] — gamma, log-gamma, Laguerre polynomials, modified Bessel
//!   K, and stable sinh-family helpers;
//! * [`htype`] — H-type Lie algebra data (bracket tensors, J-maps) and the
//!   nilpotent group N;
//! * [`space`] — the solvable extension S = N x A: group law, modular
//!   function, distance, invariant vector fields, Haar-measure quadrature
//!   and weighted radial-integral densities;
//! * [`heat`] — the radial heat kernel via descent recursions from the real
//!   line, plus mass, weighted L1 norms, envelopes, and heat-equation
//!   residuals;
//! * [`riesz`] — the radial profile of the kernel of the inverse square
//!   root of the Laplacian, exact first-order Riesz kernels, and their
//!   non-integrable main terms;
//! * [`gelfand`] — the Gelfand transform on N for radial-in-x profiles, the
//!   Plancherel identity, and the spectral functions Xi_s;
//! * [`symbols`] — discretized operator-valued multiplier symbols on a
//!   logarithmic grid, weighted operator norms, randomized-sum bound
//!   estimates and dyadic partition tools.

pub mod gelfand;
pub mod heat;
pub mod htype;
pub mod jet;
pub mod quad;
pub mod riesz;
pub mod space;
pub mod specfun;
pub mod symbols;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum DrError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature non-convergence: best estimate {estimate:e}, error bound {error_bound:e}")]
    QuadratureNonConvergence { estimate: f64, error_bound: f64 },
    /// Vector/tensor dimensions do not match.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    /// Structurally invalid input (bad tensor, bad config, ...).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// An iterative scheme did not converge.
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, DrError>;
