//! Exact boundary-residue calculus for the spectral Einstein functional of a
//! Dirac operator on a four-dimensional manifold with boundary.
//!
//! The crate derives, in exact arithmetic, the pseudodifferential symbols of
//! `∇_X ∇_Y D^{-2}` and `D^{-2}` near a boundary point of a collar metric,
//! runs the five boundary-case trace integrals of the noncommutative residue
//! (Cauchy plus-projection, contour residues at `ξ_n = i`, unit-sphere
//! moments, Clifford traces), and compares the resulting coefficients against
//! published reference values. Every exact result can be re-derived by an
//! independent floating-point oracle (explicit gamma matrices plus contour
//! and sphere quadrature); disagreements between the derivation and the
//! published values are reported, never assumed away.
//!
//! Layering, bottom up:
//!
//! * [`scalar`] — arbitrary-precision Gaussian rationals and sparse
//!   multivariate polynomials over a closed set of formal generators
//!   (`π`, `h'(0)`, vector-field components, ...). The coefficient ring of
//!   everything else.
//! * [`clifford`] — the Clifford algebra of an orthonormal frame with the
//!   spinor-representation trace.
//! * [`symbol`] — graded rational symbols in `(ξ', ξ_n)` with first-order
//!   normal jets, the composition formula and leading-order inversion.
//! * [`boundary`] — partial fractions at `ξ_n = ±i`, the plus-projection,
//!   `Γ⁺` contour integrals and exact sphere moments.
//! * [`pipeline`] — collar-metric jets, the symbol constructors, the five
//!   boundary cases and the assembled theorem report.
//! * [`oracle`] — the independent numeric recomputation.
//! * [`report`] — text / JSON / LaTeX emission for the CLI.

pub mod boundary;
pub mod clifford;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod symbol;

use thiserror::Error;

/// Errors shared across the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("clifford elements live in different ambient dimensions ({left} vs {right})")]
    DimensionMismatch { left: u8, right: u8 },

    #[error("no numeric value assigned to generator {0}")]
    MissingAssignment(String),

    #[error("normal jet exhausted: {0}")]
    JetExhausted(String),

    #[error("composition cutoff {cutoff} needs jets beyond first order (term of order {order})")]
    CutoffTooDeep { cutoff: i32, order: i32 },

    #[error("leading symbol is not invertible: {0}")]
    NotInvertible(String),

    #[error("integrand does not decay: numerator degree {degree} vs pole order {poles}")]
    NonDecaying { degree: usize, poles: usize },

    #[error("sphere moments need an ambient dimension >= 2, got {0}")]
    BadDimension(usize),

    #[error("contour quadrature failed to converge (estimate {estimate:e})")]
    QuadratureDivergence { estimate: f64 },

    #[error("boundary case id must lie in 1..=5, got {0}")]
    CaseOutOfRange(u8),

    #[error("parse error at byte {at}: {message}")]
    Parse { at: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
