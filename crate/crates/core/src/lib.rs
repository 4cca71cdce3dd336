//! Numerical laboratory for the Novikov-Veselov (NV) equation at fixed energy `E`.
//!
//! The crate is organised bottom-up:
//!
//! * [`symbol`]: the linear symbol, the phase, the nonlocal multiplier and the resonance function.
//! * [`stationary`]: the six critical points of the reduced phase and their geometry.
//! * [`oscillatory`]: the dispersive integrals and decay fits.
//! * [`solutions`]: closed-form rational solutions and Gould-Hopper polynomials.
//! * [`solver`]: pseudospectral time stepping of the full equation.
//! * [`io`] and [`cli`]: file formats, manifests and the command-line front end.

// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fit;
pub mod io;
pub mod oscillatory;
pub mod quad;
pub mod solutions;
pub mod solver;
pub mod spectral;
pub mod stationary;
pub mod symbol;

pub use error::{NvError, Result};
pub use num_complex::Complex64;

/// A point of the complex plane, used for frequencies, parameters and positions alike.
pub type ComplexPoint = Complex64;

/// Returns `true` when both components are finite.
pub fn is_finite_point(z: ComplexPoint) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
