//! Numerical kernels for Weyl asymptotics of boundary-degenerate metrics.
//!
//! The model metric is `dx^2 + x^{-beta(y)} h0` on a collar `(0, b) x M`.
//! Modules cover the one-dimensional radial operators, their spectral zeta
//! function, separated counting over flat tori, direct finite-element
//! counting in two dimensions, closed-form asymptotic right-hand sides and
//! the boundary-distance constant.

pub mod asymptotics;
pub mod cone;
pub mod constants;
pub mod direct2d;
pub mod error;
pub mod geodesic;
pub mod quadrature;
pub mod radial1d;
pub mod slicing;
pub mod zeta;

pub use error::{Result, WeylError};
