//! Numerical toolkit for the degenerate wave equation
//! `w_tt - (x^a w_x)_x = p(t) mu(x) w` on (0,1) with Neumann conditions.
//!
//! The crate computes the Bessel-type eigensystem of the spatial operator,
//! simulates the bilinear-controlled dynamics in modal coordinates, and
//! synthesizes controls near the ground state by solving the associated
//! trigonometric moment problem across the three time regimes around the
//! controllability threshold `T0 = 4/(2 - alpha)`.

pub mod acceptance;
pub mod diagnostics;
pub mod error;
pub mod innerprod;
pub mod moment;
pub mod oscint;
pub mod simulate;
pub mod special;
pub mod spectrum;

mod dd;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
