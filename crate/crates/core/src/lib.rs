//! Numerical toolkit for resonances of the perturbed one-dimensional Stark operator
//! `H = −d²/dx² + x + V`, with `V` real and supported on `[0, γ]`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod error;

pub use error::{Result, StarkError};
pub mod potential;
pub mod quadrature;
pub mod green;
pub mod jost;
pub mod fredholm;
pub mod parallel;
pub mod scattering;
pub mod resonance;
pub mod fit;
pub mod asymptotics;
pub mod cli;
