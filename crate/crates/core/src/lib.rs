//! Explicit exponential Runge–Kutta methods for stiff linear problems
//! `u′ + Au = Bu`, with the matrix-function kernel they rest on, a checker for
//! the stiff order conditions, numerical probes of the smoothing and
//! relative-boundedness hypotheses, and a convergence-study harness.

pub mod cli;
pub mod discretize;
pub mod error;
pub mod exprk;
pub mod harness;
pub mod matkernel;
pub mod orderchk;
pub mod probes;

pub use error::{Error, Result};
