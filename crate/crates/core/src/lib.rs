//! Numerical toolkit for central derivatives of quadratic twists of modular L-functions
//! and their mixed moments.

pub mod analytic;
pub mod arith;
pub mod error;
pub mod forms;
pub mod gauss;
pub mod lfun;
pub mod moments;
pub mod oracles;

pub use error::{Error, Result};
