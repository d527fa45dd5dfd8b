//! Likelihood-ratio test of sphericity for two-step monotone incomplete
//! multivariate normal data: the null distribution of the statistic, its
//! Edgeworth expansion, error bounds for that expansion, and Monte Carlo
//! tools for checking all of it.

pub mod bounds;
pub mod classical;
pub mod cumulants;
pub mod edgeworth;
pub mod error;
pub mod mc;
pub mod model;
pub mod quadrature;
pub mod specfun;
pub mod tables;

pub use error::{Error, Result};
pub use model::MonotoneDesign;
