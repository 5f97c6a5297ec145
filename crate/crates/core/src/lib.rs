//! Numerical tools for multiplicative functions: prime tables, summatory
//! functions, Dirichlet series with error bounds, mean-value diagnostics and
//! an explicit construction of a function with a large summatory function.

pub mod dirichlet;
pub mod error;
pub mod extremal;
pub mod halasz;
pub mod multfun;
pub mod primes;
pub mod sum;

pub use error::{LabError, Result};
pub use multfun::MultiplicativeFunction;
