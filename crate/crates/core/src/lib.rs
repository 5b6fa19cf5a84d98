pub mod catalog;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod parallel;
pub mod quadrature;
pub mod quantum;
pub mod stackel;
pub mod tridiag;

pub use error::{Error, Result};
