//! Sharpness constructions, the random-sign lower bound, dyadic symbol
//! decompositions and the acceptance suite.
//!
//! All experiments run in one dimension.

pub mod acceptance;
pub mod error;
pub mod ghs;
pub mod profiles;
pub mod random_sign;
pub mod range;
pub mod report;
pub mod smoothness;

pub use error::{ExpError, Result};
pub use report::{Expectation, GrowthReport, Outcome};
