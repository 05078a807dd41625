//! Numerical laboratory for bilinear pseudo-differential operators.
//!
//! The crate is generic over the scalar type ([`Real`], implemented for `f32`
//! and `f64`); the aliases below fix `f64`, which every experiment uses.

pub mod bilinop;
pub mod error;
pub mod fieldgrid;
pub mod fit;
pub mod lattice;
pub mod lpcalc;
pub mod scalar;
pub mod symbol;
pub mod trilinear;
pub mod weights;

pub use error::{LabError, Result};
pub use scalar::Real;

pub type Seq = lattice::SeqFunction<f64>;
pub type Weight = weights::WeightSpec<f64>;
pub type Seq32 = lattice::SeqFunction<f32>;
pub type Weight32 = weights::WeightSpec<f32>;
pub type Field = fieldgrid::GridFunction<f64>;
pub type Symbol = symbol::SymbolSpec<f64>;
pub type Field32 = fieldgrid::GridFunction<f32>;
