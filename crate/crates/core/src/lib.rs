//! Constructive machinery for interpolating sequences in weighted Bergman and
//! Hardy spaces of the unit ball of C^n.

pub mod error;
pub mod geometry;
pub mod poly;
pub mod quadrature;
pub mod sampling;
pub mod sequence;
pub mod function;
pub mod kernels;
pub mod gleason;
pub mod interpolation;
pub mod amar;
pub mod carleson;
pub mod smooth;

pub use error::{Error, Result};
pub use geometry::{BallPoint, C64};
