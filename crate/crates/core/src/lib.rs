//! Spectral analysis of periodic lattice operators with embedded
//! defects of every dimension, `A_0 u + A_1 <u>_1 + ... + A_N <u>_{1..N}`
//! in quasimomentum space, through matrix-valued integral continued
//! fractions.
//!
//! Everything numerical is generic over the real type (`f32` or `f64`);
//! the aliases at the crate root fix it to `f64`.

pub mod cfrac;
pub mod error;
pub mod expr;
pub mod graphene;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod resolvent;
pub mod scalar;
pub mod spectrum;

#[cfg(test)]
mod test_specs;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type QuadGrid64 = quadrature::QuadGrid<f64>;
pub type KPoint64 = quadrature::KPoint<f64>;
pub type OperatorSpec64 = operator::OperatorSpec<f64>;
pub type Coefficient64 = operator::Coefficient<f64>;
pub type CFState64 = cfrac::CFState<f64>;
pub type EcdState64 = cfrac::EcdState<f64>;
pub type SpectralComponent64 = spectrum::SpectralComponent<f64>;
pub type SpectrumOptions64 = spectrum::SpectrumOptions<f64>;
pub type GridFunction64 = resolvent::GridFunction<f64>;
pub type BranchSpec64 = inverse::BranchSpec<f64>;
pub type GrapheneModel64 = graphene::GrapheneModel<f64>;
