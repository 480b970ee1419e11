//! Dense state-vector simulation of a spin-½ particle measured by quantum
//! apparatus registers, contrasting projective collapse with purely unitary
//! measurement.
//!
//! The numeric core is generic over the real scalar ([`Real`]: `f32` or
//! `f64`); the `*64` / `*32` aliases below name the common instantiations.

pub mod apparatus;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod schemes;
pub mod spin;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type State64 = linalg::StateVector<f64>;
pub type State32 = linalg::StateVector<f32>;
pub type Operator64 = linalg::Operator<f64>;
pub type Operator32 = linalg::Operator<f32>;
pub type Observable64 = linalg::Observable<f64>;
pub type Observable32 = linalg::Observable<f32>;
pub type Density64 = linalg::DensityMatrix<f64>;
pub type Density32 = linalg::DensityMatrix<f32>;
pub type Axis64 = spin::Axis<f64>;
pub type Bloch64 = spin::BlochVector<f64>;
pub type Script64 = experiments::ExperimentScript<f64>;
pub type Scheme64 = schemes::SchemeKind<f64>;
