//! Bingham distribution on the unit-quaternion sphere `S³`.
//!
//! - [`quat`]: quaternion algebra, rotation matrices, distances, averaging
//! - [`bingham`]: parameters, canonical form, mode, density, moments
//! - [`normconst`]: normalizing constant and derivatives without lookup tables
//! - [`loss`]: Bingham negative log-likelihood and QCQP losses with gradients
//! - [`sampler`]: rejection sampler with an angular central Gaussian envelope
//! - [`fit`]: gradient-descent fitting, KL divergence, ablation sweeps
//! - [`cli`]: the `bingham` command-line tool

pub mod bingham;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod loss;
pub mod normconst;
pub mod quat;
pub mod sampler;

pub use bingham::{BinghamParam, ThetaVec};
pub use error::{Error, Result};
pub use normconst::{Integrator, IntegratorConfig, NormConstResult};
pub use quat::{Quaternion, UnitQuaternion};
