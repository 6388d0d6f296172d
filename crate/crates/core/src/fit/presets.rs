//! Reference parameters for the distribution-recovery experiments.

use nalgebra::Vector4;

use crate::bingham::{BinghamParam, ThetaVec};
use crate::error::Result;

/// Upper triangle of the initial parameter `A_init`.
pub const THETA_INIT: ThetaVec = ThetaVec([95.69, 13.72, 28.38, 60.61, 94.42, 85.27, 0.23, 52.12, 55.20, 48.54]);

/// Upper triangle of the axis-symmetric ground truth `A_true`, whose shifted
/// spectrum is about `(0, -0.17, -467.07, -926.44)`.
pub const THETA_TRUE: ThetaVec = ThetaVec([
    -116.55, 40.70, 119.55, 225.97, -147.05, 145.26, -280.25, -386.19, 52.06, -743.89,
]);

/// Shifted spectrum of the unimodal ground truth.
pub const UNIMODAL_SPECTRUM: [f64; 4] = [0.0, -1209.9, -2217.9, -2342.4];

pub fn initial() -> BinghamParam {
    BinghamParam::from_theta(&THETA_INIT).expect("symmetric by construction")
}

pub fn axis_symmetric_truth() -> BinghamParam {
    BinghamParam::from_theta(&THETA_TRUE).expect("symmetric by construction")
}

/// [`UNIMODAL_SPECTRUM`] on the eigenvectors of [`axis_symmetric_truth`].
pub fn unimodal_truth() -> Result<BinghamParam> {
    let truth = axis_symmetric_truth();
    BinghamParam::from_eigen(truth.eigenvectors(), &Vector4::from(UNIMODAL_SPECTRUM))
}
