//! Quaternion algebra in scalar-first `(w, x, y, z)` order, rotation matrices
//! and the two rotation distances used by the losses.

use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::eigen::SymmetricEigen4;
use crate::error::{Error, Result};

/// Tolerance on `| ‖q‖ - 1 |` after normalization.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Inputs further than this from unit norm are rejected by
/// [`UnitQuaternion::try_new`].
pub const INPUT_UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_squared(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// `Ω_L(self)`: the matrix with `self ⊙ q = Ω_L(self) q`.
    #[rustfmt::skip]
    pub fn omega_left(self) -> Matrix4<f64> {
        let Quaternion { w: a, x: b, y: c, z: d } = self;
        Matrix4::new(
            a, -b, -c, -d,
            b,  a, -d,  c,
            c,  d,  a, -b,
            d, -c,  b,  a,
        )
    }

    /// `Ω_R(self)`: the matrix with `q ⊙ self = Ω_R(self) q`.
    #[rustfmt::skip]
    pub fn omega_right(self) -> Matrix4<f64> {
        let Quaternion { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z,
            x,  w,  z, -y,
            y, -z,  w,  x,
            z,  y, -x,  w,
        )
    }

    /// Flips the sign so that the first component with magnitude above
    /// `1e-12` is positive.
    pub fn canonical_sign(self) -> Self {
        match self.to_array().iter().find(|c| c.abs() > 1e-12) {
            Some(c) if *c < 0.0 => -self,
            _ => self,
        }
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    /// Hamilton product `self ⊙ rhs`.
    fn mul(self, rhs: Quaternion) -> Quaternion {
        let (a, b, c, d) = (self.w, self.x, self.y, self.z);
        let (w, x, y, z) = (rhs.w, rhs.x, rhs.y, rhs.z);
        let out = Quaternion::new(
            a * w - b * x - c * y - d * z,
            b * w + a * x - d * y + c * z,
            c * w + d * x + a * y - b * z,
            d * w - c * x + b * y + a * z,
        );
        debug_assert!({
            let l = self.omega_left() * rhs.to_vector();
            let r = rhs.omega_right() * self.to_vector();
            let scale = 1.0 + self.norm() * rhs.norm();
            (l - out.to_vector()).amax() <= 1e-12 * scale && (r - out.to_vector()).amax() <= 1e-12 * scale
        });
        out
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// A quaternion on `S³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; 4]")]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::IDENTITY);

    /// Normalizes `q`; fails on a zero or non-finite quaternion.
    pub fn new_normalize(q: Quaternion) -> Result<Self> {
        let n = q.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize quaternion {:?}",
                q.to_array()
            )));
        }
        Ok(Self(Quaternion::new(q.w / n, q.x / n, q.y / n, q.z / n)))
    }

    /// Accepts `q` only if it is unit within [`INPUT_UNIT_TOLERANCE`]; the
    /// stored value is renormalized.
    pub fn try_new(q: Quaternion) -> Result<Self> {
        if (q.norm() - 1.0).abs() > INPUT_UNIT_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "quaternion {:?} is not unit (norm {})",
                q.to_array(),
                q.norm()
            )));
        }
        Self::new_normalize(q)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Result<Self> {
        Self::new_normalize(Quaternion::from_vector(v))
    }

    pub(crate) fn new_unchecked(q: Quaternion) -> Self {
        Self(q)
    }

    pub fn quaternion(self) -> Quaternion {
        self.0
    }

    pub fn to_vector(self) -> Vector4<f64> {
        self.0.to_vector()
    }

    pub fn to_array(self) -> [f64; 4] {
        self.0.to_array()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.0.dot(other.0)
    }

    pub fn canonical_sign(self) -> Self {
        Self(self.0.canonical_sign())
    }

    pub fn inverse(self) -> Self {
        Self(self.0.conj())
    }

    /// `R(q)`, the rotation matrix of this quaternion.
    #[rustfmt::skip]
    pub fn to_rotation_matrix(self) -> Matrix3<f64> {
        let Quaternion { w, x, y, z } = self.0;
        Matrix3::new(
            1.0 - 2.0 * y * y - 2.0 * z * z, -2.0 * w * z + 2.0 * x * y,       2.0 * w * y + 2.0 * x * z,
            2.0 * w * z + 2.0 * x * y,       1.0 - 2.0 * x * x - 2.0 * z * z, -2.0 * w * x + 2.0 * y * z,
            -2.0 * w * y + 2.0 * x * z,      2.0 * w * x + 2.0 * y * z,       1.0 - 2.0 * x * x - 2.0 * y * y,
        )
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    fn mul(self, rhs: UnitQuaternion) -> UnitQuaternion {
        let q = self.0 * rhs.0;
        let n = q.norm();
        UnitQuaternion(Quaternion::new(q.w / n, q.x / n, q.y / n, q.z / n))
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;

    fn neg(self) -> UnitQuaternion {
        UnitQuaternion(-self.0)
    }
}

impl From<UnitQuaternion> for [f64; 4] {
    fn from(q: UnitQuaternion) -> Self {
        q.to_array()
    }
}

impl<'de> Deserialize<'de> for UnitQuaternion {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [w, x, y, z] = <[f64; 4]>::deserialize(deserializer)?;
        UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z)).map_err(serde::de::Error::custom)
    }
}

/// Geodesic distance `2 arccos |qᵀq'|` in radians, in `[0, π]`.
pub fn dist_geodesic(q: UnitQuaternion, q2: UnitQuaternion) -> f64 {
    2.0 * q.dot(q2).abs().min(1.0).acos()
}

/// Frobenius distance `‖R(q) - R(q')‖_F`, evaluated through the identity
/// `d_F² = 8 (1 - (qᵀq')²)`.
pub fn dist_frobenius(q: UnitQuaternion, q2: UnitQuaternion) -> f64 {
    dist_frobenius_squared(q, q2).sqrt()
}

pub fn dist_frobenius_squared(q: UnitQuaternion, q2: UnitQuaternion) -> f64 {
    let d = q.dot(q2);
    (8.0 * (1.0 - d * d)).max(0.0)
}

/// Result of [`average_quaternion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuaternionAverage {
    pub mean: UnitQuaternion,
    /// The top eigenvalue of the scatter matrix is (numerically) repeated, so
    /// the mean is not unique.
    pub degenerate: bool,
}

/// Mean rotation under the Frobenius distance: the minimizer of
/// `Σ d_F(qᵢ, q)²`, which is the top eigenvector of `Σ qᵢqᵢᵀ`.
///
/// This is one Fréchet mean among several; the geodesic-distance mean differs
/// for widely spread samples.
pub fn average_quaternion(samples: &[UnitQuaternion]) -> Result<QuaternionAverage> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("average_quaternion needs at least one sample"));
    }
    let scatter = samples.iter().fold(Matrix4::zeros(), |acc, q| {
        let v = q.to_vector();
        acc + v * v.transpose()
    });
    let eig = SymmetricEigen4::new(&scatter);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| eig.values[j].total_cmp(&eig.values[i]));
    let top = eig.values[order[0]];
    let second = eig.values[order[1]];
    let degenerate = top - second <= 1e-9 * top.abs().max(1.0);
    let v = eig.vectors.column(order[0]).into_owned();
    Ok(QuaternionAverage {
        mean: UnitQuaternion::from_vector(&v)?.canonical_sign(),
        degenerate,
    })
}
