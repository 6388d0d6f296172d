//! Bingham distribution parameters on `S³`: the 10-D `triu` encoding,
//! sort-and-shift canonicalization, mode, unnormalized density and second
//! moments.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::eigen::SymmetricEigen4;
use crate::error::{Error, Result};
use crate::normconst::NormConstResult;
use crate::quat::{Quaternion, UnitQuaternion};

/// Maximum `|A - Aᵀ|` entry accepted as symmetric, relative to `max(1, |A|)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Relative gap under which the two leading eigenvalues count as equal.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;

/// Row-major positions of θ₁…θ₁₀ in the upper triangle.
const TRIU_INDEX: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// The 10 free entries of a symmetric 4×4 matrix, upper triangle row by row.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThetaVec(pub [f64; 10]);

impl ThetaVec {
    pub fn zeros() -> Self {
        Self([0.0; 10])
    }

    /// `triu(θ)`.
    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut a = Matrix4::zeros();
        for (k, &(i, j)) in TRIU_INDEX.iter().enumerate() {
            a[(i, j)] = self.0[k];
            a[(j, i)] = self.0[k];
        }
        a
    }

    /// Reads the upper triangle of `a`.
    pub fn from_matrix(a: &Matrix4<f64>) -> Self {
        let mut theta = [0.0; 10];
        for (k, &(i, j)) in TRIU_INDEX.iter().enumerate() {
            theta[k] = a[(i, j)];
        }
        Self(theta)
    }

    /// Pulls a gradient with respect to a symmetric `A` back through `triu`:
    /// diagonal entries are copied, off-diagonal entries doubled.
    pub fn pullback(grad_a: &Matrix4<f64>) -> Self {
        let mut theta = [0.0; 10];
        for (k, &(i, j)) in TRIU_INDEX.iter().enumerate() {
            theta[k] = if i == j {
                grad_a[(i, i)]
            } else {
                grad_a[(i, j)] + grad_a[(j, i)]
            };
        }
        Self(theta)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.map(|t| t * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|t| t.is_finite())
    }
}

/// Eigenvectors and eigenvalues in canonical form: eigenvalues sorted
/// descending and shifted so the largest is exactly zero, columns of `vectors`
/// permuted to match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedEigen {
    pub vectors: Matrix4<f64>,
    pub values: Vector4<f64>,
    /// The largest raw eigenvalue, subtracted from every eigenvalue.
    pub shift: f64,
}

/// Eigendecomposes a symmetric `a` and puts it into canonical form.
///
/// Ties in the descending sort keep the solver's column order, and each
/// eigenvector's sign is fixed so its first nonzero component is positive.
pub fn sort_and_shift(a: &Matrix4<f64>) -> Result<ShiftedEigen> {
    let asymmetry = (a - a.transpose()).amax();
    if !asymmetry.is_finite() || asymmetry > SYMMETRY_TOLERANCE * a.amax().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen4::new(a);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| eig.values[j].total_cmp(&eig.values[i]));

    let shift = eig.values[order[0]];
    let mut vectors = Matrix4::zeros();
    let mut values = Vector4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        let col = Quaternion::from_vector(&eig.vectors.column(src).into_owned()).canonical_sign();
        vectors.set_column(dst, &col.to_vector());
        values[dst] = if dst == 0 { 0.0 } else { eig.values[src] - shift };
    }
    Ok(ShiftedEigen {
        vectors,
        values,
        shift,
    })
}

/// The mode of a Bingham distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub quaternion: UnitQuaternion,
    /// `λ₁ = λ₂` within tolerance; any unit vector in the leading eigenspace
    /// is a maximizer.
    pub degenerate: bool,
}

/// Bingham parameter `A` with its cached canonical eigendecomposition.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BinghamParam {
    a: Matrix4<f64>,
    eigen: ShiftedEigen,
}

impl BinghamParam {
    /// Symmetrizes nothing: `a` must already be symmetric within tolerance.
    pub fn from_matrix(a: Matrix4<f64>) -> Result<Self> {
        let eigen = sort_and_shift(&a)?;
        Ok(Self { a, eigen })
    }

    pub fn from_theta(theta: &ThetaVec) -> Result<Self> {
        Self::from_matrix(theta.to_matrix())
    }

    /// `D diag(λ) Dᵀ` with `D` orthogonal.
    pub fn from_eigen(vectors: &Matrix4<f64>, values: &Vector4<f64>) -> Result<Self> {
        let a = vectors * Matrix4::from_diagonal(values) * vectors.transpose();
        Self::from_matrix((a + a.transpose()) * 0.5)
    }

    /// The uniform distribution on `S³` (`A = O`).
    pub fn uniform() -> Self {
        Self::from_matrix(Matrix4::zeros()).expect("zero matrix is symmetric")
    }

    /// The matrix as given at construction.
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.a
    }

    pub fn theta(&self) -> ThetaVec {
        ThetaVec::from_matrix(&self.a)
    }

    /// `A_shifted = D diag(λ_shifted) Dᵀ`.
    pub fn shifted_matrix(&self) -> Matrix4<f64> {
        self.eigen.vectors * Matrix4::from_diagonal(&self.eigen.values) * self.eigen.vectors.transpose()
    }

    /// Shifted eigenvalues, `0 = λ₁ ≥ λ₂ ≥ λ₃ ≥ λ₄`.
    pub fn eigenvalues(&self) -> &Vector4<f64> {
        &self.eigen.values
    }

    /// Eigenvectors as columns, ordered like [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &Matrix4<f64> {
        &self.eigen.vectors
    }

    /// The largest raw eigenvalue of `A`.
    pub fn shift(&self) -> f64 {
        self.eigen.shift
    }

    pub fn mode(&self) -> Mode {
        let v = self.eigen.vectors.column(0).into_owned();
        let lambda = &self.eigen.values;
        let scale = lambda.amax().max(1.0);
        Mode {
            quaternion: UnitQuaternion::new_unchecked(Quaternion::from_vector(&v)),
            degenerate: -lambda[1] <= 1e-9_f64.max(DEGENERACY_TOLERANCE * scale),
        }
    }

    /// `qᵀ A_shifted q`, in `[λ₄, 0]`.
    pub fn log_density_unnormalized(&self, q: UnitQuaternion) -> f64 {
        let proj = self.eigen.vectors.transpose() * q.to_vector();
        proj.iter()
            .zip(self.eigen.values.iter())
            .map(|(p, l)| l * p * p)
            .sum::<f64>()
            .min(0.0)
    }

    /// `E[qqᵀ] = D diag(∂C/∂λᵢ / C) Dᵀ`, from a normalizing constant computed
    /// at this parameter's shifted eigenvalues.
    pub fn second_moments(&self, nc: &NormConstResult) -> Result<Matrix4<f64>> {
        let diag = normalized_gradient(nc)?;
        Ok(self.eigen.vectors * Matrix4::from_diagonal(&diag) * self.eigen.vectors.transpose())
    }
}

/// `∂C/∂λᵢ / C`, checked to lie in `(0, 1)`.
pub(crate) fn normalized_gradient(nc: &NormConstResult) -> Result<Vector4<f64>> {
    let diag = nc.dc / nc.c;
    for (index, &value) in diag.iter().enumerate() {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::MomentOutOfRange { index, value });
        }
    }
    Ok(diag)
}

#[derive(Serialize, Deserialize)]
struct BinghamParamJson {
    #[serde(rename = "A")]
    a: Vec<f64>,
    #[serde(default, skip_deserializing)]
    lambda: Option<[f64; 4]>,
    #[serde(rename = "D", default, skip_deserializing)]
    d: Option<Vec<f64>>,
}

fn row_major(m: &Matrix4<f64>) -> Vec<f64> {
    (0..4).flat_map(|i| (0..4).map(move |j| m[(i, j)])).collect()
}

impl Serialize for BinghamParam {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BinghamParamJson {
            a: row_major(&self.a),
            lambda: Some(self.eigen.values.into()),
            d: Some(row_major(&self.eigen.vectors)),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BinghamParam {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BinghamParamJson::deserialize(deserializer)?;
        if raw.a.len() != 16 {
            return Err(serde::de::Error::custom(format!(
                "\"A\" must hold 16 row-major entries, got {}",
                raw.a.len()
            )));
        }
        let a = Matrix4::from_row_slice(&raw.a);
        BinghamParam::from_matrix(a).map_err(serde::de::Error::custom)
    }
}
