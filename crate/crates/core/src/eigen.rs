//! Cyclic Jacobi eigensolver for symmetric 4x4 matrices.

use nalgebra::{Matrix4, Vector4};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `a = vectors * diag(values) * vectors^T`.
///
/// Eigenpairs come back in the order the rotations leave them; callers sort.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricEigen4 {
    pub values: Vector4<f64>,
    pub vectors: Matrix4<f64>,
}

impl SymmetricEigen4 {
    /// Only the upper triangle of `a` is read.
    pub fn new(a: &Matrix4<f64>) -> Self {
        let mut m = *a;
        for i in 0..4 {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        let mut v = Matrix4::<f64>::identity();

        let scale = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if scale == 0.0 {
            return Self {
                values: Vector4::zeros(),
                vectors: v,
            };
        }

        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..4)
                .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)] * m[(i, j)])
                .sum();
            if off.sqrt() <= f64::EPSILON * 1e-3 * scale {
                break;
            }
            for p in 0..3 {
                for q in p + 1..4 {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }

        Self {
            values: Vector4::new(m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(3, 3)]),
            vectors: v,
        }
    }
}

// One Jacobi rotation annihilating m[(p, q)] (Rutishauser's formulation).
fn rotate(m: &mut Matrix4<f64>, v: &mut Matrix4<f64>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..4 {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..4 {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;

    for k in 0..4 {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
