//! Cyclic Jacobi eigensolver for small symmetric matrices.

use nalgebra::{SMatrix, SVector};

/// Eigen-decomposition `M = V diag(values) Vᵀ` with eigenvalues sorted in
/// descending order and eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<const N: usize> {
    pub values: SVector<f64, N>,
    pub vectors: SMatrix<f64, N, N>,
}

const MAX_SWEEPS: usize = 100;
const RELATIVE_OFF_DIAGONAL_TOL: f64 = 1e-13;

fn off_diagonal_norm<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Decomposes a symmetric matrix. Only the symmetric part of `m` is used.
///
/// Sweeps over all (p, q) pairs in row order until the off-diagonal Frobenius
/// norm falls below `1e-13 · ‖M‖_F`.
pub fn symmetric_eigen<const N: usize>(m: &SMatrix<f64, N, N>) -> SymmetricEigen<N> {
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = SMatrix::<f64, N, N>::identity();
    let scale = a.norm();
    let tol = RELATIVE_OFF_DIAGONAL_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // Smaller root of t² + 2θt − 1 = 0 keeps the rotation angle ≤ π/4.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..N {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let mut values = SVector::<f64, N>::zeros();
    let mut vectors = SMatrix::<f64, N, N>::zeros();
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[(src, src)];
        vectors.set_column(dst, &v.column(src));
    }
    SymmetricEigen { values, vectors }
}

impl<const N: usize> SymmetricEigen<N> {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SMatrix<f64, N, N> {
        let mut scaled = self.vectors;
        for j in 0..N {
            let fj = f(self.values[j]);
            for i in 0..N {
                scaled[(i, j)] *= fj;
            }
        }
        let out = scaled * self.vectors.transpose();
        (out + out.transpose()) * 0.5
    }

    pub fn min_value(&self) -> f64 {
        self.values[N - 1]
    }
}
