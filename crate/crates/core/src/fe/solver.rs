//! Dense Cholesky factorization for the reduced periodic stiffness system.

use crate::error::{Error, Result};

/// Pivots below this fraction of `max |K_ii|` count as null directions.
pub const PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular factor `K = L Lᵀ`, rows stored contiguously.
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive-definite matrix given row-major. Reports
    /// the number of vanishing pivots if the matrix is only semi-definite.
    pub fn factor(n: usize, k: &[f64]) -> Result<Self> {
        assert_eq!(k.len(), n * n);
        let scale = (0..n).map(|i| k[i * n + i].abs()).fold(0.0, f64::max);
        let tol = PIVOT_TOL * scale;
        let mut l = vec![0.0; n * n];
        let mut nullity = 0;
        for i in 0..n {
            for j in 0..=i {
                let (row_i, row_j) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let s = k[i * n + j] - dot;
                if i == j {
                    if s <= tol {
                        // Leave the column zero; later rows then ignore it.
                        nullity += 1;
                        l[i * n + i] = 0.0;
                    } else {
                        l[i * n + i] = s.sqrt();
                    }
                } else {
                    let d = l[j * n + j];
                    l[i * n + j] = if d == 0.0 { 0.0 } else { s / d };
                }
            }
        }
        if nullity > 0 {
            return Err(Error::Singular { nullity });
        }
        Ok(Self { n, l })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.l[j * n + i] * b[j];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}
