//! Fourth-order elasticity tensors and their 6×6 matrix forms.
//!
//! Mandel slot order is (11, 22, 33, 23, 13, 12), 0-based internally as
//! `(0,0) (1,1) (2,2) (1,2) (0,2) (0,1)`. Shear slots carry a √2 weight in
//! Mandel vectors, so the Mandel matrix holds `√2·C` in the mixed blocks and
//! `2·C` in the shear–shear block. The Voigt matrix keeps raw components and
//! exists mainly to demonstrate why it cannot be used with a PSD projection.

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::{Mat3, Mat6, Vec3};
use nalgebra::Vector6;
use std::f64::consts::SQRT_2;
use std::ops::{Add, Index, Mul, Sub};

/// Index pair for each Mandel/Voigt slot.
pub const MANDEL_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

const MANDEL_WEIGHTS: [f64; 6] = [1.0, 1.0, 1.0, SQRT_2, SQRT_2, SQRT_2];

/// `w_a w_b`, with the shear-shear product held at exactly 2.
#[inline]
fn weight_product(a: usize, b: usize) -> f64 {
    match (a >= 3, b >= 3) {
        (false, false) => 1.0,
        (true, true) => 2.0,
        _ => SQRT_2,
    }
}

/// Tolerance on `‖RᵀR − I‖` and `|det R − 1|` for accepting a rotation.
pub const ROTATION_TOL: f64 = 1e-10;
/// Tolerance on asymmetry of 6×6 matrices (scaled by `max(1, max|m|)`).
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance on `| |d| − 1 |` for direction vectors.
pub const UNIT_TOL: f64 = 1e-10;

/// Raw 3×3×3×3 component array, `raw[i][j][k][l]`.
pub type Raw4 = [[[[f64; 3]; 3]; 3]; 3];

#[inline]
fn flat(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

/// Slot of the symmetric index pair `(i, j)`.
#[inline]
pub fn mandel_slot(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => unreachable!("index out of range"),
    }
}

/// Stiffness tensor with minor and major symmetries.
///
/// The components are only reachable through constructors that enforce both
/// symmetries exactly (bitwise equal partners), so 21 numbers fully determine
/// a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticTensor4 {
    c: [f64; 81],
}

impl ElasticTensor4 {
    pub fn zero() -> Self {
        Self { c: [0.0; 81] }
    }

    /// `C_ijkl = λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut c = [0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        c[flat(i, j, k, l)] = lambda * d(i, j) * d(k, l)
                            + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        Self { c }
    }

    /// Orthogonal projection of `raw` onto the symmetric subspace: each
    /// component becomes the mean over its orbit under `ij↔ji`, `kl↔lk`,
    /// `ij↔kl`.
    pub fn symmetrize(raw: &Raw4) -> Result<Self> {
        if raw
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite("fourth-order tensor"));
        }
        let mut c = [0.0; 81];
        for a in 0..6 {
            for b in a..6 {
                let (i, j) = MANDEL_PAIRS[a];
                let (k, l) = MANDEL_PAIRS[b];
                let orbit = [
                    (i, j, k, l),
                    (j, i, k, l),
                    (i, j, l, k),
                    (j, i, l, k),
                    (k, l, i, j),
                    (l, k, i, j),
                    (k, l, j, i),
                    (l, k, j, i),
                ];
                let v = orbit.map(|(p, q, r, s)| raw[p][q][r][s]);
                // Pairwise so an already-symmetric orbit is reproduced exactly.
                let mean =
                    (((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]))) / 8.0;
                for &(p, q, r, s) in &orbit {
                    c[flat(p, q, r, s)] = mean;
                }
            }
        }
        Ok(Self { c })
    }

    /// Builds a tensor from its 21 independent components indexed by Mandel
    /// slot pairs `(a, b)` with `a ≤ b` (plain tensor components, no weights).
    fn from_slot_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        let mut c = [0.0; 81];
        for a in 0..6 {
            for b in a..6 {
                let v = f(a, b);
                let (i, j) = MANDEL_PAIRS[a];
                let (k, l) = MANDEL_PAIRS[b];
                for &(p, q, r, s) in &[
                    (i, j, k, l),
                    (j, i, k, l),
                    (i, j, l, k),
                    (j, i, l, k),
                    (k, l, i, j),
                    (l, k, i, j),
                    (k, l, j, i),
                    (l, k, j, i),
                ] {
                    c[flat(p, q, r, s)] = v;
                }
            }
        }
        Self { c }
    }

    pub fn to_raw(&self) -> Raw4 {
        let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        raw[i][j][k][l] = self.c[flat(i, j, k, l)];
                    }
                }
            }
        }
        raw
    }

    /// Frobenius norm over all 81 components.
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_mandel(&self) -> MandelMatrix {
        MandelMatrix(Mat6::from_fn(|a, b| {
            let (i, j) = MANDEL_PAIRS[a];
            let (k, l) = MANDEL_PAIRS[b];
            weight_product(a, b) * self.c[flat(i, j, k, l)]
        }))
    }

    pub fn to_voigt(&self) -> VoigtMatrix {
        VoigtMatrix(Mat6::from_fn(|a, b| {
            let (i, j) = MANDEL_PAIRS[a];
            let (k, l) = MANDEL_PAIRS[b];
            self.c[flat(i, j, k, l)]
        }))
    }

    /// `Ĉ_ijkl = R_ia R_jb R_kc R_ld C_abcd`.
    pub fn rotate(&self, r: &Mat3) -> Result<Self> {
        check_rotation(r)?;
        Ok(self.rotate_unchecked(r))
    }

    pub(crate) fn rotate_unchecked(&self, r: &Mat3) -> Self {
        // One index at a time: four passes of 81·3 products instead of 81·81.
        let mut cur = self.c;
        for slot in 0..4 {
            let mut next = [0.0; 81];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            let idx = [i, j, k, l];
                            let mut s = 0.0;
                            for m in 0..3 {
                                let mut src = idx;
                                src[slot] = m;
                                s += r[(idx[slot], m)] * cur[flat(src[0], src[1], src[2], src[3])];
                            }
                            next[flat(i, j, k, l)] = s;
                        }
                    }
                }
            }
            cur = next;
        }
        // Restore bitwise symmetry lost to rounding.
        Self::from_slot_fn(|a, b| {
            let (i, j) = MANDEL_PAIRS[a];
            let (k, l) = MANDEL_PAIRS[b];
            [
                (i, j, k, l),
                (j, i, k, l),
                (i, j, l, k),
                (j, i, l, k),
                (k, l, i, j),
                (l, k, i, j),
                (k, l, j, i),
                (l, k, j, i),
            ]
            .iter()
            .map(|&(p, q, r, s)| cur[flat(p, q, r, s)])
            .sum::<f64>()
                / 8.0
        })
    }

    /// Directional modulus `C_ijkl d_i d_j d_k d_l` for a unit direction.
    pub fn directional_modulus(&self, d: &Vec3) -> Result<f64> {
        let n = d.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(self.directional_modulus_unchecked(d))
    }

    pub(crate) fn directional_modulus_unchecked(&self, d: &Vec3) -> f64 {
        // Contract through the Mandel vector of d⊗d.
        let dd = strain_to_mandel(&(d * d.transpose()));
        let m = self.to_mandel().0;
        dd.dot(&(m * dd))
    }

    /// Strain energy density `½ ε_ij C_ijkl ε_kl`.
    pub fn strain_energy(&self, eps: &Mat3) -> Result<f64> {
        let asym = (eps - eps.transpose()).amax();
        if asym > SYMMETRY_TOL * eps.amax().max(1.0) {
            return Err(Error::Asymmetric { asymmetry: asym });
        }
        let mut psi = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        psi += eps[(i, j)] * self.c[flat(i, j, k, l)] * eps[(k, l)];
                    }
                }
            }
        }
        Ok(0.5 * psi)
    }

    /// `C : ε` as a symmetric stress tensor.
    pub fn contract(&self, eps: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    s += self.c[flat(i, j, k, l)] * eps[(k, l)];
                }
            }
            s
        })
    }

    pub fn kelvin_spectrum(&self) -> KelvinSpectrum {
        let eig = symmetric_eigen(&self.to_mandel().0);
        let mut eigenvalues = [0.0; 6];
        let mut eigentensors = [Mat3::zeros(); 6];
        for n in 0..6 {
            eigenvalues[n] = eig.values[n];
            eigentensors[n] = mandel_to_strain(&eig.vectors.column(n).into_owned());
        }
        KelvinSpectrum {
            eigenvalues,
            eigentensors,
        }
    }

    /// Largest deviation of any component from its symmetry partners, for
    /// diagnosing raw arrays before projection.
    pub fn raw_asymmetry(raw: &Raw4) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = raw[i][j][k][l];
                        worst = worst
                            .max((v - raw[j][i][k][l]).abs())
                            .max((v - raw[i][j][l][k]).abs())
                            .max((v - raw[k][l][i][j]).abs());
                    }
                }
            }
        }
        worst
    }
}

impl Index<(usize, usize, usize, usize)> for ElasticTensor4 {
    type Output = f64;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.c[flat(i, j, k, l)]
    }
}

impl Add for ElasticTensor4 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.c.iter_mut().zip(rhs.c).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for ElasticTensor4 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.c.iter_mut().zip(rhs.c).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul<f64> for ElasticTensor4 {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        self.c.iter_mut().for_each(|a| *a *= s);
        self
    }
}

/// Mandel vector `[ε11, ε22, ε33, √2ε23, √2ε13, √2ε12]` of a symmetric tensor.
pub fn strain_to_mandel(eps: &Mat3) -> Vector6<f64> {
    Vector6::from_fn(|a, _| {
        let (i, j) = MANDEL_PAIRS[a];
        MANDEL_WEIGHTS[a] * 0.5 * (eps[(i, j)] + eps[(j, i)])
    })
}

/// Inverse of [`strain_to_mandel`].
pub fn mandel_to_strain(v: &Vector6<f64>) -> Mat3 {
    let mut e = Mat3::zeros();
    for a in 0..6 {
        let (i, j) = MANDEL_PAIRS[a];
        let x = v[a] / MANDEL_WEIGHTS[a];
        e[(i, j)] = x;
        e[(j, i)] = x;
    }
    e
}

fn check_symmetric(m: &Mat6) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("6x6 matrix"));
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * m.amax().max(1.0) {
        return Err(Error::Asymmetric { asymmetry: asym });
    }
    Ok(())
}

pub(crate) fn symmetric_part(m: &Mat6) -> Mat6 {
    (m + m.transpose()) * 0.5
}

/// Symmetric 6×6 stiffness matrix in the orthonormal Mandel basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MandelMatrix(Mat6);

impl MandelMatrix {
    /// Accepts `m` if symmetric within tolerance and stores its symmetric part.
    pub fn new(m: Mat6) -> Result<Self> {
        check_symmetric(&m)?;
        Ok(Self(symmetric_part(&m)))
    }

    pub fn identity() -> Self {
        Self(Mat6::identity())
    }

    pub fn from_row_slice(entries: &[f64]) -> Result<Self> {
        if entries.len() != 36 {
            return Err(Error::InvalidArgument(format!(
                "expected 36 Mandel entries, got {}",
                entries.len()
            )));
        }
        Self::new(Mat6::from_row_slice(entries))
    }

    pub fn to_row_vec(&self) -> Vec<f64> {
        (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }

    pub fn into_inner(self) -> Mat6 {
        self.0
    }

    /// Inverse of [`ElasticTensor4::to_mandel`].
    pub fn to_tensor(&self) -> ElasticTensor4 {
        ElasticTensor4::from_slot_fn(|a, b| self.0[(a, b)] / weight_product(a, b))
    }

    /// `R⁽ᴹ⁾ M R⁽ᴹ⁾ᵀ`.
    pub fn rotate(&self, rp: &RotationPair) -> Self {
        let out = rp.r_mandel * self.0 * rp.r_mandel.transpose();
        Self(symmetric_part(&out))
    }

    /// Strain energy `½ εᴹᵀ M εᴹ`.
    pub fn strain_energy(&self, eps: &Mat3) -> f64 {
        let v = strain_to_mandel(eps);
        0.5 * v.dot(&(self.0 * v))
    }
}

/// Checks a symmetric 6×6 matrix and converts it to a tensor.
pub fn from_mandel(m: &Mat6) -> Result<ElasticTensor4> {
    Ok(MandelMatrix::new(*m)?.to_tensor())
}

/// Stress-form Voigt stiffness (raw components, no shear weights).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoigtMatrix(pub Mat6);

impl VoigtMatrix {
    /// Voigt rotation rule `R⁽ⱽ·σ⁾ V R⁽ⱽ·σ⁾ᵀ`.
    pub fn rotate(&self, r: &Mat3) -> Result<Self> {
        check_rotation(r)?;
        let rs = voigt_stress_rotation(r);
        Ok(Self(rs * self.0 * rs.transpose()))
    }
}

/// Rotation validity check returning the measured defects on failure.
pub fn check_rotation(r: &Mat3) -> Result<()> {
    let orthogonality = (r.transpose() * r - Mat3::identity()).norm();
    let det_defect = (r.determinant() - 1.0).abs();
    if !(orthogonality <= ROTATION_TOL && det_defect <= ROTATION_TOL) {
        return Err(Error::NotRotation {
            orthogonality,
            det_defect,
        });
    }
    Ok(())
}

/// 6×6 representation of a rotation acting on symmetric tensors stored with
/// the given off-diagonal block factors.
fn rotation_block(r: &Mat3, upper_right: f64, lower_left: f64) -> Mat6 {
    Mat6::from_fn(|a, b| {
        let (i, j) = MANDEL_PAIRS[a];
        let (k, l) = MANDEL_PAIRS[b];
        match (a < 3, b < 3) {
            (true, true) => r[(a, b)] * r[(a, b)],
            (true, false) => upper_right * r[(a, k)] * r[(a, l)],
            (false, true) => lower_left * r[(i, b)] * r[(j, b)],
            (false, false) => r[(i, k)] * r[(j, l)] + r[(i, l)] * r[(j, k)],
        }
    })
}

/// Voigt stress-basis representation `R⁽ⱽ·σ⁾` (not orthonormal).
pub fn voigt_stress_rotation(r: &Mat3) -> Mat6 {
    rotation_block(r, 2.0, 1.0)
}

/// Voigt strain-basis representation `R⁽ⱽ·ε⁾` (not orthonormal).
pub fn voigt_strain_rotation(r: &Mat3) -> Mat6 {
    rotation_block(r, 1.0, 2.0)
}

/// A proper rotation and its orthonormal Mandel-space representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPair {
    pub r: Mat3,
    pub r_mandel: Mat6,
}

impl RotationPair {
    pub fn new(r: Mat3) -> Result<Self> {
        check_rotation(&r)?;
        Ok(Self {
            r,
            r_mandel: rotation_block(&r, SQRT_2, SQRT_2),
        })
    }

    pub fn identity() -> Self {
        Self {
            r: Mat3::identity(),
            r_mandel: Mat6::identity(),
        }
    }

    /// `‖R⁽ᴹ⁾ᵀR⁽ᴹ⁾ − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        (self.r_mandel.transpose() * self.r_mandel - Mat6::identity()).norm()
    }
}

/// Six eigenvalue/eigentensor pairs, eigenvalues descending. Within a
/// degenerate cluster the eigentensors are an arbitrary orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KelvinSpectrum {
    pub eigenvalues: [f64; 6],
    pub eigentensors: [Mat3; 6],
}

impl KelvinSpectrum {
    /// `Σ λᵢ Eⁱ ⊗ Eⁱ`.
    pub fn reconstruct(&self) -> ElasticTensor4 {
        let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
        for (lam, e) in self.eigenvalues.iter().zip(&self.eigentensors) {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            raw[i][j][k][l] += lam * e[(i, j)] * e[(k, l)];
                        }
                    }
                }
            }
        }
        ElasticTensor4::symmetrize(&raw).expect("finite spectrum")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[5]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_raw(rng: &mut ChaCha8Rng) -> Raw4 {
        let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
        for x in raw.iter_mut().flatten().flatten().flatten() {
            *x = rng.random_range(-1.0..1.0);
        }
        raw
    }

    fn random_tensor(rng: &mut ChaCha8Rng) -> ElasticTensor4 {
        ElasticTensor4::symmetrize(&random_raw(rng)).unwrap()
    }

    /// Brute-force 8-fold contraction, independent of the factorized path.
    fn rotate_oracle(c: &ElasticTensor4, r: &Mat3) -> Raw4 {
        let mut out = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut s = 0.0;
                        for a in 0..3 {
                            for b in 0..3 {
                                for cc in 0..3 {
                                    for d in 0..3 {
                                        s += r[(i, a)]
                                            * r[(j, b)]
                                            * r[(k, cc)]
                                            * r[(l, d)]
                                            * c[(a, b, cc, d)];
                                    }
                                }
                            }
                        }
                        out[i][j][k][l] = s;
                    }
                }
            }
        }
        out
    }

    fn rz90() -> Mat3 {
        Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn symmetrize_spreads_single_entry_over_orbit() {
        let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
        raw[0][1][0][0] = 1.0;
        let c = ElasticTensor4::symmetrize(&raw).unwrap();
        // Orbit of (0,1,0,0): (0,1,0,0) (1,0,0,0) (0,0,0,1) (0,0,1,0); 8 terms, 2 each.
        let orbit = [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let expected = if orbit.contains(&(i, j, k, l)) {
                            0.25
                        } else {
                            0.0
                        };
                        assert_eq!(c[(i, j, k, l)], expected);
                    }
                }
            }
        }
    }

    #[test]
    fn symmetrize_is_idempotent_and_rejects_nan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_tensor(&mut rng);
        assert_eq!(ElasticTensor4::symmetrize(&c.to_raw()).unwrap(), c);
        assert_eq!(
            ElasticTensor4::symmetrize(&[[[[0.0; 3]; 3]; 3]; 3]).unwrap(),
            ElasticTensor4::zero()
        );
        let mut raw = c.to_raw();
        raw[2][1][0][0] = f64::NAN;
        assert!(matches!(
            ElasticTensor4::symmetrize(&raw),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn symmetric_subspace_has_21_dimensions() {
        // Rank of the projection map over the 81 unit inputs.
        let mut cols = nalgebra::DMatrix::<f64>::zeros(81, 81);
        for n in 0..81 {
            let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
            raw[n / 27][(n / 9) % 3][(n / 3) % 3][n % 3] = 1.0;
            let c = ElasticTensor4::symmetrize(&raw).unwrap();
            for (m, v) in c.c.iter().enumerate() {
                cols[(m, n)] = *v;
            }
        }
        assert_eq!(cols.rank(1e-10), 21);
    }

    #[test]
    fn mandel_layout_of_isotropic_tensor() {
        let m = ElasticTensor4::isotropic(1.0, 1.0).to_mandel();
        let m = m.matrix();
        assert_eq!(m[(0, 0)], 3.0);
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(3, 3)], 2.0);
        assert_eq!(m[(0, 3)], 0.0);
        assert_eq!(
            ElasticTensor4::zero().to_mandel(),
            MandelMatrix::new(Mat6::zeros()).unwrap()
        );
    }

    #[test]
    fn single_shear_component_lands_on_shear_diagonal() {
        let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
        for &(i, j) in &[(1, 2), (2, 1)] {
            for &(k, l) in &[(1, 2), (2, 1)] {
                raw[i][j][k][l] = 1.0;
            }
        }
        let c = ElasticTensor4::symmetrize(&raw).unwrap();
        let m = c.to_mandel();
        let v = c.to_voigt();
        for a in 0..6 {
            for b in 0..6 {
                let em = if (a, b) == (3, 3) { 2.0 } else { 0.0 };
                let ev = if (a, b) == (3, 3) { 1.0 } else { 0.0 };
                assert_eq!(m.matrix()[(a, b)], em);
                assert_eq!(v.0[(a, b)], ev);
            }
        }
    }

    #[test]
    fn voigt_of_isotropic() {
        let v = ElasticTensor4::isotropic(1.0, 1.0).to_voigt();
        assert_eq!(v.0[(3, 3)], 1.0);
        assert_eq!(v.0[(0, 0)], 3.0);
        assert_eq!(ElasticTensor4::zero().to_voigt().0, Mat6::zeros());
    }

    #[test]
    fn from_mandel_identity_has_unit_axis_moduli() {
        let c = MandelMatrix::identity().to_tensor();
        for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
            assert!((c.directional_modulus(&axis).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(
            MandelMatrix::new(Mat6::zeros()).unwrap().to_tensor(),
            ElasticTensor4::zero()
        );
    }

    #[test]
    fn from_mandel_rejects_asymmetric() {
        let mut m = Mat6::identity();
        m[(0, 1)] = 1e-3;
        assert!(matches!(from_mandel(&m), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn mandel_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let c = random_tensor(&mut rng);
            let back = c.to_mandel().to_tensor();
            assert!((back - c).norm() <= 1e-15 * c.norm());
            assert_eq!(back.to_mandel().matrix(), c.to_mandel().matrix());
        }
    }

    #[test]
    fn mandel_rotation_of_quarter_turn_about_z() {
        let rp = RotationPair::new(rz90()).unwrap();
        // Rows worked out by substituting R into the block formula.
        #[rustfmt::skip]
        let expected = Mat6::from_row_slice(&[
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, -1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, -1.0,
        ]);
        assert!((rp.r_mandel - expected).amax() < 1e-15);
        assert_eq!(
            RotationPair::new(Mat3::identity()).unwrap().r_mandel,
            Mat6::identity()
        );
    }

    #[test]
    fn rejects_reflections_and_shears() {
        let reflection = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        match RotationPair::new(reflection) {
            Err(Error::NotRotation { det_defect, .. }) => assert!((det_defect - 2.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let mut shear = Mat3::identity();
        shear[(0, 1)] = 1e-6;
        assert!(ElasticTensor4::isotropic(1.0, 1.0).rotate(&shear).is_err());
    }

    #[test]
    fn rotate_matches_brute_force_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = random_tensor(&mut rng);
            let r = sampling::rotation(&mut rng);
            let fast = c.rotate(&r).unwrap();
            let slow = ElasticTensor4::symmetrize(&rotate_oracle(&c, &r)).unwrap();
            assert!((fast - slow).norm() < 1e-13 * c.norm());
        }
    }

    #[test]
    fn rotation_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let iso = ElasticTensor4::isotropic(0.7, 1.3);
        for _ in 0..10 {
            let r = sampling::rotation(&mut rng);
            assert!((iso.rotate(&r).unwrap() - iso).norm() < 1e-12);
        }
        let c = random_tensor(&mut rng);
        assert!((c.rotate(&Mat3::identity()).unwrap() - c).norm() < 1e-15);

        // Cubic symmetry: C11, C12, C44 pattern.
        let cubic = MandelMatrix::new(Mat6::from_fn(|a, b| match (a < 3, b < 3) {
            (true, true) if a == b => 5.0,
            (true, true) => 1.5,
            (false, false) if a == b => 0.8,
            _ => 0.0,
        }))
        .unwrap()
        .to_tensor();
        let rotated = ElasticTensor4::symmetrize(&rotate_oracle(&cubic, &rz90())).unwrap();
        assert!((rotated - cubic).norm() < 1e-14);
        assert!((cubic.rotate(&rz90()).unwrap() - cubic).norm() < 1e-14);
    }

    #[test]
    fn rotate_mandel_agrees_with_cartesian_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let c = random_tensor(&mut rng);
            let r = sampling::rotation(&mut rng);
            let rp = RotationPair::new(r).unwrap();
            let via_mandel = c.to_mandel().rotate(&rp);
            let via_cartesian = c.rotate(&r).unwrap().to_mandel();
            assert!(
                (via_mandel.matrix() - via_cartesian.matrix()).norm()
                    < 1e-10 * c.to_mandel().matrix().norm()
            );
        }
        let m = ElasticTensor4::isotropic(2.0, 0.5).to_mandel();
        assert_eq!(m.rotate(&RotationPair::identity()), m);
    }

    #[test]
    fn voigt_rotation_rule_matches_cartesian_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let c = random_tensor(&mut rng);
            let r = sampling::rotation(&mut rng);
            let rotated = c.to_voigt().rotate(&r).unwrap();
            let expected = c.rotate(&r).unwrap().to_voigt();
            assert!((rotated.0 - expected.0).norm() < 1e-12);
            // R⁽ⱽ·σ⁾⁻¹ = R⁽ⱽ·ε⁾ᵀ, and neither is orthonormal.
            let rs = voigt_stress_rotation(&r);
            let re = voigt_strain_rotation(&r);
            assert!((rs * re.transpose() - Mat6::identity()).norm() < 1e-12);
            assert!((rs.transpose() * rs - Mat6::identity()).norm() > 1e-3);
        }
    }

    #[test]
    fn directional_modulus_examples() {
        let iso = ElasticTensor4::isotropic(1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d = sampling::unit_vector(&mut rng);
            assert!((iso.directional_modulus(&d).unwrap() - 3.0).abs() < 1e-14);
            assert_eq!(ElasticTensor4::zero().directional_modulus(&d).unwrap(), 0.0);
        }
        let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
        raw[0][0][0][0] = 1.0;
        let c = ElasticTensor4::symmetrize(&raw).unwrap();
        assert_eq!(c.directional_modulus(&Vec3::x()).unwrap(), 1.0);
        assert!(matches!(
            c.directional_modulus(&Vec3::new(1.0, 1.0, 0.0)),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn strain_energy_examples() {
        let iso = ElasticTensor4::isotropic(1.0, 1.0);
        assert_eq!(iso.strain_energy(&Mat3::zeros()).unwrap(), 0.0);
        let mut shear = Mat3::zeros();
        shear[(0, 1)] = 0.5;
        shear[(1, 0)] = 0.5;
        assert!((iso.strain_energy(&shear).unwrap() - 0.5).abs() < 1e-15);
        let mut bad = Mat3::zeros();
        bad[(0, 1)] = 0.5;
        assert!(iso.strain_energy(&bad).is_err());
    }

    #[test]
    fn strain_energy_matches_mandel_form_and_norms_are_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let c = random_tensor(&mut rng);
            let a = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let eps = (a + a.transpose()) * 0.5;
            let cart = c.strain_energy(&eps).unwrap();
            let mandel = c.to_mandel().strain_energy(&eps);
            assert!((cart - mandel).abs() < 1e-12);
            let v = strain_to_mandel(&eps);
            assert!((v.norm_squared() - eps.component_mul(&eps).sum()).abs() < 1e-14);
            assert!((mandel_to_strain(&v) - eps).amax() < 1e-15);
        }
    }

    #[test]
    fn kelvin_spectrum_of_isotropic_tensor() {
        let s = ElasticTensor4::isotropic(1.0, 1.0).kelvin_spectrum();
        assert!((s.eigenvalues[0] - 5.0).abs() < 1e-12);
        for k in 1..6 {
            assert!((s.eigenvalues[k] - 2.0).abs() < 1e-12);
        }
        // The bulk eigentensor spans the hydrostatic direction.
        let e0 = s.eigentensors[0];
        let hydro = Mat3::identity() / 3f64.sqrt();
        assert!((e0.dot(&hydro).abs() - 1.0).abs() < 1e-12);

        let z = ElasticTensor4::zero().kelvin_spectrum();
        assert_eq!(z.eigenvalues, [0.0; 6]);
    }

    #[test]
    fn kelvin_pairs_are_eigenpairs_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let c = random_tensor(&mut rng);
            let s = c.kelvin_spectrum();
            for a in 0..6 {
                let e = s.eigentensors[a];
                assert!((e - e.transpose()).amax() == 0.0);
                assert!((c.contract(&e) - e * s.eigenvalues[a]).norm() < 1e-9);
                for b in 0..6 {
                    let dot = e.dot(&s.eigentensors[b]);
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - expected).abs() < 1e-9);
                }
            }
            assert!((s.reconstruct() - c).norm() < 1e-9);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
