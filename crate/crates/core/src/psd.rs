//! Positive-(semi)definite projections of symmetric 6×6 matrices.
//!
//! Even powers, the matrix exponential and its truncated forms are analytic
//! functions of the input, so they commute with any orthonormal conjugation
//! and preserve equivariance in Mandel space. Eigenvalue clamping does too,
//! but its derivative is ill-conditioned near repeated eigenvalues. The
//! Cholesky assembly treats its 21 inputs as independent scalars and is not
//! equivariant; it is kept only as a reference.

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::tensor4::{symmetric_part, RotationPair, SYMMETRY_TOL};
use crate::Mat6;
use std::fmt;
use std::str::FromStr;

/// Map from ℝ onto the (non-negative) positive reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositiveMap {
    /// `exp(x)`: strictly positive.
    Exp,
    /// `max(x, 0)`: admits zero eigenvalues.
    Relu,
}

impl PositiveMap {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            PositiveMap::Exp => x.exp(),
            PositiveMap::Relu => x.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsdMethod {
    /// `A²`
    Square,
    /// `A⁴`
    Fourth,
    /// `eᴬ`
    Exp,
    /// `(I + A/2)²`
    TruncExp2,
    /// `(I + A/4)⁴`
    TruncExp4,
    /// `U relu(Λ) Uᵀ`
    EigenClamp,
    /// `L Lᵀ` from 21 lower-triangular parameters (see [`cholesky_assemble`]).
    CholeskyAssemble,
}

impl PsdMethod {
    /// Methods that take a symmetric matrix and commute with rotations.
    pub const EQUIVARIANT: [PsdMethod; 5] = [
        PsdMethod::Square,
        PsdMethod::Fourth,
        PsdMethod::Exp,
        PsdMethod::TruncExp2,
        PsdMethod::TruncExp4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PsdMethod::Square => "square",
            PsdMethod::Fourth => "fourth",
            PsdMethod::Exp => "exp",
            PsdMethod::TruncExp2 => "trunc2",
            PsdMethod::TruncExp4 => "trunc4",
            PsdMethod::EigenClamp => "eigclamp",
            PsdMethod::CholeskyAssemble => "cholesky",
        }
    }
}

impl fmt::Display for PsdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PsdMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "square" => PsdMethod::Square,
            "fourth" => PsdMethod::Fourth,
            "exp" => PsdMethod::Exp,
            "trunc2" => PsdMethod::TruncExp2,
            "trunc4" => PsdMethod::TruncExp4,
            "eigclamp" => PsdMethod::EigenClamp,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown PSD method '{other}' (expected square, fourth, exp, trunc2, trunc4, eigclamp)"
                )))
            }
        })
    }
}

fn check_input(m: &Mat6) -> Result<Mat6> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("PSD input"));
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * m.amax().max(1.0) {
        return Err(Error::Asymmetric { asymmetry: asym });
    }
    Ok(symmetric_part(m))
}

/// Applies a matrix-input PSD method. The output is symmetric.
pub fn project(m: &Mat6, method: PsdMethod) -> Result<Mat6> {
    let m = check_input(m)?;
    let i = Mat6::identity();
    let out = match method {
        PsdMethod::Square => m * m,
        PsdMethod::Fourth => {
            let sq = m * m;
            sq * sq
        }
        PsdMethod::Exp => expm(&m),
        PsdMethod::TruncExp2 => {
            let b = i + m / 2.0;
            b * b
        }
        PsdMethod::TruncExp4 => {
            let b = i + m / 4.0;
            let b2 = b * b;
            b2 * b2
        }
        PsdMethod::EigenClamp => eigen_clamp(&m, PositiveMap::Relu),
        PsdMethod::CholeskyAssemble => return Err(Error::WrongArity("cholesky")),
    };
    // Products of a symmetric matrix with itself are symmetric up to rounding.
    Ok(if method == PsdMethod::Square {
        out
    } else {
        symmetric_part(&out)
    })
}

/// `U ρ(Λ) Uᵀ` via the Jacobi eigendecomposition.
pub fn eigen_clamp(m: &Mat6, map: PositiveMap) -> Mat6 {
    symmetric_eigen(m).map_values(|x| map.apply(x))
}

/// `(I + M/2ᵏ)^(2ᵏ)` by `k` repeated squarings.
pub fn trunc_exp_pow2(m: &Mat6, k: u32) -> Mat6 {
    let mut b = Mat6::identity() + m / 2f64.powi(k as i32);
    for _ in 0..k {
        b = b * b;
    }
    b
}

const TAYLOR_DEGREE: usize = 12;
const SCALING_THRESHOLD: f64 = 0.5;

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// The input is halved until its 1-norm drops below 0.5, where a degree-12
/// Taylor polynomial has a truncation error below 3e-14.
pub fn expm(m: &Mat6) -> Mat6 {
    let norm1 = (0..6)
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    if norm1 > SCALING_THRESHOLD {
        s = (norm1 / SCALING_THRESHOLD).log2().ceil() as i32;
    }
    let a = m / 2f64.powi(s);
    // Horner form of Σ aⁿ/n!.
    let mut p = Mat6::identity();
    for n in (1..=TAYLOR_DEGREE).rev() {
        p = Mat6::identity() + a * p / n as f64;
    }
    for _ in 0..s {
        p = p * p;
    }
    symmetric_part(&p)
}

/// Lower-triangular `L` filled row by row from `params`, diagonal through
/// `diag_map`, returning `L Lᵀ`.
///
/// Layout follows `[ρ(a0); a1 ρ(a2); a3 a4 ρ(a5); …]`.
pub fn cholesky_assemble(params: &[f64; 21], diag_map: PositiveMap) -> Result<Mat6> {
    if params.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Cholesky parameters"));
    }
    let mut l = Mat6::zeros();
    let mut n = 0;
    for i in 0..6 {
        for j in 0..=i {
            l[(i, j)] = if i == j {
                diag_map.apply(params[n])
            } else {
                params[n]
            };
            n += 1;
        }
    }
    Ok(symmetric_part(&(l * l.transpose())))
}

/// Packs the lower triangle of a symmetric matrix into the 21-vector order
/// used by [`cholesky_assemble`].
pub fn lower_triangle(m: &Mat6) -> [f64; 21] {
    let mut out = [0.0; 21];
    let mut n = 0;
    for i in 0..6 {
        for j in 0..=i {
            out[n] = m[(i, j)];
            n += 1;
        }
    }
    out
}

/// Inverse of [`lower_triangle`].
pub fn symmetric_from_lower(params: &[f64; 21]) -> Mat6 {
    let mut m = Mat6::zeros();
    let mut n = 0;
    for i in 0..6 {
        for j in 0..=i {
            m[(i, j)] = params[n];
            m[(j, i)] = params[n];
            n += 1;
        }
    }
    m
}

/// `‖P(R M Rᵀ) − R P(M) Rᵀ‖_F / ‖P(M)‖_F` with `R = R⁽ᴹ⁾`.
pub fn equivariance_defect(method: PsdMethod, m: &Mat6, rp: &RotationPair) -> Result<f64> {
    let rm = &rp.r_mandel;
    let base = project(m, method)?;
    let rotated_input = rm * m * rm.transpose();
    let lhs = project(&symmetric_part(&rotated_input), method)?;
    let rhs = rm * base * rm.transpose();
    let scale = base.norm();
    if scale == 0.0 {
        return Ok((lhs - rhs).norm());
    }
    Ok((lhs - rhs).norm() / scale)
}

/// Same defect for the Cholesky assembly, treating the 21 parameters as the
/// lower triangle of a Mandel matrix that is rotated before re-assembly.
pub fn cholesky_equivariance_defect(
    params: &[f64; 21],
    diag_map: PositiveMap,
    rp: &RotationPair,
) -> Result<f64> {
    let rm = &rp.r_mandel;
    let base = cholesky_assemble(params, diag_map)?;
    let rotated = rm * symmetric_from_lower(params) * rm.transpose();
    let lhs = cholesky_assemble(&lower_triangle(&rotated), diag_map)?;
    let rhs = rm * base * rm.transpose();
    Ok((lhs - rhs).norm() / base.norm())
}

/// Voigt counterpart of [`equivariance_defect`] for the matrix square,
/// rotating with the non-orthonormal stress-basis representation.
pub fn voigt_square_defect(v: &Mat6, r: &crate::Mat3) -> Result<f64> {
    crate::tensor4::check_rotation(r)?;
    let rs = crate::tensor4::voigt_stress_rotation(r);
    let base = v * v;
    let rotated = rs * v * rs.transpose();
    let lhs = rotated * rotated;
    let rhs = rs * base * rs.transpose();
    Ok((lhs - rhs).norm() / rhs.norm())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Mat6) -> f64 {
    symmetric_eigen(m).min_value()
}
