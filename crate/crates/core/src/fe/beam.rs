//! Two-node Euler–Bernoulli frame element with a solid circular section.
//!
//! DOF order per node: `ux uy uz θx θy θz`; node a first, then node b.

use super::BeamMaterial;
use crate::error::{Error, Result};
use crate::{Mat3, Vec3};
use nalgebra::SMatrix;
use std::f64::consts::PI;

pub type Mat12 = SMatrix<f64, 12, 12>;

/// Section properties of a circular strut: area, second moment, polar moment.
pub fn circular_section(radius: f64) -> (f64, f64, f64) {
    let r2 = radius * radius;
    (PI * r2, PI * r2 * r2 / 4.0, PI * r2 * r2 / 2.0)
}

/// Local-frame stiffness with the element axis along local x.
pub fn local_stiffness(length: f64, radius: f64, mat: &BeamMaterial) -> Mat12 {
    let (area, inertia, polar) = circular_section(radius);
    let e = mat.youngs_modulus;
    let g = mat.shear_modulus();
    let l = length;
    let axial = e * area / l;
    let torsion = g * polar / l;
    let b12 = 12.0 * e * inertia / (l * l * l);
    let b6 = 6.0 * e * inertia / (l * l);
    let b4 = 4.0 * e * inertia / l;
    let b2 = 2.0 * e * inertia / l;

    let mut k = Mat12::zeros();
    let mut set = |i: usize, j: usize, v: f64| {
        k[(i, j)] = v;
        k[(j, i)] = v;
    };
    set(0, 0, axial);
    set(6, 6, axial);
    set(0, 6, -axial);

    set(3, 3, torsion);
    set(9, 9, torsion);
    set(3, 9, -torsion);

    // Bending in the local x-y plane: uy with θz.
    set(1, 1, b12);
    set(7, 7, b12);
    set(1, 7, -b12);
    set(1, 5, b6);
    set(1, 11, b6);
    set(5, 7, -b6);
    set(7, 11, -b6);
    set(5, 5, b4);
    set(11, 11, b4);
    set(5, 11, b2);

    // Bending in the local x-z plane: uz with θy (opposite sign coupling).
    set(2, 2, b12);
    set(8, 8, b12);
    set(2, 8, -b12);
    set(2, 4, -b6);
    set(2, 10, -b6);
    set(4, 8, b6);
    set(8, 10, b6);
    set(4, 4, b4);
    set(10, 10, b4);
    set(4, 10, b2);
    k
}

/// Rows are the local axes expressed in global coordinates; the first row is
/// `axis`. The roll about the axis is arbitrary since the section is round.
pub fn local_frame(axis: &Vec3) -> Mat3 {
    let e1 = axis.normalize();
    let helper = if e1.x.abs() <= e1.y.abs() && e1.x.abs() <= e1.z.abs() {
        Vec3::x()
    } else if e1.y.abs() <= e1.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e2 = e1.cross(&helper).normalize();
    let e3 = e1.cross(&e2);
    Mat3::from_rows(&[e1.transpose(), e2.transpose(), e3.transpose()])
}

/// Global 12×12 stiffness `Tᵀ K_local T` for a strut along `axis`.
pub fn beam_stiffness(length: f64, radius: f64, axis: &Vec3, mat: &BeamMaterial) -> Result<Mat12> {
    if !(length.is_finite() && length > 0.0) || !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beam needs positive length and radius (got L={length}, r={radius})"
        )));
    }
    let n = axis.norm();
    if !(n.is_finite() && n > 1e-12) {
        return Err(Error::InvalidArgument("beam axis has zero length".into()));
    }
    Ok(rotate_to_global(
        &local_stiffness(length, radius, mat),
        &local_frame(axis),
    ))
}

/// `Tᵀ K T` with `T = diag(λ, λ, λ, λ)`.
pub fn rotate_to_global(k_local: &Mat12, lambda: &Mat3) -> Mat12 {
    let mut t = Mat12::zeros();
    for b in 0..4 {
        t.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(lambda);
    }
    let k = t.transpose() * k_local * t;
    (k + k.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nullity(k: &Mat12) -> usize {
        let eig = k.symmetric_eigen();
        let max = eig.eigenvalues.amax();
        eig.eigenvalues
            .iter()
            .filter(|v| v.abs() < 1e-9 * max)
            .count()
    }

    #[test]
    fn axial_entry() {
        let mat = BeamMaterial::default();
        let k = beam_stiffness(2.0, 0.1, &Vec3::x(), &mat).unwrap();
        assert!((k[(0, 0)] - PI * 0.01 / 2.0).abs() < 1e-15);
        assert!((k[(0, 6)] + PI * 0.01 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn six_rigid_body_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mat = BeamMaterial::new(rng.random_range(0.5..3.0), rng.random_range(-0.5..0.49))
                .unwrap();
            let axis = sampling::unit_vector(&mut rng);
            let k = beam_stiffness(
                rng.random_range(0.2..3.0),
                rng.random_range(0.01..0.2),
                &axis,
                &mat,
            )
            .unwrap();
            assert_eq!(nullity(&k), 6);
            assert!((k - k.transpose()).amax() == 0.0);

            // Rigid rotation about an arbitrary point produces no forces.
            let w = sampling::unit_vector(&mut rng);
            let pa = Vec3::new(0.3, -0.2, 0.1);
            let pb = pa + axis * 1.7;
            let mut d = nalgebra::SVector::<f64, 12>::zeros();
            d.fixed_rows_mut::<3>(0).copy_from(&w.cross(&pa));
            d.fixed_rows_mut::<3>(3).copy_from(&w);
            d.fixed_rows_mut::<3>(6).copy_from(&w.cross(&pb));
            d.fixed_rows_mut::<3>(9).copy_from(&w);
            let k = beam_stiffness(1.7, 0.05, &axis, &mat).unwrap();
            assert!((k * d).amax() < 1e-13);
        }
    }

    #[test]
    fn element_is_frame_covariant() {
        // Assembling along R·x must equal rotating the element assembled along x.
        let mat = BeamMaterial::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k_x = beam_stiffness(1.3, 0.07, &Vec3::x(), &mat).unwrap();
        for _ in 0..20 {
            let r = sampling::rotation(&mut rng);
            let direct = beam_stiffness(1.3, 0.07, &(r * Vec3::x()), &mat).unwrap();
            let via_frame = rotate_to_global(&k_x, &r.transpose());
            assert!((direct - via_frame).amax() < 1e-14);
        }
    }

    #[test]
    fn degenerate_geometry_rejected() {
        let mat = BeamMaterial::default();
        assert!(beam_stiffness(0.0, 0.1, &Vec3::x(), &mat).is_err());
        assert!(beam_stiffness(1.0, -0.1, &Vec3::x(), &mat).is_err());
        assert!(beam_stiffness(1.0, 0.1, &Vec3::zeros(), &mat).is_err());
    }

    #[test]
    fn cantilever_tip_deflection() {
        // Fix node a, push node b sideways: δ = P L³ / 3EI.
        let mat = BeamMaterial::default();
        let (l, r) = (2.0, 0.05);
        let k = beam_stiffness(l, r, &Vec3::x(), &mat).unwrap();
        let kb = k.fixed_view::<6, 6>(6, 6).into_owned();
        let mut f = nalgebra::Vector6::zeros();
        f[1] = 1.0;
        let u = kb.try_inverse().unwrap() * f;
        let (_, inertia, _) = circular_section(r);
        assert!((u[1] - l * l * l / (3.0 * inertia)).abs() < 1e-9 * u[1]);
    }
}
