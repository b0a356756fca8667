use nalgebra::{Matrix3, Matrix6, Vector3};
use proptest::prelude::*;
use strut_lattice::fe::homogenize_windowed;
use strut_lattice::lattice::library::*;
use strut_lattice::metrics::l_comp;
use strut_lattice::psd::{min_eigenvalue, project};
use strut_lattice::record::StiffnessRecord;
use strut_lattice::sampling::axis_angle;
use strut_lattice::tensor4::from_mandel;
use strut_lattice::{
    homogenize, BeamMaterial, ElasticTensor4, Lattice, MandelMatrix, Mat3, Mat6, PsdMethod, Vec3,
};

fn symmetric6() -> impl Strategy<Value = Mat6> {
    prop::collection::vec(-10.0f64..10.0, 36).prop_map(|v| {
        let a = Matrix6::from_row_slice(&v);
        (a + a.transpose()) * 0.5
    })
}

fn rotation() -> impl Strategy<Value = Mat3> {
    (prop::array::uniform3(-1.0f64..1.0), -3.2f64..3.2)
        .prop_filter("nonzero axis", |(a, _)| Vector3::from(*a).norm() > 1e-3)
        .prop_map(|(a, t)| axis_angle(Vector3::from(a), t))
}

fn unit_vector() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("nonzero", |a| Vector3::from(*a).norm() > 1e-3)
        .prop_map(|a| Vector3::from(a).normalize())
}

fn library_lattice() -> impl Strategy<Value = Lattice> {
    prop_oneof![
        Just(bcc(0.03)),
        Just(octet(0.02)),
        Just(diamond(0.03)),
        Just(simple_cubic_bcc(0.03)),
        Just(simple_cubic(0.05).tessellate(2).unwrap()),
    ]
}

fn rel(a: &ElasticTensor4, b: &ElasticTensor4) -> f64 {
    (*a - *b).norm() / b.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mandel_round_trip(m in symmetric6()) {
        let back = from_mandel(&m).unwrap().to_mandel().into_inner();
        prop_assert!((back - m).amax() <= 1e-14 * m.amax().max(1.0));
    }

    #[test]
    fn directional_modulus_is_frame_independent(m in symmetric6(), r in rotation(), d in unit_vector()) {
        let c = from_mandel(&m).unwrap();
        let a = c.directional_modulus(&d).unwrap();
        let b = c.rotate(&r).unwrap().directional_modulus(&(r * d)).unwrap();
        prop_assert!((a - b).abs() < 1e-11 * m.amax().max(1.0));
    }

    #[test]
    fn rotation_preserves_norm_and_spectrum(m in symmetric6(), r in rotation()) {
        let c = from_mandel(&m).unwrap();
        let rc = c.rotate(&r).unwrap();
        prop_assert!((rc.norm() - c.norm()).abs() < 1e-12 * c.norm().max(1.0));
        let (a, b) = (c.kelvin_spectrum().eigenvalues, rc.kelvin_spectrum().eigenvalues);
        for k in 0..6 {
            prop_assert!((a[k] - b[k]).abs() < 1e-10 * m.amax().max(1.0));
        }
    }

    #[test]
    fn symmetrize_is_a_projection(raw in prop::collection::vec(-5.0f64..5.0, 81)) {
        let mut t = [[[[0.0; 3]; 3]; 3]; 3];
        for (n, v) in raw.iter().enumerate() {
            t[n / 27][(n / 9) % 3][(n / 3) % 3][n % 3] = *v;
        }
        let c = ElasticTensor4::symmetrize(&t).unwrap();
        prop_assert_eq!(ElasticTensor4::symmetrize(&c.to_raw()).unwrap(), c);
        prop_assert!(ElasticTensor4::raw_asymmetry(&c.to_raw()) == 0.0);
    }

    #[test]
    fn psd_layers_are_semidefinite(m in symmetric6().prop_map(|m| m * 0.1)) {
        for method in PsdMethod::EQUIVARIANT {
            let out = project(&m, method).unwrap();
            prop_assert!(min_eigenvalue(&out) >= -1e-10 * out.norm(), "{}", method);
        }
    }

    #[test]
    fn component_loss_is_a_squared_distance(a in symmetric6(), b in symmetric6()) {
        let (a, b) = (MandelMatrix::new(a).unwrap(), MandelMatrix::new(b).unwrap());
        prop_assert!(l_comp(&a, &b) >= 0.0);
        prop_assert_eq!(l_comp(&a, &b), l_comp(&b, &a));
        prop_assert_eq!(l_comp(&a, &b), (a.matrix() - b.matrix()).norm_squared());
    }

    #[test]
    fn stiffness_record_round_trip(m in symmetric6(), rho in proptest::option::of(0.0f64..1.0)) {
        let mut rec = StiffnessRecord::from_tensor(&from_mandel(&m).unwrap());
        rec.relative_density = rho;
        let back = StiffnessRecord::from_json(&rec.to_json()).unwrap();
        prop_assert_eq!(
            back.mandel.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            rec.mandel.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(back.relative_density.map(f64::to_bits), rho.map(f64::to_bits));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn perturbation_moves_every_node_by_level(lat in library_lattice(), level in 0.0f64..0.15, seed in any::<u64>()) {
        let p = lat.perturb(level, seed).unwrap();
        prop_assert_eq!(p.node_count(), lat.node_count());
        prop_assert_eq!(p.edge_count(), lat.edge_count());
        for i in 0..lat.node_count() {
            let d = (p.nodes()[i] - lat.nodes()[i]).map(|x| x - x.round());
            prop_assert!(((lat.cell() * d).norm() - level).abs() < 1e-12);
            prop_assert!(p.nodes()[i].iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        prop_assert_eq!(lat.perturb(level, seed).unwrap(), p);
    }

    #[test]
    fn homogenization_is_equivariant(lat in library_lattice(), r in rotation(), seed in 0u64..1000) {
        let lat = lat.perturb(0.04, seed).unwrap();
        let mat = BeamMaterial::default();
        let base = homogenize(&lat, &mat).unwrap().stiffness;
        let rotated = homogenize(&lat.rotate(&r).unwrap(), &mat).unwrap().stiffness;
        prop_assert!(rel(&rotated, &base.rotate(&r).unwrap()) < 1e-8);
    }

    #[test]
    fn homogenized_tensors_are_psd_and_window_consistent(lat in library_lattice(), seed in 0u64..1000, radius in 0.01f64..0.05) {
        let lat = lat.perturb(0.05, seed).unwrap().with_radius(radius).unwrap();
        let mat = BeamMaterial::default();
        let res = homogenize(&lat, &mat).unwrap();
        let spec = res.stiffness.kelvin_spectrum();
        prop_assert!(spec.min_eigenvalue() >= -1e-9 * spec.max_eigenvalue());
        prop_assert!(res.raw_asymmetry < 1e-9);
        prop_assert!(res.residual < 1e-8);
        // Cutting a strut next to a face leaves a segment whose bending
        // stiffness grows as 1/L³; very short cuts exceed double precision.
        let w = lat.window();
        let pos = w.positions();
        let lengths: Vec<f64> = w.elements.iter().map(|&(a, b)| (pos[b] - pos[a]).norm()).collect();
        let (shortest, longest) = lengths.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        prop_assume!(shortest >= 1e-3 * longest);
        let windowed = homogenize_windowed(&w, &mat).unwrap();
        prop_assert!(rel(&windowed.stiffness, &res.stiffness) < 1e-9);
    }

    #[test]
    fn stiffness_scales_linearly_with_modulus(lat in library_lattice(), e in 0.1f64..100.0) {
        let a = homogenize(&lat, &BeamMaterial::new(1.0, 0.3).unwrap()).unwrap().stiffness;
        let b = homogenize(&lat, &BeamMaterial::new(e, 0.3).unwrap()).unwrap().stiffness;
        prop_assert!(rel(&b, &(a * e)) < 1e-12);
    }
}

#[test]
fn tessellation_counts_and_invariance() {
    let mat = BeamMaterial::default();
    let sc = simple_cubic(0.05);
    let t = sc.tessellate(2).unwrap();
    assert_eq!((t.node_count(), t.edge_count()), (8, 24));
    for lat in [
        sc,
        bcc(0.03),
        triclinic(0.04),
        diamond(0.03).perturb(0.05, 3).unwrap(),
    ] {
        let a = homogenize(&lat, &mat).unwrap().stiffness;
        for n in [2, 3] {
            let b = homogenize(&lat.tessellate(n).unwrap(), &mat)
                .unwrap()
                .stiffness;
            assert!(rel(&b, &a) < 1e-8, "{} n={n}", lat.name());
        }
    }
}

#[test]
fn isotropic_tensor_has_constant_modulus() {
    let c = ElasticTensor4::isotropic(1.0, 1.0);
    let m = Matrix3::identity();
    assert_eq!(c.contract(&m), m * 5.0);
    for d in strut_lattice::DirectionSet::random(100, 0).directions() {
        assert!((c.directional_modulus(d).unwrap() - 3.0).abs() < 1e-12);
    }
}
