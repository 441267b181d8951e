//! Property tests over randomized geometry, profiles and emission centers.

use approx::assert_relative_eq;
use eigenwavelet::geometry::{complex_distance, from_oblate, BranchCut, OblatePoint, SourceVector, SpacetimePoint, Vec3};
use eigenwavelet::shell::{abrupt_layer_coefficients, shell_source_density, TransitionProfile};
use eigenwavelet::wavelet::{wavelet, EmissionCenter};
use num_complex::Complex64;
use proptest::prelude::*;

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn source_vector() -> impl Strategy<Value = SourceVector> {
    vec3(2.0).prop_filter_map("degenerate", |v| (v.norm() > 0.2).then(|| SourceVector::new(v).unwrap()))
}

fn close(u: Complex64, v: Complex64, tol: f64) -> bool {
    (u - v).norm() <= tol * u.norm().max(v.norm())
}

proptest! {
    #[test]
    fn profile_is_a_partition_of_unity(p1 in 0.1f64..5.0, w in 0.01f64..2.0, s in -1.0f64..2.0) {
        let prof = TransitionProfile::new(p1, p1 + w).unwrap();
        let p = p1 + s * w;
        let (h1, h2) = (prof.h1(p), prof.h2(p));
        prop_assert_eq!(h1 + h2, 1.0);
        prop_assert!((0.0..=1.0).contains(&h2));
        if s <= 0.0 {
            prop_assert_eq!(h2, 0.0);
        }
        if s >= 1.0 {
            prop_assert_eq!(h2, 1.0);
        }
    }

    #[test]
    fn shell_source_is_exactly_zero_off_the_shell(
        a in source_vector(),
        bf in 1.05f64..3.0,
        p in 0.01f64..10.0,
        q in -0.999f64..0.999,
        phi in 0.0f64..6.28,
        t in -5.0f64..10.0,
    ) {
        let prof = TransitionProfile::new(1.5 * a.magnitude(), 2.5 * a.magnitude()).unwrap();
        prop_assume!(!prof.in_transition(p));
        let z = EmissionCenter::at_origin(a, bf * a.magnitude()).unwrap();
        let r = from_oblate(OblatePoint::new(p, q * a.magnitude(), phi), &a).unwrap();
        let d = shell_source_density(SpacetimePoint::new(r, t), &prof, &z).unwrap();
        prop_assert_eq!(d, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn distance_identities_hold(a in source_vector(), r in vec3(6.0)) {
        prop_assume!(a.distance_to_disk(r) > 1e-6);
        let rho = complex_distance(r, &a).unwrap();
        let scale = r.norm_sq() + a.magnitude().powi(2);
        assert_relative_eq!(rho.p * rho.p - rho.q * rho.q, r.norm_sq() - a.magnitude().powi(2), epsilon = 1e-12 * scale);
        assert_relative_eq!(rho.p * rho.q, a.vec().dot(r), epsilon = 1e-12 * scale);
        prop_assert!(rho.p >= 0.0);
    }

    #[test]
    fn negative_b_is_anti_conjugate_under_reflection(
        a in source_vector(),
        bf in 1.05f64..3.0,
        r in vec3(5.0),
        t in -6.0f64..6.0,
    ) {
        prop_assume!(a.distance_to_disk(r) > 1e-3);
        let b = bf * a.magnitude();
        let plus = EmissionCenter::at_origin(a, b).unwrap();
        let minus = EmissionCenter::at_origin(a, -b).unwrap();
        let lhs = wavelet(SpacetimePoint::new(a.reflect(r), t), &minus, BranchCut::StandardDisk).unwrap();
        let rhs = -wavelet(SpacetimePoint::new(r, t), &plus, BranchCut::StandardDisk).unwrap().conj();
        prop_assert!(close(lhs, rhs, 1e-12), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn layer_densities_are_axisymmetric(
        alpha in 0.3f64..4.0,
        q in -0.99f64..0.99,
        phi1 in 0.0f64..6.28,
        phi2 in 0.0f64..6.28,
        t in -3.0f64..6.0,
    ) {
        let a = SourceVector::along_x3(1.0).unwrap();
        let z = EmissionCenter::at_origin(a, 1.4).unwrap();
        let at = |phi| SpacetimePoint::new(from_oblate(OblatePoint::new(alpha, q, phi), &a).unwrap(), t);
        let l1 = abrupt_layer_coefficients(at(phi1), alpha, &z).unwrap();
        let l2 = abrupt_layer_coefficients(at(phi2), alpha, &z).unwrap();
        prop_assert!(close(l1.single_layer, l2.single_layer, 1e-9));
        prop_assert!(close(l1.double_layer, l2.double_layer, 1e-9));
    }

    #[test]
    fn field_is_translation_invariant(
        a in source_vector(),
        bf in 1.05f64..3.0,
        r in vec3(4.0),
        t in -4.0f64..8.0,
        dr in vec3(10.0),
        dt in -10.0f64..10.0,
    ) {
        prop_assume!(a.distance_to_disk(r) > 1e-3);
        let z = EmissionCenter::at_origin(a, bf * a.magnitude()).unwrap();
        let moved = z.translated(dr, dt);
        let f0 = wavelet(SpacetimePoint::new(r, t), &z, BranchCut::StandardDisk).unwrap();
        let f1 = wavelet(SpacetimePoint::new(r + dr, t + dt), &moved, BranchCut::StandardDisk).unwrap();
        prop_assert!(close(f0, f1, 1e-9), "{} vs {}", f0, f1);
    }
}
