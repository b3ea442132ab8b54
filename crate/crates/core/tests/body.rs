use std::f64::consts::PI;

use affine_wirtinger::body::{random_body_with_shape, BodyKind};
use affine_wirtinger::experiments::{make_body, recentre_body, validate_body, BodyShape, MakeBody};
use affine_wirtinger::sphere::support_hessian;
use affine_wirtinger::{BodyFile, ConvexBody, Error, ScalarField, SphereGrid};
use approx::assert_relative_eq;
use proptest::prelude::*;

#[test]
fn ball_arithmetic() {
    for (dim, res) in [(2, 32), (3, 8)] {
        let g = SphereGrid::new(dim, res).unwrap();
        let b1 = ConvexBody::ball(1.0, &g).unwrap();
        let b2 = ConvexBody::ball(2.0, &g).unwrap();
        let b3 = b1.minkowski_sum(&b2).unwrap();
        assert!(b3.support().values().iter().all(|&v| (v - 3.0).abs() < 1e-15));
        let scaled = b1.scale(2.0).unwrap();
        assert!(scaled.support().values().iter().all(|&v| (v - 2.0).abs() < 1e-15));

        let moved = b1.translate([0.2, -0.1, 0.3]).unwrap();
        assert_relative_eq!(moved.volume(), b1.volume(), max_relative = 1e-12);
        let da = support_hessian(moved.support());
        let db = support_hessian(b1.support());
        for k in 0..g.len() {
            for c in 0..3 {
                assert!((da.at(k)[c] - db.at(k)[c]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn ellipsoid_volumes() {
    let c = SphereGrid::circle(256).unwrap();
    let e = ConvexBody::ellipsoid(&[2.0, 0.7], &c).unwrap();
    assert_relative_eq!(e.volume(), PI * 1.4, max_relative = 1e-12);
    let s = SphereGrid::sphere(32).unwrap();
    let e = ConvexBody::ellipsoid(&[1.3, 0.9, 1.1], &s).unwrap();
    assert_relative_eq!(e.volume(), 4.0 / 3.0 * PI * 1.3 * 0.9 * 1.1, max_relative = 1e-8);
}

#[test]
fn rejects_nonconvex_support() {
    let c = SphereGrid::circle(64).unwrap();
    let bad = ScalarField::from_chart_fn(&c, |t, _| 1.0 + 0.2 * (3.0 * t).cos());
    assert!(matches!(ConvexBody::from_support(bad), Err(Error::NotConvex { .. })));
}

#[test]
fn recentre_moves_steiner_point_to_origin() {
    let g = SphereGrid::sphere(16).unwrap();
    let b = ConvexBody::random(4, 4, 0.1, false, &g).unwrap().translate([0.3, -0.2, 0.25]).unwrap();
    let p = b.recentre().unwrap().steiner_point();
    assert!(p.iter().all(|x| x.abs() < 1e-13), "{p:?}");
    // the Steiner point of a translate moves by the translation
    let q = b.translate([0.1, 0.1, -0.1]).unwrap().steiner_point();
    let p0 = b.steiner_point();
    for (i, d) in [0.1, 0.1, -0.1].iter().enumerate() {
        assert!((q[i] - p0[i] - d).abs() < 1e-13);
    }
}

#[test]
fn body_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (dim, res) in [(2, 64), (3, 12)] {
        let g = SphereGrid::new(dim, res).unwrap();
        let (body, shape) = random_body_with_shape(3, 4, 0.1, false, &g).unwrap();
        for doc in [BodyFile::from_body(&body), BodyFile::from_harmonics(&shape, res)] {
            let path = dir.path().join(format!("{dim}-{:?}.json", doc.kind));
            doc.write(&path).unwrap();
            let back = BodyFile::read(&path).unwrap();
            assert_eq!(back, doc);
            let b = back.to_body(Some(&g)).unwrap();
            let err = b.support().sub(body.support()).unwrap().sup_norm();
            assert!(err < 1e-14, "{:?}: {err:e}", doc.kind);
        }
    }
}

#[test]
fn body_file_schema_is_strict() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    std::fs::write(&path, r#"{"format":1,"dim":2,"kind":"fourier","resolution":16,"data":[1.0],"extra":0}"#).unwrap();
    assert!(matches!(BodyFile::read(&path), Err(Error::BodyFile(_))));

    let doc = BodyFile {
        format: 2,
        dim: 2,
        kind: BodyKind::Fourier,
        resolution: 16,
        data: vec![1.0],
    };
    assert!(doc.to_body(None).is_err());
    let doc = BodyFile { format: 1, kind: BodyKind::Sh, ..doc };
    assert!(doc.to_body(None).is_err());
    let doc = BodyFile { dim: 2, kind: BodyKind::Grid, resolution: 16, data: vec![1.0; 15], ..doc };
    assert!(doc.to_body(None).is_err());
}

#[test]
fn make_validate_recentre() {
    let cfg = MakeBody {
        dim: 3,
        resolution: Some(12),
        shape: BodyShape::Random,
        kind: BodyKind::Sh,
        ..MakeBody::default()
    };
    let doc = make_body(&cfg).unwrap();
    assert_eq!(doc.kind, BodyKind::Sh);
    let report = validate_body(&doc, None).unwrap();
    assert!(report.margin > 0.0);
    let centred = recentre_body(&doc).unwrap();
    assert_eq!(centred.kind, BodyKind::Sh);
    let p = validate_body(&centred, None).unwrap().steiner_point;
    assert!(p.iter().all(|x| x.abs() < 1e-13));

    let ellipsoid_as_coeffs = MakeBody {
        shape: BodyShape::Ellipsoid,
        axes: vec![1.0, 2.0, 1.5],
        ..cfg
    };
    assert!(make_body(&ellipsoid_as_coeffs).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn volume_is_translation_invariant(seed in 0u64..10_000, dim in 2usize..=3,
                                       v in prop::array::uniform3(-1.0f64..1.0)) {
        let g = SphereGrid::new(dim, if dim == 2 { 128 } else { 16 }).unwrap();
        let b = ConvexBody::random(seed, 4, 0.15, false, &g).unwrap();
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-12);
        let r = 0.5 * b.min_support() * norm.min(1.0) / norm;
        let v = [v[0] * r, v[1] * r, v[2] * r];
        let moved = b.translate(v).unwrap();
        prop_assert!((moved.volume() / b.volume() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn volume_scales_homogeneously(seed in 0u64..10_000, dim in 2usize..=3, lambda in 0.2f64..5.0) {
        let g = SphereGrid::new(dim, if dim == 2 { 128 } else { 16 }).unwrap();
        let b = ConvexBody::random(seed, 4, 0.15, false, &g).unwrap();
        let v = b.scale(lambda).unwrap().volume();
        prop_assert!((v / (lambda.powi(dim as i32) * b.volume()) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn support_hessian_is_additive_over_sums(s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let g = SphereGrid::sphere(12).unwrap();
        let a = ConvexBody::random(s1, 4, 0.2, false, &g).unwrap();
        let b = ConvexBody::random(s2, 4, 0.2, false, &g).unwrap();
        let sum = a.minkowski_sum(&b).unwrap();
        let lhs = support_hessian(sum.support());
        let rhs = support_hessian(a.support()).add(&support_hessian(b.support())).unwrap();
        for k in 0..g.len() {
            for c in 0..3 {
                prop_assert!((lhs.at(k)[c] - rhs.at(k)[c]).abs() <= 1e-12);
            }
        }
        prop_assert!(sum.margin() >= a.margin() + b.margin() - 1e-12);
    }

    #[test]
    fn random_bodies_are_convex_and_even_when_asked(seed in 0u64..10_000, dim in 2usize..=3) {
        let g = SphereGrid::new(dim, if dim == 2 { 64 } else { 12 }).unwrap();
        let b = ConvexBody::random(seed, 6, 0.3, true, &g).unwrap();
        prop_assert!(b.margin() > 0.0);
        prop_assert!(b.support().evenness_defect() <= 1e-14);
    }
}
