use std::f64::consts::PI;

use affine_wirtinger::body::{pullback_circle_field, random_harmonics};
use affine_wirtinger::wirtinger::{
    companion_identities, equality_witness, proof_chain_check, scalar_shift_witness, sphere_density,
};
use affine_wirtinger::{wirtinger_report, AffineData, ConvexBody, Error, ScalarField, SphereGrid};
use proptest::prelude::*;

fn grid(dim: usize) -> std::sync::Arc<SphereGrid> {
    SphereGrid::new(dim, if dim == 2 { 256 } else { 24 }).unwrap()
}

fn data(seed: u64, dim: usize, even: bool) -> AffineData {
    AffineData::compute(&ConvexBody::random(seed, 4, 0.1, even, &grid(dim)).unwrap()).unwrap()
}

#[test]
fn unit_ball_with_constant_function() {
    for (dim, value) in [(2, 2.0 * PI), (3, 8.0 * PI)] {
        let g = grid(dim);
        let d = AffineData::compute(&ConvexBody::ball(1.0, &g).unwrap()).unwrap();
        let r = wirtinger_report(&d, &ScalarField::constant(&g, 1.0)).unwrap();
        assert!((r.lhs / value - 1.0).abs() <= 1e-8);
        assert!((r.mean_term / value - 1.0).abs() <= 1e-8);
        assert!(r.dirichlet_term.abs() <= 1e-12);
        assert!(r.equality_flag);
    }
}

#[test]
fn equality_family() {
    for dim in [2, 3] {
        let d = data(12, dim, false);
        for c in [-1.0, 0.5, 1.0] {
            for v in [[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [0.1, -0.2, 0.15], [0.0, 0.0, -0.3]] {
                let r = wirtinger_report(&d, &equality_witness(&d, c, v).unwrap()).unwrap();
                assert!(r.relative_slack().abs() <= 1e-6, "dim {dim} c {c} v {v:?}: {:e}", r.relative_slack());
                assert!(r.equality_flag);
            }
        }
    }
}

#[test]
fn perturbed_equality_cases_have_positive_slack() {
    for dim in [2, 3] {
        let d = data(13, dim, false);
        let w = equality_witness(&d, 1.0, [0.1, 0.1, 0.0]).unwrap();
        let p = random_harmonics(5, dim, 4, false, 2).unwrap().sample(d.grid()).unwrap();
        let r = wirtinger_report(&d, &w.lin_comb(1.0, &p, 0.05).unwrap()).unwrap();
        assert!(r.slack > 0.0 && !r.equality_flag);
    }
}

#[test]
fn scalar_shift_is_not_an_equality_case() {
    for dim in [2, 3] {
        let d = data(14, dim, false);
        let r = wirtinger_report(&d, &scalar_shift_witness(&d, 1.0, 0.5).unwrap()).unwrap();
        assert!(r.slack > 0.0);
        assert!(!r.equality_flag);
        eprintln!("dim {dim}: relative slack for F = (s + 0.5) K^(-1/(n+1)): {:e}", r.relative_slack());
    }
}

#[test]
fn companion_identities_hold() {
    for dim in [2, 3] {
        let d = data(15, dim, false);
        let f = random_harmonics(16, dim, 4, false, 0).unwrap().sample(d.grid()).unwrap();
        let (mean_gap, vol_gap) = companion_identities(&d, &f).unwrap();
        assert!(mean_gap <= 1e-8 * d.integrate_affine(&f.map(f64::abs)).unwrap());
        assert!(vol_gap <= 1e-8 * dim as f64 * d.body().volume());
    }
}

#[test]
fn odd_function_on_symmetric_body_has_zero_mean() {
    for dim in [2, 3] {
        let d = data(17, dim, true);
        let lin = ScalarField::linear(d.grid(), [0.3, 0.5, -0.2]);
        let big_f = lin.zip_map(d.curvature_root(), |a, r| a / r).unwrap();
        assert!(d.integrate_affine(&big_f).unwrap().abs() <= 1e-12);
        let r = wirtinger_report(&d, &big_f).unwrap();
        assert!(r.mean_term <= 1e-20);
        // F K^{1/(n+1)} recovers the linear function
        assert!(sphere_density(&d, &big_f).unwrap().sub(&lin).unwrap().sup_norm() <= 1e-14);
    }
}

#[test]
fn grid_mismatch_is_rejected() {
    let d = data(1, 2, false);
    let other = SphereGrid::circle(128).unwrap();
    assert!(matches!(wirtinger_report(&d, &ScalarField::constant(&other, 1.0)), Err(Error::GridMismatch)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inequality_holds(seed in 0u64..100_000, fseed in 0u64..100_000, dim in 2usize..=3, even in any::<bool>()) {
        let d = data(seed, dim, even);
        let f = random_harmonics(fseed, dim, 5, false, 0).unwrap().sample(d.grid()).unwrap();
        let r = wirtinger_report(&d, &f).unwrap();
        prop_assert!(r.slack >= -1e-7 * r.scale(), "{r:?}");
        prop_assert!(proof_chain_check(&d, &f).unwrap() <= 1e-6 * r.scale());
    }

    #[test]
    fn slack_is_invariant_under_special_linear_maps(seed in 0u64..100_000, fseed in 0u64..100_000, lambda in 0.5f64..2.0) {
        let g = grid(2);
        let body = ConvexBody::random(seed, 4, 0.1, false, &g).unwrap();
        let f = random_harmonics(fseed, 2, 4, false, 0).unwrap().sample(&g).unwrap();
        let m = [[lambda, 0.0], [0.0, 1.0 / lambda]];
        let image = body.linear_image_2d(m).unwrap();
        let moved = pullback_circle_field(&f, m).unwrap();
        let a = wirtinger_report(&AffineData::compute(&body).unwrap(), &f).unwrap();
        let b = wirtinger_report(&AffineData::compute(&image).unwrap(), &moved).unwrap();
        let scale = a.scale();
        prop_assert!((a.slack - b.slack).abs() <= 1e-6 * scale, "{a:?} vs {b:?}");
        prop_assert!((a.lhs - b.lhs).abs() <= 1e-6 * scale);
        prop_assert!((a.mean_term - b.mean_term).abs() <= 1e-6 * scale);
        prop_assert!((a.dirichlet_term - b.dirichlet_term).abs() <= 1e-6 * scale);
    }
}
