//! Mixed curvature and mixed volumes of support functions, and Minkowski's
//! quadratic inequality.
//!
//! ```bash
//! cargo run --example mixed_volumes
//! ```

use std::f64::consts::PI;

use affine_wirtinger::body::random_harmonics;
use affine_wirtinger::mixed::{minkowski_slack, mixed_curvature_symbol, mixed_volume, symbol_min_eigenvalue};
use affine_wirtinger::{ConvexBody, ScalarField, SphereGrid};

fn main() -> affine_wirtinger::Result<()> {
    let grid = SphereGrid::sphere(32)?;

    let (r1, r2) = (0.5, 1.5);
    let b1 = ScalarField::constant(&grid, r1);
    let b2 = ScalarField::constant(&grid, r2);
    let v = mixed_volume(&b1, &[&b2, &b2])?;
    println!("V[B(0.5), B(1.5), B(1.5)] = {v:.12}, 4 pi R1 R2^2 = {:.12}", 4.0 * PI * r1 * r2 * r2);

    let body = ConvexBody::random(11, 4, 0.1, false, &grid)?;
    let s = body.support();
    let v_sss = mixed_volume(s, &[s, s])?;
    println!("V[s,s,s] / (3 Vol) = {:.14}", v_sss / (3.0 * body.volume()));

    for seed in 0..3 {
        let h = random_harmonics(100 + seed, 3, 5, false, 0)?.sample(&grid)?;
        println!("Minkowski slack, random h #{seed}: {:.6}", minkowski_slack(&h, &body, &[])?);
    }
    // homotheties and translations are the equality cases
    let witness = s.lin_comb(1.7, &ScalarField::linear(&grid, [0.2, 0.1, -0.3]), 1.0)?;
    println!("Minkowski slack, h = 1.7 s + <v,z>: {:.2e}", minkowski_slack(&witness, &body, &[])?);

    let symbol = mixed_curvature_symbol(&grid, &[s])?;
    println!("smallest eigenvalue of the linearized mixed curvature: {:.4}", symbol_min_eigenvalue(&symbol));
    Ok(())
}
