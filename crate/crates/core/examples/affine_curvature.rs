//! Gauss curvature, affine metric and affine mean curvature from the support
//! function, with the curvature identity as a check.
//!
//! ```bash
//! cargo run --example affine_curvature
//! ```

use affine_wirtinger::affine::{classical_affine_curvature_2d, identity_terms};
use affine_wirtinger::body::random_harmonics;
use affine_wirtinger::{AffineData, ConvexBody, SphereGrid};

fn main() -> affine_wirtinger::Result<()> {
    let sphere = SphereGrid::sphere(32)?;

    // H = 2 (abc)^{-1/2} on every ellipsoid
    let axes = [1.3, 0.9, 1.1];
    let data = AffineData::compute(&ConvexBody::ellipsoid(&axes, &sphere)?)?;
    let h = data.mean_curvature();
    let expect = 2.0 / (axes.iter().product::<f64>()).sqrt();
    println!(
        "ellipsoid H in [{:.12}, {:.12}], closed form {expect:.12}",
        h.min(),
        h.max()
    );

    // the identity holds for every f, not only f = s
    let body = ConvexBody::random(7, 4, 0.1, false, &sphere)?;
    let data = AffineData::compute(&body)?;
    let f = random_harmonics(8, 3, 4, false, 0)?.sample(&sphere)?;
    let terms = identity_terms(&data, &f)?;
    println!(
        "random body: sup|residual| / scale = {:.2e}",
        terms.residual().sup_norm() / terms.scale()
    );

    // planar case: two independent formulas for the affine curvature
    let circle = SphereGrid::circle(256)?;
    let curve = ConvexBody::random(3, 5, 0.1, false, &circle)?;
    let via_identity = AffineData::compute(&curve)?.mean_curvature().clone();
    let classical = classical_affine_curvature_2d(&curve)?;
    println!(
        "planar curve: |H - classical| / |H| = {:.2e}",
        via_identity.sub(&classical)?.sup_norm() / via_identity.sup_norm()
    );
    Ok(())
}
