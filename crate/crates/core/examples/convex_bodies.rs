//! Convex bodies as support functions: construction, convexity certificate,
//! volume and Euclidean operations.
//!
//! ```bash
//! cargo run --example convex_bodies
//! ```

use std::f64::consts::PI;

use affine_wirtinger::{ConvexBody, SphereGrid};

fn main() -> affine_wirtinger::Result<()> {
    let circle = SphereGrid::circle(256)?;
    let sphere = SphereGrid::sphere(32)?;

    let e2 = ConvexBody::ellipsoid(&[2.0, 1.0], &circle)?;
    println!("ellipse 2x1: area {:.15} (2pi = {:.15})", e2.volume(), 2.0 * PI);
    let e3 = ConvexBody::ellipsoid(&[1.5, 1.0, 0.5], &sphere)?;
    println!("ellipsoid 1.5x1x0.5: volume {:.15} (pi = {:.15})", e3.volume(), PI);

    let body = ConvexBody::random(42, 4, 0.1, false, &sphere)?;
    println!(
        "random body: margin {:.4}, max radius {:.4}, volume {:.6}",
        body.margin(),
        body.max_radius(),
        body.volume()
    );

    // support functions add under Minkowski sum
    let ball = ConvexBody::ball(0.5, &sphere)?;
    let sum = body.minkowski_sum(&ball)?;
    println!("body + ball(0.5): volume {:.6}, margin {:.4}", sum.volume(), sum.margin());

    let moved = body.translate([0.4, -0.2, 0.1])?;
    let p = moved.steiner_point();
    println!("translated Steiner point ({:.6}, {:.6}, {:.6})", p[0], p[1], p[2]);
    let back = moved.recentre()?;
    let q = back.steiner_point();
    println!("after recentre ({:.1e}, {:.1e}, {:.1e})", q[0], q[1], q[2]);

    // a non-convex "support function" is rejected
    let bad = affine_wirtinger::ScalarField::from_chart_fn(&circle, |t, _| 1.0 + 0.2 * (3.0 * t).cos());
    match ConvexBody::from_support(bad) {
        Ok(_) => println!("unexpectedly convex"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
