//! Finite-difference check of the Gauss-curvature evolution under ∂ₜs = −f.
//! The error should drop by four when dt halves.
//!
//! ```bash
//! cargo run --example evolution_check
//! ```

use affine_wirtinger::body::random_harmonics;
use affine_wirtinger::flow::evolution_check;
use affine_wirtinger::{ConvexBody, SphereGrid};

fn main() -> affine_wirtinger::Result<()> {
    let grid = SphereGrid::sphere(24)?;
    let body = ConvexBody::random(3, 4, 0.1, false, &grid)?;
    let f = random_harmonics(4, 3, 4, false, 0)?.sample(&grid)?.scale(0.1);
    let mut prev: Option<f64> = None;
    for k in 0..4 {
        let dt = 1e-2 / f64::from(1 << k);
        let err = evolution_check(&body, &f, dt)?;
        match prev {
            Some(p) => println!("dt {dt:.2e}: error {err:.3e}, ratio {:.4}", p / err),
            None => println!("dt {dt:.2e}: error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
