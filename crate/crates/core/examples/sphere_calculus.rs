//! Spectral calculus on the sphere grid: derivatives, the Laplacian and
//! quadrature.
//!
//! ```bash
//! cargo run --example sphere_calculus
//! ```

use affine_wirtinger::harmonics::real_harmonic;
use affine_wirtinger::sphere::{integrate, laplacian, sphere_gradient, support_hessian};
use affine_wirtinger::{ScalarField, SphereGrid};

fn main() -> affine_wirtinger::Result<()> {
    let grid = SphereGrid::sphere(16)?;
    println!("{} colatitudes x {} longitudes", grid.nlat(), grid.nlon());

    // ∫ cos²θ = 4π/3
    let c2 = ScalarField::from_fn(&grid, |z| z[2] * z[2]);
    println!("int cos^2  = {:.15}  (4pi/3 = {:.15})", integrate(&c2), 4.0 * std::f64::consts::PI / 3.0);

    // spherical harmonics are Laplacian eigenfunctions
    for (l, m) in [(1, 0), (3, -2), (7, 5)] {
        let y = ScalarField::from_chart_fn(&grid, |t, p| real_harmonic(l, m, t, p));
        let ly = laplacian(&y);
        let err = ly.lin_comb(1.0, &y, (l * (l + 1)) as f64)?.sup_norm();
        println!("l={l} m={m:>2}: |Lap Y + l(l+1) Y| = {err:.2e}");
    }

    // gradient of cos θ is (−sin θ, 0) in chart components
    let g = sphere_gradient(&ScalarField::from_fn(&grid, |z| z[2]));
    let k = grid.len() / 3;
    let (theta, _) = grid.chart(k);
    println!("d_theta cos(theta) at node {k}: {:.15} vs {:.15}", g.at(k)[0], -theta.sin());

    // A[f] vanishes on linear functions (support functions of points)
    let lin = ScalarField::linear(&grid, [0.3, -1.0, 0.5]);
    let a = support_hessian(&lin);
    let worst = a.components().iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("max |A[<v,z>]| = {worst:.2e}");
    Ok(())
}
