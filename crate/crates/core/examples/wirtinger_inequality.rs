//! The affine Wirtinger inequality: slack for random functions, its equality
//! cases, and the mixed-volume identity behind it.
//!
//! ```bash
//! cargo run --example wirtinger_inequality
//! ```

use affine_wirtinger::body::random_harmonics;
use affine_wirtinger::wirtinger::{equality_witness, proof_chain_check, scalar_shift_witness};
use affine_wirtinger::{wirtinger_report, AffineData, ConvexBody, SphereGrid};

fn main() -> affine_wirtinger::Result<()> {
    for (dim, res) in [(2, 256), (3, 32)] {
        let grid = SphereGrid::new(dim, res)?;
        let body = ConvexBody::random(5, 4, 0.1, false, &grid)?;
        let data = AffineData::compute(&body)?;
        println!("dim {dim}:");

        let f = random_harmonics(6, dim, 4, false, 0)?.sample(&grid)?;
        let r = wirtinger_report(&data, &f)?;
        println!(
            "  random F: lhs {:.6} <= {:.6} + {:.6}, slack {:.6}",
            r.lhs, r.mean_term, r.dirichlet_term, r.slack
        );
        println!("  proof chain gap {:.2e}", proof_chain_check(&data, &f)?);

        let w = equality_witness(&data, 1.2, [0.3, -0.1, 0.2])?;
        let r = wirtinger_report(&data, &w)?;
        println!("  F = (1.2 s + <v,z>) K^(-1/(n+1)): relative slack {:.2e}, equality {}", r.relative_slack(), r.equality_flag);

        // a constant shift is not an equality case
        let r = wirtinger_report(&data, &scalar_shift_witness(&data, 1.0, 0.5)?)?;
        println!("  F = (s + 0.5) K^(-1/(n+1)): slack {:.6}", r.slack);
    }
    Ok(())
}
