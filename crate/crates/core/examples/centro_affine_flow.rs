//! p-centro-affine normal flow of an origin-symmetric body with the p-affine
//! isoperimetric ratio along the way, and the shrinking ball as a closed form.
//!
//! ```bash
//! cargo run --release --example centro_affine_flow
//! ```

use affine_wirtinger::flow::{run, RunOptions};
use affine_wirtinger::{ConvexBody, FlowKind, FlowParams, FlowState, Normalization, SphereGrid};

fn main() -> affine_wirtinger::Result<()> {
    let grid = SphereGrid::circle(256)?;
    let body = ConvexBody::random(21, 4, 0.1, true, &grid)?;
    let params = FlowParams::new(FlowKind::PCentroAffine { p: 1.0 }, Normalization::FixedVolume)?;
    let state = FlowState::new(body, params)?;
    let out = run(
        state,
        &RunOptions {
            t_end: 0.05,
            dt0: None,
            record_every: 50,
            max_steps: 100_000,
            psi: None,
        },
    )?;
    println!("{:>10} {:>12} {:>16}", "t", "volume", "ratio");
    for row in &out.trace.rows {
        println!("{:>10.5} {:>12.8} {:>16.12}", row.t, row.volume, row.ratio);
    }
    println!("accepted steps {}, monotone {}", out.accepted_steps, out.trace.is_monotone(1e-6));

    // unnormalized ball: R^{4/3} = R0^{4/3} - (4/3) t
    let ball = ConvexBody::ball(1.0, &grid)?;
    let params = FlowParams::new(FlowKind::PCentroAffine { p: 1.0 }, Normalization::None)?;
    let out = run(
        FlowState::new(ball, params)?,
        &RunOptions {
            t_end: 0.1,
            dt0: None,
            record_every: 1000,
            max_steps: 100_000,
            psi: None,
        },
    )?;
    let r = out.final_state.body().support().values()[0];
    let exact = (1.0f64 - 4.0 / 3.0 * 0.1).powf(0.75);
    println!("ball radius at t=0.1: {r:.15}, closed form {exact:.15}");
    Ok(())
}
