//! Running an experiment in-process and inspecting its outputs, as the
//! `affwirt` binary does.
//!
//! ```bash
//! cargo run --release --example experiment_runner
//! ```

use affine_wirtinger::experiments::{self, CorpusConfig, WirtingerConfig, WirtingerFamily};

fn main() -> affine_wirtinger::Result<()> {
    let cfg = WirtingerConfig {
        dim: 2,
        family: WirtingerFamily::Mixed,
        corpus: CorpusConfig {
            bodies: 4,
            ..CorpusConfig::default()
        },
        functions: 2,
        ..WirtingerConfig::default()
    };
    let outcome = experiments::wirtinger(&cfg)?;
    println!("{}", outcome.message);
    println!("exit code {}", outcome.exit_code());
    for (name, bytes) in &outcome.files {
        println!("--- {name} ({} bytes)", bytes.len());
    }
    let csv = String::from_utf8_lossy(outcome.file("wirtinger.csv").unwrap_or_default());
    for line in csv.lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
