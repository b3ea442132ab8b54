//! Command-line front end of the `affwirt` binary.
//!
//! Exit codes: 0 all checks passed, 1 a tolerance check failed, 2 invalid
//! config or input.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::body::{BodyFile, BodyKind};
use crate::error::{Error, Result};
use crate::experiments::{
    self, load_config, BodyShape, FieldSpec, FlowConfig, FlowKindName, FlowScenario,
    IdentityConfig, IdentitySource, MakeBody, MixedConfig, Outcome, WirtingerConfig,
    WirtingerFamily, EXIT_INVALID, EXIT_OK,
};

#[derive(Parser, Debug)]
#[command(name = "affwirt", version, about = "Affine curvature, mixed volumes and Wirtinger checks for smooth convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Ambient dimension.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    dim: Option<u8>,
    /// Points on the circle (dim 2) or bandlimit (dim 3).
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Main tolerance of the command.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "affwirt-out")]
    out: PathBuf,
    /// Worker threads; 1 is the bit-exact reference mode.
    #[arg(long)]
    threads: Option<usize>,
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the curvature identity on a corpus, with a convergence table.
    VerifyIdentity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        source: Option<SourceArg>,
        #[arg(long)]
        bodies: Option<usize>,
        #[arg(long)]
        functions: Option<usize>,
        /// Body file to check instead of the generated corpus (repeatable).
        #[arg(long = "body")]
        body_files: Vec<PathBuf>,
    },
    /// Evaluate the affine Wirtinger inequality on (body, F) pairs.
    Wirtinger {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long)]
        bodies: Option<usize>,
        #[arg(long)]
        functions: Option<usize>,
    },
    /// Mixed-volume tables and Minkowski's inequality.
    Mixed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bodies: Option<usize>,
    },
    /// Run curvature flows and trace the p-affine isoperimetric ratio.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        p: Option<f64>,
        /// Weight 1 + ε cos 4θ.
        #[arg(long, value_name = "EPS")]
        phi_cos4: Option<f64>,
        #[arg(long)]
        bodies: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt0: Option<f64>,
        /// Disable the fixed-volume rescaling.
        #[arg(long)]
        no_normalize: bool,
        #[arg(long)]
        record_every: Option<usize>,
    },
    /// Create, validate or recentre body files.
    Body {
        #[command(subcommand)]
        action: BodyAction,
    },
}

#[derive(Subcommand, Debug)]
enum BodyAction {
    Make {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3), default_value_t = 3)]
        dim: u8,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ShapeArg::Random)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Comma-separated semi-axes.
        #[arg(long, value_delimiter = ',')]
        axes: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 0.1)]
        amplitude: f64,
        #[arg(long)]
        even: bool,
        #[arg(long, value_enum, default_value_t = KindFileArg::Grid)]
        kind: KindFileArg,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Validate {
        file: PathBuf,
        /// Resample coefficient files at this resolution.
        #[arg(long)]
        resolution: Option<usize>,
    },
    Recentre {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SourceArg {
    Random,
    Ball,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Random,
    Equality,
    Mixed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScenarioArg {
    Random,
    Ball,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    PCentroAffine,
    WeightedPCentroAffine,
    WeightedAffine,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ShapeArg {
    Ball,
    Ellipsoid,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindFileArg {
    Grid,
    Fourier,
    Sh,
}

fn base<T: Default + for<'de> serde::Deserialize<'de>>(common: &Common) -> Result<T> {
    match &common.config {
        Some(path) => load_config(path),
        None => Ok(T::default()),
    }
}

macro_rules! apply_common {
    ($cfg:expr, $common:expr) => {{
        if let Some(d) = $common.dim {
            $cfg.dim = d as usize;
        }
        if $common.resolution.is_some() {
            $cfg.resolution = $common.resolution;
        }
        if let Some(s) = $common.seed {
            $cfg.seed = s;
        }
        if let Some(t) = $common.tol {
            $cfg.tol = t;
        }
    }};
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn finish(outcome: Outcome, common: &Common) -> Result<i32> {
    let written = outcome.write(&common.out)?;
    println!("{}", outcome.message);
    for path in written {
        println!("  wrote {}", path.display());
    }
    println!("{}", if outcome.passed { "PASS" } else { "FAIL" });
    Ok(outcome.exit_code())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::VerifyIdentity {
            common,
            source,
            bodies,
            functions,
            body_files,
        } => {
            let mut cfg: IdentityConfig = base(&common)?;
            apply_common!(cfg, common);
            if let Some(s) = source {
                cfg.source = match s {
                    SourceArg::Random => IdentitySource::Random,
                    SourceArg::Ball => IdentitySource::Ball,
                };
            }
            if let Some(b) = bodies {
                cfg.corpus.bodies = b;
            }
            if let Some(f) = functions {
                cfg.functions = f;
            }
            if !body_files.is_empty() {
                cfg.body_files = body_files;
            }
            let outcome = with_threads(common.threads, || experiments::verify_identity(&cfg))??;
            finish(outcome, &common)
        }
        Command::Wirtinger {
            common,
            family,
            bodies,
            functions,
        } => {
            let mut cfg: WirtingerConfig = base(&common)?;
            apply_common!(cfg, common);
            if let Some(f) = family {
                cfg.family = match f {
                    FamilyArg::Random => WirtingerFamily::Random,
                    FamilyArg::Equality => WirtingerFamily::Equality,
                    FamilyArg::Mixed => WirtingerFamily::Mixed,
                };
            }
            if let Some(b) = bodies {
                cfg.corpus.bodies = b;
            }
            if let Some(f) = functions {
                cfg.functions = f;
            }
            let outcome = with_threads(common.threads, || experiments::wirtinger(&cfg))??;
            finish(outcome, &common)
        }
        Command::Mixed { common, bodies } => {
            let mut cfg: MixedConfig = base(&common)?;
            apply_common!(cfg, common);
            if let Some(b) = bodies {
                cfg.corpus.bodies = b;
            }
            let outcome = with_threads(common.threads, || experiments::mixed(&cfg))??;
            finish(outcome, &common)
        }
        Command::Flow {
            common,
            scenario,
            kind,
            p,
            phi_cos4,
            bodies,
            steps,
            t_end,
            dt0,
            no_normalize,
            record_every,
        } => {
            let mut cfg: FlowConfig = base(&common)?;
            apply_common!(cfg, common);
            if let Some(s) = scenario {
                cfg.scenario = match s {
                    ScenarioArg::Random => FlowScenario::Random,
                    ScenarioArg::Ball => FlowScenario::Ball,
                };
            }
            if let Some(k) = kind {
                cfg.kind = match k {
                    KindArg::PCentroAffine => FlowKindName::PCentroAffine,
                    KindArg::WeightedPCentroAffine => FlowKindName::WeightedPCentroAffine,
                    KindArg::WeightedAffine => FlowKindName::WeightedAffine,
                };
            }
            if let Some(p) = p {
                cfg.p = p;
            }
            if let Some(eps) = phi_cos4 {
                cfg.phi = Some(FieldSpec::Cos4(eps));
            }
            if let Some(b) = bodies {
                cfg.corpus.bodies = b;
            }
            if let Some(s) = steps {
                cfg.steps = s;
            }
            if t_end.is_some() {
                cfg.t_end = t_end;
            }
            if dt0.is_some() {
                cfg.dt0 = dt0;
            }
            if no_normalize {
                cfg.normalize = false;
            }
            if let Some(r) = record_every {
                cfg.record_every = r;
            }
            let outcome = with_threads(common.threads, || experiments::flow(&cfg))??;
            finish(outcome, &common)
        }
        Command::Body { action } => body(action),
    }
}

fn emit(file: &BodyFile, out: Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            file.write(&path)?;
            println!("wrote {}", path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(file)?),
    }
    Ok(())
}

fn body(action: BodyAction) -> Result<i32> {
    match action {
        BodyAction::Make {
            dim,
            resolution,
            seed,
            shape,
            radius,
            axes,
            degree,
            amplitude,
            even,
            kind,
            out,
        } => {
            let cfg = MakeBody {
                dim: dim as usize,
                resolution,
                seed,
                shape: match shape {
                    ShapeArg::Ball => BodyShape::Ball,
                    ShapeArg::Ellipsoid => BodyShape::Ellipsoid,
                    ShapeArg::Random => BodyShape::Random,
                },
                radius,
                axes,
                degree,
                amplitude,
                even,
                kind: match kind {
                    KindFileArg::Grid => BodyKind::Grid,
                    KindFileArg::Fourier => BodyKind::Fourier,
                    KindFileArg::Sh => BodyKind::Sh,
                },
            };
            emit(&experiments::make_body(&cfg)?, out)?;
        }
        BodyAction::Validate { file, resolution } => {
            let doc = BodyFile::read(&file)?;
            let report = experiments::validate_body(&doc, resolution)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        BodyAction::Recentre { file, out } => {
            let doc = BodyFile::read(&file)?;
            emit(&experiments::recentre_body(&doc)?, out)?;
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
