//! Reproducible experiment runners behind the `affwirt` binary.
//!
//! Each runner validates its config, computes everything in memory and returns
//! an [`Outcome`]. Nothing is written until [`Outcome::write`], so a rejected
//! config or body file never leaves partial output behind.
//!
//! Corpus items are processed in parallel on the current rayon pool; results
//! are collected in corpus order, so outputs do not depend on the thread count.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{identity_terms, AffineData};
use crate::body::{random_body_with_shape, random_harmonics, BodyFile, BodyKind, ConvexBody};
use crate::error::{Error, Result};
use crate::flow::{
    self, phi_cos4, validate_phi, FlowKind, FlowParams, FlowState, Normalization, RunOptions,
};
use crate::harmonics::Harmonics;
use crate::mixed::{minkowski_slack, mixed_curvature_symbol, mixed_volume, symbol_min_eigenvalue};
use crate::sphere::{default_resolution, ScalarField, SphereGrid};
use crate::wirtinger::{equality_witness, proof_chain_check, wirtinger_report, WirtingerRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

const BODY_STREAM: u64 = 1;
const FUNCTION_STREAM: u64 = 2;
const WITNESS_STREAM: u64 = 3;
const PROBE_STREAM: u64 = 4;

/// Result of a run: pass/fail, a one-line summary and the output files.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub message: String,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_TOLERANCE
        }
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Independent sub-seed for item `index` of a named stream.
pub fn sub_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}

fn grid_for(dim: usize, resolution: Option<usize>) -> Result<Arc<SphereGrid>> {
    let res = match resolution {
        Some(r) => r,
        None => default_resolution(dim).map_err(|e| Error::Config(e.to_string()))?,
    };
    SphereGrid::new(dim, res).map_err(|e| Error::Config(e.to_string()))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    require(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"))
}

/// Reads a JSON config, rejecting unknown keys.
pub fn load_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- output

fn csv_bytes<R: Serialize>(schema: &str, rows: &[R]) -> Result<Vec<u8>> {
    let mut out = format!("# schema={schema}/1\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(out)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Two-column whitespace-separated data for plotting.
fn dat_bytes(header: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Vec<u8> {
    let mut s = format!("# {header}\n");
    for (x, y) in points {
        s.push_str(&format!("{x} {y}\n"));
    }
    s.into_bytes()
}

// ---------------------------------------------------------------- corpus

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub bodies: usize,
    /// Highest harmonic degree of the perturbation.
    pub degree: usize,
    /// ε in s = 1 + ε·(normalized random field).
    pub amplitude: f64,
    /// Origin-symmetric bodies (even degrees only).
    pub even: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            bodies: 50,
            degree: 4,
            amplitude: 0.1,
            even: false,
        }
    }
}

impl CorpusConfig {
    fn validate(&self) -> Result<()> {
        require(self.bodies > 0, || "corpus.bodies must be positive".into())?;
        require(self.amplitude >= 0.0 && self.amplitude.is_finite(), || {
            format!("corpus.amplitude must be nonnegative, got {}", self.amplitude)
        })
    }
}

#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub id: String,
    pub shape: Harmonics,
    pub body: ConvexBody,
}

/// Seeded random bodies s = 1 + ε·p with p band-limited.
pub fn random_corpus(cfg: &CorpusConfig, seed: u64, grid: &Arc<SphereGrid>) -> Result<Vec<CorpusItem>> {
    cfg.validate()?;
    (0..cfg.bodies)
        .into_par_iter()
        .map(|i| {
            let s = sub_seed(seed, BODY_STREAM, i as u64);
            let (body, shape) = random_body_with_shape(s, cfg.degree, cfg.amplitude, cfg.even, grid)?;
            Ok(CorpusItem {
                id: format!("body-{i:03}"),
                shape,
                body,
            })
        })
        .collect()
}

/// Random band-limited test function number `j` for corpus item `i`.
pub fn test_function(seed: u64, i: usize, j: usize, dim: usize, degree: usize) -> Result<Harmonics> {
    random_harmonics(sub_seed(seed, FUNCTION_STREAM, (i * 1000 + j) as u64), dim, degree, false, 0)
}

// ---------------------------------------------------------------- identity

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentitySource {
    Random,
    Ball,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityConfig {
    pub dim: usize,
    pub resolution: Option<usize>,
    pub seed: u64,
    pub source: IdentitySource,
    pub corpus: CorpusConfig,
    pub functions: usize,
    pub function_degree: usize,
    /// Bound on sup|residual| / term scale.
    pub tol: f64,
    /// Required ratio of the worst coarse to the worst fine relative residual
    /// for the random corpus (the convergence table).
    pub min_ratio: f64,
    /// Extra bodies; when non-empty these replace the generated corpus.
    pub body_files: Vec<PathBuf>,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            resolution: None,
            seed: 42,
            source: IdentitySource::Random,
            corpus: CorpusConfig::default(),
            functions: 5,
            function_degree: 4,
            tol: 1e-6,
            min_ratio: 10.0,
            body_files: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub body_id: String,
    pub f_id: String,
    pub resolution: usize,
    pub sup_residual: f64,
    pub term_scale: f64,
    pub relative: f64,
    pub coarse_resolution: Option<usize>,
    pub coarse_relative: Option<f64>,
    pub ratio: Option<f64>,
    pub pass: bool,
}

struct IdentityCase {
    id: String,
    fine: ConvexBody,
    coarse: Option<ConvexBody>,
    require_convergence: bool,
}

fn relative_identity_residual(data: &AffineData, f: &ScalarField) -> Result<(f64, f64)> {
    let terms = identity_terms(data, f)?;
    let sup = terms.residual().sup_norm();
    Ok((sup, terms.scale()))
}

/// Curvature identity on a corpus at the target resolution and at half of it.
pub fn verify_identity(cfg: &IdentityConfig) -> Result<Outcome> {
    require(cfg.functions > 0, || "functions must be positive".into())?;
    check_positive("tol", cfg.tol)?;
    let grid = grid_for(cfg.dim, cfg.resolution)?;
    let res = grid.resolution();
    let coarse_grid = SphereGrid::new(cfg.dim, res / 2).ok();

    let cases: Vec<IdentityCase> = if !cfg.body_files.is_empty() {
        cfg.body_files
            .iter()
            .map(|path| {
                let file = BodyFile::read(path)?;
                let fine = file
                    .to_body(Some(&grid))
                    .map_err(|e| Error::BodyFile(format!("{}: {e}", path.display())))?;
                let coarse = match (file.kind, &coarse_grid) {
                    (BodyKind::Fourier | BodyKind::Sh, Some(g)) => file.to_body(Some(g)).ok(),
                    _ => None,
                };
                let id = path.file_stem().map_or_else(
                    || path.display().to_string(),
                    |s| s.to_string_lossy().into_owned(),
                );
                Ok(IdentityCase {
                    id,
                    fine,
                    coarse,
                    require_convergence: false,
                })
            })
            .collect::<Result<_>>()?
    } else {
        match cfg.source {
            IdentitySource::Random => {
                let coarse_grid = coarse_grid.clone().ok_or_else(|| {
                    Error::Config(format!(
                        "resolution {res} cannot be halved for the convergence check"
                    ))
                })?;
                random_corpus(&cfg.corpus, cfg.seed, &grid)?
                    .into_iter()
                    .map(|item| {
                        Ok(IdentityCase {
                            coarse: Some(ConvexBody::from_harmonics(&item.shape, &coarse_grid)?),
                            id: item.id,
                            fine: item.body,
                            require_convergence: true,
                        })
                    })
                    .collect::<Result<_>>()?
            }
            IdentitySource::Ball => {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, BODY_STREAM, 0));
                (0..cfg.corpus.bodies)
                    .map(|i| {
                        let r = rng.gen_range(0.5..2.0);
                        Ok(IdentityCase {
                            id: format!("ball-{i:03}"),
                            fine: ConvexBody::ball(r, &grid)?,
                            coarse: None,
                            require_convergence: false,
                        })
                    })
                    .collect::<Result<_>>()?
            }
        }
    };
    for case in &cases {
        case.fine.require_origin_inside().map_err(|e| Error::BodyFile(format!("{}: {e}", case.id)))?;
    }

    let rows: Vec<Vec<IdentityRow>> = cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let data = AffineData::compute(&case.fine)?;
            let coarse = case.coarse.as_ref().map(AffineData::compute).transpose()?;
            (0..cfg.functions)
                .map(|j| {
                    let h = test_function(cfg.seed, i, j, cfg.dim, cfg.function_degree)?;
                    let (sup, scale) = relative_identity_residual(&data, &h.sample(data.grid())?)?;
                    let relative = sup / scale;
                    let coarse_relative = coarse
                        .as_ref()
                        .map(|c| -> Result<f64> {
                            let (s, sc) = relative_identity_residual(c, &h.sample(c.grid())?)?;
                            Ok(s / sc)
                        })
                        .transpose()?;
                    let ratio = coarse_relative.map(|c| c / relative);
                    Ok(IdentityRow {
                        body_id: case.id.clone(),
                        f_id: format!("f-{j}"),
                        resolution: res,
                        sup_residual: sup,
                        term_scale: scale,
                        relative,
                        coarse_resolution: coarse.as_ref().map(|c| c.grid().resolution()),
                        coarse_relative,
                        ratio,
                        pass: relative <= cfg.tol,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<IdentityRow> = rows.into_iter().flatten().collect();

    let worst = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
    let worst_coarse = rows.iter().filter_map(|r| r.coarse_relative).fold(None, |a: Option<f64>, v| {
        Some(a.map_or(v, |a| a.max(v)))
    });
    // per-case ratios flatten out once both grids reach the roundoff floor, so
    // convergence is judged on the worst case of the corpus
    let convergence_ratio = worst_coarse.map(|c| c / worst);
    let needs_convergence = cases.iter().any(|c| c.require_convergence);
    let converged = !needs_convergence || convergence_ratio.is_some_and(|r| r >= cfg.min_ratio);
    let failures = rows.iter().filter(|r| !r.pass).count();
    let passed = failures == 0 && converged;

    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'a str,
        dim: usize,
        resolution: usize,
        cases: usize,
        failures: usize,
        max_relative_residual: f64,
        max_coarse_relative_residual: Option<f64>,
        convergence_ratio: Option<f64>,
        convergence_required: bool,
        tol: f64,
        required_ratio: f64,
        passed: bool,
    }
    let summary = Summary {
        command: "verify-identity",
        dim: cfg.dim,
        resolution: res,
        cases: rows.len(),
        failures,
        max_relative_residual: worst,
        max_coarse_relative_residual: worst_coarse,
        convergence_ratio,
        convergence_required: needs_convergence,
        tol: cfg.tol,
        required_ratio: cfg.min_ratio,
        passed,
    };
    let mut table = Vec::new();
    if let (Some(c), Some(g)) = (worst_coarse, &coarse_grid) {
        table.push((g.resolution() as f64, c));
    }
    table.push((res as f64, worst));
    Ok(Outcome {
        passed,
        message: format!(
            "verify-identity dim={} cases={} max_rel={worst:e} convergence_ratio={} failures={failures}",
            cfg.dim,
            rows.len(),
            convergence_ratio.map_or("n/a".into(), |r| format!("{r:.1}")),
        ),
        files: vec![
            ("identity.csv".into(), csv_bytes("identity", &rows)?),
            ("identity_summary.json".into(), json_bytes(&summary)?),
            (
                "identity_convergence.dat".into(),
                dat_bytes("resolution max_relative_residual", table),
            ),
        ],
    })
}

// ---------------------------------------------------------------- wirtinger

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WirtingerFamily {
    /// Random band-limited F.
    Random,
    /// F = (c·s + ⟨v, z⟩) K^{-1/(n+1)} with random c, v.
    Equality,
    /// Random F, perturbed equality cases and one exact equality case per body.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WirtingerConfig {
    pub dim: usize,
    pub resolution: Option<usize>,
    pub seed: u64,
    pub family: WirtingerFamily,
    pub corpus: CorpusConfig,
    pub functions: usize,
    pub function_degree: usize,
    /// Size of the random perturbation added to equality cases in the mixed family.
    pub perturbation: f64,
    /// Rows with slack < −tol·scale fail.
    pub tol: f64,
    /// Bound on the proof-chain gap relative to the scale.
    pub chain_tol: f64,
}

impl Default for WirtingerConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            resolution: None,
            seed: 42,
            family: WirtingerFamily::Mixed,
            corpus: CorpusConfig {
                bodies: 40,
                ..CorpusConfig::default()
            },
            functions: 5,
            function_degree: 4,
            perturbation: 0.05,
            tol: 1e-7,
            chain_tol: 1e-6,
        }
    }
}

fn random_witness_params(seed: u64, i: usize, j: usize, dim: usize) -> (f64, [f64; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, WITNESS_STREAM, (i * 1000 + j) as u64));
    let c = rng.gen_range(0.5..2.0);
    let mut v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    if dim == 2 {
        v[2] = 0.0;
    }
    (c, v)
}

/// Wirtinger slack over a corpus of (body, F) pairs.
pub fn wirtinger(cfg: &WirtingerConfig) -> Result<Outcome> {
    require(cfg.functions > 0, || "functions must be positive".into())?;
    check_positive("tol", cfg.tol)?;
    check_positive("chain_tol", cfg.chain_tol)?;
    require(cfg.perturbation >= 0.0, || "perturbation must be nonnegative".into())?;
    let grid = grid_for(cfg.dim, cfg.resolution)?;
    let corpus = random_corpus(&cfg.corpus, cfg.seed, &grid)?;

    struct Pair {
        row: WirtingerRow,
        relative_slack: f64,
        chain: f64,
        expect_equality: bool,
    }
    let pairs: Vec<Vec<Pair>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let data = AffineData::compute(&item.body)?;
            let mut fs: Vec<(String, ScalarField, bool)> = Vec::new();
            let random = |j: usize| test_function(cfg.seed, i, j, cfg.dim, cfg.function_degree)?.sample(&grid);
            let witness = |j: usize| {
                let (c, v) = random_witness_params(cfg.seed, i, j, cfg.dim);
                equality_witness(&data, c, v)
            };
            for j in 0..cfg.functions {
                match cfg.family {
                    WirtingerFamily::Random | WirtingerFamily::Mixed => {
                        fs.push((format!("rand-{j}"), random(j)?, false))
                    }
                    WirtingerFamily::Equality => fs.push((format!("eq-{j}"), witness(j)?, true)),
                }
            }
            if cfg.family == WirtingerFamily::Mixed {
                let w = witness(0)?;
                let scale = cfg.perturbation * w.sup_norm();
                let near = w.lin_comb(1.0, &random(cfg.functions)?, scale)?;
                fs.push(("near-0".into(), near, false));
                fs.push(("eq-0".into(), w, true));
            }
            fs.into_iter()
                .map(|(f_id, f, expect_equality)| {
                    let report = wirtinger_report(&data, &f)?;
                    let chain = proof_chain_check(&data, &f)? / report.scale();
                    Ok(Pair {
                        relative_slack: report.relative_slack(),
                        row: WirtingerRow::new(item.id.clone(), f_id, &report),
                        chain,
                        expect_equality,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<Pair> = pairs.into_iter().flatten().collect();

    let min_rel = pairs.iter().map(|p| p.relative_slack).fold(f64::INFINITY, f64::min);
    let max_chain = pairs.iter().map(|p| p.chain).fold(0.0, f64::max);
    let negative = pairs.iter().filter(|p| p.relative_slack < -cfg.tol).count();
    let equality_rows = pairs.iter().filter(|p| p.expect_equality).count();
    let equality_failures = pairs
        .iter()
        .filter(|p| p.expect_equality && !p.row.equality_flag)
        .count();
    let chain_failures = pairs.iter().filter(|p| p.chain > cfg.chain_tol).count();
    let passed = negative == 0 && equality_failures == 0 && chain_failures == 0;

    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'a str,
        dim: usize,
        resolution: usize,
        pairs: usize,
        min_relative_slack: f64,
        negative_slack_rows: usize,
        equality_rows: usize,
        equality_failures: usize,
        max_relative_chain_gap: f64,
        chain_failures: usize,
        tol: f64,
        passed: bool,
    }
    let summary = Summary {
        command: "wirtinger",
        dim: cfg.dim,
        resolution: grid.resolution(),
        pairs: pairs.len(),
        min_relative_slack: min_rel,
        negative_slack_rows: negative,
        equality_rows,
        equality_failures,
        max_relative_chain_gap: max_chain,
        chain_failures,
        tol: cfg.tol,
        passed,
    };
    let rows: Vec<&WirtingerRow> = pairs.iter().map(|p| &p.row).collect();
    Ok(Outcome {
        passed,
        message: format!(
            "wirtinger dim={} pairs={} min_rel_slack={min_rel:e} equality={}/{} max_chain={max_chain:e}",
            cfg.dim,
            pairs.len(),
            equality_rows - equality_failures,
            equality_rows
        ),
        files: vec![
            ("wirtinger.csv".into(), csv_bytes("wirtinger", &rows)?),
            ("wirtinger_summary.json".into(), json_bytes(&summary)?),
            (
                "wirtinger_slack.dat".into(),
                dat_bytes(
                    "pair relative_slack",
                    pairs.iter().enumerate().map(|(k, p)| (k as f64, p.relative_slack)),
                ),
            ),
        ],
    })
}

// ---------------------------------------------------------------- mixed

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixedConfig {
    pub dim: usize,
    pub resolution: Option<usize>,
    pub seed: u64,
    pub corpus: CorpusConfig,
    /// Random test functions h per body for Minkowski's inequality.
    pub probes: usize,
    /// (R₁, R₂) pairs for the two-ball table.
    pub radii: Vec<[f64; 2]>,
    /// Relative tolerance for the closed forms and the equality witnesses.
    pub tol: f64,
    /// Minkowski slack must be ≥ −minkowski_tol.
    pub minkowski_tol: f64,
}

impl Default for MixedConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            resolution: None,
            seed: 42,
            corpus: CorpusConfig {
                bodies: 20,
                ..CorpusConfig::default()
            },
            probes: 5,
            radii: vec![[1.0, 1.0], [1.0, 2.0], [0.5, 1.5], [2.0, 0.7], [3.0, 0.25]],
            tol: 1e-8,
            minkowski_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedRow {
    pub body_id: String,
    pub volume: f64,
    /// V[s, …, s]
    pub self_mixed_volume: f64,
    /// |V[s, …, s] / (n·Vol) − 1|
    pub self_rel_err: f64,
    /// Smallest Minkowski slack over the random probes (reference bodies = s).
    pub minkowski_slack: f64,
    /// Same with a distinct corpus body as reference (n = 3 only).
    pub cross_minkowski_slack: Option<f64>,
    /// |slack| / scale for h = c·s + ⟨v, z⟩.
    pub witness_rel_slack: f64,
    /// Smallest eigenvalue of the linearized mixed curvature.
    pub symbol_min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallRow {
    pub r1: f64,
    pub r2: f64,
    pub mixed_volume: f64,
    pub closed_form: f64,
    pub rel_err: f64,
}

/// V[B_{R₁}, B_{R₂}, …, B_{R₂}] = |S^{n−1}|·R₁·R₂^{n−1}
pub fn two_ball_mixed_volume(dim: usize, r1: f64, r2: f64) -> f64 {
    crate::sphere::sphere_area(dim) * r1 * r2.powi(dim as i32 - 1)
}

/// Mixed-volume normalization, two-ball closed forms and Minkowski's inequality.
pub fn mixed(cfg: &MixedConfig) -> Result<Outcome> {
    check_positive("tol", cfg.tol)?;
    check_positive("minkowski_tol", cfg.minkowski_tol)?;
    for [a, b] in &cfg.radii {
        check_positive("radius", *a)?;
        check_positive("radius", *b)?;
    }
    let grid = grid_for(cfg.dim, cfg.resolution)?;
    let n = cfg.dim;
    let corpus = random_corpus(&cfg.corpus, cfg.seed, &grid)?;

    let balls: Vec<BallRow> = cfg
        .radii
        .iter()
        .map(|&[r1, r2]| {
            let s1 = ScalarField::constant(&grid, r1);
            let s2 = ScalarField::constant(&grid, r2);
            let rest = vec![&s2; n - 1];
            let value = mixed_volume(&s1, &rest)?;
            let closed_form = two_ball_mixed_volume(n, r1, r2);
            Ok(BallRow {
                r1,
                r2,
                mixed_volume: value,
                closed_form,
                rel_err: (value / closed_form - 1.0).abs(),
            })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<MixedRow> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let body = &item.body;
            let s = body.support();
            let volume = body.volume();
            let rest = vec![s; n - 1];
            let v_self = mixed_volume(s, &rest)?;
            let mut slack = f64::INFINITY;
            let mut cross = None::<f64>;
            let other = &corpus[(i + 1) % corpus.len()].body;
            for k in 0..cfg.probes {
                let h = random_harmonics(
                    sub_seed(cfg.seed, PROBE_STREAM, (i * 1000 + k) as u64),
                    n,
                    cfg.corpus.degree + 1,
                    false,
                    0,
                )?
                .sample(&grid)?;
                slack = slack.min(minkowski_slack(&h, body, &[])?);
                if n == 3 {
                    let c = minkowski_slack(&h, body, &[other])?;
                    cross = Some(cross.map_or(c, |x| x.min(c)));
                }
            }
            let (c, v) = random_witness_params(cfg.seed, i, 0, n);
            let h = s.lin_comb(c, &ScalarField::linear(&grid, v), 1.0)?;
            let mut with_h = vec![&h];
            with_h.extend(vec![s; n - 2]);
            let v_sh = mixed_volume(s, &with_h)?;
            let v_hh = mixed_volume(&h, &with_h)?;
            let w_scale = v_sh * v_sh / v_self + v_hh.abs();
            let w_slack = minkowski_slack(&h, body, &[])?;
            let fixed = vec![s; n - 2];
            let symbol = mixed_curvature_symbol(&grid, &fixed)?;
            Ok(MixedRow {
                body_id: item.id.clone(),
                volume,
                self_mixed_volume: v_self,
                self_rel_err: (v_self / (n as f64 * volume) - 1.0).abs(),
                minkowski_slack: slack,
                cross_minkowski_slack: cross,
                witness_rel_slack: w_slack.abs() / w_scale,
                symbol_min_eigenvalue: symbol_min_eigenvalue(&symbol),
            })
        })
        .collect::<Result<_>>()?;

    let ball_fail = balls.iter().filter(|b| !(b.rel_err <= cfg.tol)).count();
    let body_fail = rows
        .iter()
        .filter(|r| {
            !(r.self_rel_err <= cfg.tol
                && r.minkowski_slack >= -cfg.minkowski_tol
                && r.cross_minkowski_slack.is_none_or(|c| c >= -cfg.minkowski_tol)
                && r.witness_rel_slack <= cfg.tol
                && r.symbol_min_eigenvalue > 0.0)
        })
        .count();
    let passed = ball_fail == 0 && body_fail == 0;
    let min_slack = rows
        .iter()
        .flat_map(|r| std::iter::once(r.minkowski_slack).chain(r.cross_minkowski_slack))
        .fold(f64::INFINITY, f64::min);

    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'a str,
        dim: usize,
        resolution: usize,
        normalization: &'a str,
        bodies: usize,
        max_self_rel_err: f64,
        max_ball_rel_err: f64,
        min_minkowski_slack: f64,
        max_witness_rel_slack: f64,
        min_symbol_eigenvalue: f64,
        failures: usize,
        passed: bool,
    }
    let summary = Summary {
        command: "mixed",
        dim: n,
        resolution: grid.resolution(),
        normalization: crate::mixed::MixedVolumeResult::NORMALIZATION,
        bodies: rows.len(),
        max_self_rel_err: rows.iter().map(|r| r.self_rel_err).fold(0.0, f64::max),
        max_ball_rel_err: balls.iter().map(|b| b.rel_err).fold(0.0, f64::max),
        min_minkowski_slack: min_slack,
        max_witness_rel_slack: rows.iter().map(|r| r.witness_rel_slack).fold(0.0, f64::max),
        min_symbol_eigenvalue: rows
            .iter()
            .map(|r| r.symbol_min_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        failures: ball_fail + body_fail,
        passed,
    };
    Ok(Outcome {
        passed,
        message: format!(
            "mixed dim={n} bodies={} min_minkowski_slack={min_slack:e} failures={}",
            rows.len(),
            ball_fail + body_fail
        ),
        files: vec![
            ("mixed.csv".into(), csv_bytes("mixed", &rows)?),
            ("mixed_balls.csv".into(), csv_bytes("mixed-balls", &balls)?),
            ("mixed_summary.json".into(), json_bytes(&summary)?),
            (
                "mixed_balls.dat".into(),
                dat_bytes(
                    "closed_form mixed_volume",
                    balls.iter().map(|b| (b.closed_form, b.mixed_volume)),
                ),
            ),
        ],
    })
}

// ---------------------------------------------------------------- flow

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowScenario {
    Random,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKindName {
    PCentroAffine,
    WeightedPCentroAffine,
    WeightedAffine,
}

/// A function on the sphere given in a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant(f64),
    /// 1 + ε cos 4θ
    Cos4(f64),
    /// Body-file-like JSON document holding the samples or coefficients.
    File(PathBuf),
}

impl FieldSpec {
    pub fn sample(&self, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
        match self {
            FieldSpec::Constant(c) => Ok(ScalarField::constant(grid, *c)),
            FieldSpec::Cos4(eps) => Ok(phi_cos4(grid, *eps)),
            FieldSpec::File(path) => BodyFile::read(path)?
                .support(Some(grid))
                .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub dim: usize,
    pub resolution: Option<usize>,
    pub seed: u64,
    pub scenario: FlowScenario,
    pub corpus: CorpusConfig,
    /// Initial radius of the ball scenario.
    pub radius: f64,
    pub kind: FlowKindName,
    pub p: f64,
    /// Φ for the weighted p-flow, F for the weighted affine flow.
    pub phi: Option<FieldSpec>,
    /// Ψ for the residual column ‖s^{n+1}/K − Ψ‖.
    pub psi: Option<FieldSpec>,
    /// End time; when absent the run takes exactly `steps` steps.
    pub t_end: Option<f64>,
    pub steps: usize,
    /// Step size; when absent a stability estimate is used.
    pub dt0: Option<f64>,
    /// Rescale to the initial volume after every step.
    pub normalize: bool,
    pub record_every: usize,
    pub max_steps: usize,
    /// Allowed relative ratio decrease per unit time and per step.
    pub tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            resolution: None,
            seed: 42,
            scenario: FlowScenario::Random,
            corpus: CorpusConfig {
                bodies: 20,
                even: true,
                ..CorpusConfig::default()
            },
            radius: 1.0,
            kind: FlowKindName::PCentroAffine,
            p: 1.0,
            phi: None,
            psi: None,
            t_end: None,
            steps: 60,
            dt0: None,
            normalize: true,
            record_every: 1,
            max_steps: 100_000,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSummary {
    pub id: String,
    pub accepted_steps: usize,
    pub t_final: f64,
    /// Smallest relative ratio change per unit time.
    pub min_ratio_delta: f64,
    /// Smallest relative ratio change between consecutive trace rows.
    pub min_ratio_step: f64,
    /// (max − min)/max of the ratio along the trace.
    pub ratio_spread: f64,
    pub max_evenness_defect: f64,
    pub monotone: bool,
    pub stopped_early: Option<String>,
}

fn flow_params(cfg: &FlowConfig, grid: &Arc<SphereGrid>) -> Result<FlowParams> {
    let normalization = if cfg.normalize {
        Normalization::FixedVolume
    } else {
        Normalization::None
    };
    let phi = cfg.phi.as_ref().map(|p| p.sample(grid)).transpose()?;
    let kind = match cfg.kind {
        FlowKindName::PCentroAffine => {
            require(phi.is_none(), || "phi is only used by the weighted flows".into())?;
            FlowKind::PCentroAffine { p: cfg.p }
        }
        FlowKindName::WeightedPCentroAffine => {
            let phi = phi.ok_or_else(|| Error::Config("weighted p-flow needs phi".into()))?;
            validate_phi(&phi).map_err(|e| Error::Config(e.to_string()))?;
            FlowKind::WeightedPCentroAffine { p: cfg.p, phi }
        }
        FlowKindName::WeightedAffine => FlowKind::WeightedAffine {
            weight: phi.unwrap_or_else(|| ScalarField::constant(grid, 1.0)),
        },
    };
    FlowParams::new(kind, normalization).map_err(|e| Error::Config(e.to_string()))
}

fn trace_csv(run: &flow::FlowRun, with_residual: bool) -> Result<Vec<u8>> {
    let mut out = b"# schema=flow-trace/1\n".to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["t", "volume", "ratio", "min_margin", "min_s"];
        if with_residual {
            header.push("residual");
        }
        w.write_record(&header)?;
        for r in &run.trace.rows {
            let mut rec = vec![
                r.t.to_string(),
                r.volume.to_string(),
                r.ratio.to_string(),
                r.min_margin.to_string(),
                r.min_s.to_string(),
            ];
            if with_residual {
                rec.push(r.residual.map_or(String::new(), |x| x.to_string()));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(out)
}

/// Curvature-flow traces and the monotonicity of the p-affine ratio.
pub fn flow(cfg: &FlowConfig) -> Result<Outcome> {
    check_positive("tol", cfg.tol)?;
    check_positive("radius", cfg.radius)?;
    require(cfg.record_every > 0, || "record_every must be positive".into())?;
    require(cfg.steps > 0, || "steps must be positive".into())?;
    if let Some(t) = cfg.t_end {
        check_positive("t_end", t)?;
    }
    if let Some(dt) = cfg.dt0 {
        check_positive("dt0", dt)?;
    }
    let grid = grid_for(cfg.dim, cfg.resolution)?;
    let params = flow_params(cfg, &grid)?;
    let psi = cfg.psi.as_ref().map(|p| p.sample(&grid)).transpose()?;

    let initial: Vec<(String, ConvexBody)> = match cfg.scenario {
        FlowScenario::Ball => vec![("ball".into(), ConvexBody::ball(cfg.radius, &grid)?)],
        FlowScenario::Random => random_corpus(&cfg.corpus, cfg.seed, &grid)?
            .into_iter()
            .map(|c| (c.id, c.body))
            .collect(),
    };
    // the ratio is only claimed monotone for p-flows of origin-symmetric bodies
    let claim = params.p().is_some()
        && (cfg.scenario == FlowScenario::Ball || cfg.corpus.even);
    let states: Vec<FlowState> = initial
        .iter()
        .map(|(id, b)| {
            FlowState::new(b.clone(), params.clone()).map_err(|e| Error::Config(format!("{id}: {e}")))
        })
        .collect::<Result<_>>()?;

    let runs: Vec<flow::FlowRun> = states
        .into_par_iter()
        .map(|state| {
            let dt = match cfg.dt0 {
                Some(dt) => dt,
                None => flow::stable_dt(&state)?,
            };
            let (t_end, max_steps) = match cfg.t_end {
                Some(t) => (t, cfg.max_steps),
                None => (dt * cfg.steps as f64, cfg.steps),
            };
            flow::run(
                state,
                &RunOptions {
                    t_end,
                    dt0: Some(dt),
                    record_every: cfg.record_every,
                    max_steps,
                    psi: psi.clone(),
                },
            )
        })
        .collect::<Result<_>>()?;

    let mut files = Vec::new();
    let mut scenarios = Vec::new();
    for ((id, _), run) in initial.iter().zip(&runs) {
        let ratios: Vec<f64> = run.trace.rows.iter().map(|r| r.ratio).collect();
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let min_step = ratios
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs())
            .fold(f64::INFINITY, f64::min);
        let min_delta = run.trace.min_ratio_delta();
        let monotone = !claim || (run.trace.is_monotone(cfg.tol) && !(min_step < -cfg.tol));
        scenarios.push(ScenarioSummary {
            id: id.clone(),
            accepted_steps: run.accepted_steps,
            t_final: run.final_state.t(),
            min_ratio_delta: min_delta,
            min_ratio_step: min_step,
            ratio_spread: if max.is_finite() { (max - min) / max.abs() } else { f64::NAN },
            max_evenness_defect: run.max_evenness_defect,
            monotone,
            stopped_early: run.stopped_early.clone(),
        });
        files.push((format!("flow_{id}.csv"), trace_csv(run, psi.is_some())?));
        files.push((
            format!("flow_{id}.dat"),
            dat_bytes("t ratio", run.trace.rows.iter().map(|r| (r.t, r.ratio))),
        ));
    }
    let monotone = scenarios.iter().all(|s| s.monotone);
    let min_ratio_delta = scenarios
        .iter()
        .map(|s| s.min_ratio_delta)
        .fold(f64::INFINITY, f64::min);

    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'a str,
        dim: usize,
        resolution: usize,
        kind: FlowKindName,
        p: Option<f64>,
        normalization: Normalization,
        monotonicity_claimed: bool,
        monotone: bool,
        min_ratio_delta: f64,
        scenarios: &'a [ScenarioSummary],
    }
    let summary = Summary {
        command: "flow",
        dim: cfg.dim,
        resolution: grid.resolution(),
        kind: cfg.kind,
        p: params.p(),
        normalization: params.normalization(),
        monotonicity_claimed: claim,
        monotone,
        min_ratio_delta,
        scenarios: &scenarios,
    };
    files.push(("flow_summary.json".into(), json_bytes(&summary)?));
    Ok(Outcome {
        passed: monotone,
        message: format!(
            "flow dim={} scenarios={} min_steps={} monotone={monotone} min_ratio_delta={min_ratio_delta:e}",
            cfg.dim,
            scenarios.len(),
            scenarios.iter().map(|s| s.accepted_steps).min().unwrap_or(0),
        ),
        files,
    })
}

// ---------------------------------------------------------------- body files

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BodyShape {
    Ball,
    Ellipsoid,
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MakeBody {
    pub dim: usize,
    pub resolution: Option<usize>,
    pub seed: u64,
    pub shape: BodyShape,
    pub radius: f64,
    pub axes: Vec<f64>,
    pub degree: usize,
    pub amplitude: f64,
    pub even: bool,
    pub kind: BodyKind,
}

impl Default for MakeBody {
    fn default() -> Self {
        Self {
            dim: 3,
            resolution: None,
            seed: 42,
            shape: BodyShape::Random,
            radius: 1.0,
            axes: Vec::new(),
            degree: 4,
            amplitude: 0.1,
            even: false,
            kind: BodyKind::Grid,
        }
    }
}

/// Builds and validates a body document.
pub fn make_body(cfg: &MakeBody) -> Result<BodyFile> {
    let grid = grid_for(cfg.dim, cfg.resolution)?;
    let (body, shape) = match cfg.shape {
        BodyShape::Ball => {
            check_positive("radius", cfg.radius)?;
            let h = Harmonics::zero(cfg.dim, 0)?.shifted(cfg.radius);
            (ConvexBody::from_harmonics(&h, &grid)?, Some(h))
        }
        BodyShape::Ellipsoid => {
            require(cfg.axes.len() == cfg.dim, || {
                format!("ellipsoid needs {} semi-axes, got {}", cfg.dim, cfg.axes.len())
            })?;
            (ConvexBody::ellipsoid(&cfg.axes, &grid)?, None)
        }
        BodyShape::Random => {
            let (b, h) = random_body_with_shape(cfg.seed, cfg.degree, cfg.amplitude, cfg.even, &grid)?;
            (b, Some(h))
        }
    };
    match (cfg.kind, shape) {
        (BodyKind::Grid, _) => Ok(BodyFile::from_body(&body)),
        (_, None) => Err(Error::Config(
            "ellipsoids are not band-limited; use kind grid".into(),
        )),
        (kind, Some(h)) => {
            let expected = if cfg.dim == 2 { BodyKind::Fourier } else { BodyKind::Sh };
            require(kind == expected, || format!("kind {kind:?} is invalid for dim {}", cfg.dim))?;
            Ok(BodyFile::from_harmonics(&h, grid.resolution()))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BodyReport {
    pub dim: usize,
    pub kind: BodyKind,
    pub resolution: usize,
    pub margin: f64,
    pub max_radius: f64,
    pub min_support: f64,
    pub volume: f64,
    pub steiner_point: [f64; 3],
    pub origin_inside: bool,
}

/// Loads a body document and certifies strict convexity.
pub fn validate_body(file: &BodyFile, resolution: Option<usize>) -> Result<BodyReport> {
    let grid = match (file.kind, resolution) {
        (BodyKind::Fourier | BodyKind::Sh, Some(r)) => Some(SphereGrid::new(file.dim, r)?),
        _ => None,
    };
    let body = file.to_body(grid.as_ref())?;
    Ok(BodyReport {
        dim: body.dim(),
        kind: file.kind,
        resolution: body.grid().resolution(),
        margin: body.margin(),
        max_radius: body.max_radius(),
        min_support: body.min_support(),
        volume: body.volume(),
        steiner_point: body.steiner_point(),
        origin_inside: body.min_support() > 0.0,
    })
}

/// Moves the Steiner point to the origin, keeping the document kind.
pub fn recentre_body(file: &BodyFile) -> Result<BodyFile> {
    let body = file.to_body(None)?;
    let p = body.steiner_point();
    let shift = [-p[0], -p[1], -p[2]];
    let out = match file.kind {
        BodyKind::Grid => BodyFile::from_body(&body.translate(shift)?),
        BodyKind::Fourier => {
            BodyFile::from_harmonics(&Harmonics::Fourier(file.data.clone()).translated(shift), file.resolution)
        }
        BodyKind::Sh => {
            BodyFile::from_harmonics(&Harmonics::Spherical(file.data.clone()).translated(shift), file.resolution)
        }
    };
    out.to_body(None)?;
    Ok(out)
}
