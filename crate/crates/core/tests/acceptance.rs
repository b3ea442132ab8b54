//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use affine_wirtinger::affine::classical_affine_curvature_2d;
use affine_wirtinger::body::random_harmonics;
use affine_wirtinger::cli::main_with_args;
use affine_wirtinger::experiments::{
    self, CorpusConfig, FlowConfig, IdentityConfig, MixedConfig, Outcome, WirtingerConfig, WirtingerFamily,
};
use affine_wirtinger::flow::{evolution_check, run, RunOptions};
use affine_wirtinger::{
    wirtinger_report, AffineData, ConvexBody, FlowKind, FlowParams, FlowState, Normalization, ScalarField,
    SphereGrid,
};
use serde_json::Value;

type Check = Result<String, String>;

fn summary(outcome: &Outcome, name: &str) -> Value {
    serde_json::from_slice(outcome.file(name).expect("summary file")).expect("summary json")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or(f64::NAN)
}

fn ensure(cond: bool, msg: String) -> Check {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn identity() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for dim in [2, 3] {
        let start = Instant::now();
        let cfg = IdentityConfig {
            dim,
            corpus: CorpusConfig { bodies: 50, ..CorpusConfig::default() },
            functions: 5,
            tol: 1e-6,
            min_ratio: 10.0,
            ..IdentityConfig::default()
        };
        let out = experiments::verify_identity(&cfg).map_err(|e| e.to_string())?;
        let s = summary(&out, "identity_summary.json");
        let (cases, worst, ratio) = (s["cases"].as_u64().unwrap_or(0), num(&s, "max_relative_residual"), num(&s, "convergence_ratio"));
        let secs = start.elapsed().as_secs_f64();
        let limit = if dim == 2 { 120.0 } else { 600.0 };
        ok &= out.passed && cases >= 250 && worst <= 1e-6 && ratio >= 10.0 && secs <= limit;
        notes.push(format!("dim {dim}: {cases} cases, max rel residual {worst:.1e}, halving ratio {ratio:.0}, {secs:.1}s"));
    }
    ensure(ok, notes.join("; "))
}

fn wirtinger_corpus(dim: usize) -> Result<Value, String> {
    let cfg = WirtingerConfig { dim, family: WirtingerFamily::Mixed, ..WirtingerConfig::default() };
    let out = experiments::wirtinger(&cfg).map_err(|e| e.to_string())?;
    Ok(summary(&out, "wirtinger_summary.json"))
}

fn wirtinger(corpora: &[Value]) -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for s in corpora {
        let dim = s["dim"].as_u64().unwrap_or(0);
        let pairs = s["pairs"].as_u64().unwrap_or(0);
        let min_rel = num(s, "min_relative_slack");
        let eq_rows = s["equality_rows"].as_u64().unwrap_or(0);
        let eq_fail = s["equality_failures"].as_u64().unwrap_or(u64::MAX);
        ok &= pairs >= 200 && min_rel >= -1e-7 && eq_rows > 0 && eq_fail == 0;
        notes.push(format!("dim {dim}: {pairs} pairs, min rel slack {min_rel:.1e}, equality {}/{eq_rows}", eq_rows.saturating_sub(eq_fail)));
    }
    for (dim, value) in [(2, 2.0 * PI), (3, 8.0 * PI)] {
        let g = SphereGrid::with_default_resolution(dim).unwrap();
        let d = AffineData::compute(&ConvexBody::ball(1.0, &g).unwrap()).map_err(|e| e.to_string())?;
        let r = wirtinger_report(&d, &ScalarField::constant(&g, 1.0)).map_err(|e| e.to_string())?;
        let err = ((r.lhs - value).abs()).max((r.mean_term - value).abs()) / value;
        ok &= err <= 1e-8;
        notes.push(format!("unit ball F=1 dim {dim}: lhs {:.10}, mean {:.10}", r.lhs, r.mean_term));
    }
    ensure(ok, notes.join("; "))
}

fn proof_chain(corpora: &[Value]) -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for s in corpora {
        let gap = num(s, "max_relative_chain_gap");
        ok &= gap <= 1e-6 && s["chain_failures"].as_u64() == Some(0);
        notes.push(format!("dim {}: max rel gap {gap:.1e} over {} pairs", s["dim"], s["pairs"]));
    }
    ensure(ok, notes.join("; "))
}

fn mixed() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for dim in [2, 3] {
        let out = experiments::mixed(&MixedConfig { dim, ..MixedConfig::default() }).map_err(|e| e.to_string())?;
        let s = summary(&out, "mixed_summary.json");
        let (selfv, ball, mink, wit) = (
            num(&s, "max_self_rel_err"),
            num(&s, "max_ball_rel_err"),
            num(&s, "min_minkowski_slack"),
            num(&s, "max_witness_rel_slack"),
        );
        ok &= out.passed && selfv <= 1e-8 && ball <= 1e-8 && mink >= -1e-9 && wit <= 1e-8;
        notes.push(format!(
            "dim {dim}: V=nVol {selfv:.1e}, two-ball {ball:.1e}, min Minkowski slack {mink:.2e}, witness {wit:.1e}"
        ));
    }
    ensure(ok, notes.join("; "))
}

fn mean_curvature_oracles() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut ball_err: f64 = 0.0;
    for dim in [2, 3] {
        let g = SphereGrid::with_default_resolution(dim).unwrap();
        let n = dim as f64;
        for r in [0.5f64, 1.0, 1.7, 3.0] {
            let d = AffineData::compute(&ConvexBody::ball(r, &g).unwrap()).map_err(|e| e.to_string())?;
            let exact = (n - 1.0) * r.powf(-2.0 * n / (n + 1.0));
            ball_err = ball_err.max(d.mean_curvature().map(|h| (h / exact - 1.0).abs()).max());
        }
    }
    ok &= ball_err <= 1e-8;
    notes.push(format!("balls {ball_err:.1e}"));

    let g = SphereGrid::sphere(32).unwrap();
    for axes in [[1.2, 1.0, 0.8], [1.3, 0.9, 1.1]] {
        let d = AffineData::compute(&ConvexBody::ellipsoid(&axes, &g).unwrap()).map_err(|e| e.to_string())?;
        let h = d.mean_curvature();
        let variation = (h.max() - h.min()) / h.max();
        ok &= variation <= 1e-6;
        notes.push(format!("ellipsoid {axes:?} variation {variation:.1e}"));
    }

    let g = SphereGrid::with_default_resolution(2).unwrap();
    let mut worst: f64 = 0.0;
    let curves = 25;
    for seed in 0..curves {
        let body = ConvexBody::random(1000 + seed, 4, 0.1, false, &g).map_err(|e| e.to_string())?;
        let h = AffineData::compute(&body).map_err(|e| e.to_string())?.mean_curvature().clone();
        let c = classical_affine_curvature_2d(&body).map_err(|e| e.to_string())?;
        worst = worst.max(h.sub(&c).unwrap().sup_norm() / c.sup_norm());
    }
    ok &= worst <= 1e-6;
    notes.push(format!("classical planar formula on {curves} curves {worst:.1e}"));
    ensure(ok, notes.join("; "))
}

fn richardson() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for dim in [2, 3] {
        let g = SphereGrid::with_default_resolution(dim).unwrap();
        let body = ConvexBody::random(77, 4, 0.1, false, &g).map_err(|e| e.to_string())?;
        let f = random_harmonics(78, dim, 4, false, 0).unwrap().sample(&g).unwrap().scale(0.1);
        let e1 = evolution_check(&body, &f, 1e-2).map_err(|e| e.to_string())?;
        let e2 = evolution_check(&body, &f, 5e-3).map_err(|e| e.to_string())?;
        let ratio = e1 / e2;
        ok &= (3.5..=4.5).contains(&ratio);
        notes.push(format!("dim {dim}: ratio {ratio:.4}"));
    }
    ensure(ok, notes.join("; "))
}

fn flow_monotonicity() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for dim in [2, 3] {
        for p in [1.0, 2.0] {
            let cfg = FlowConfig {
                dim,
                p,
                corpus: CorpusConfig { bodies: 20, even: true, ..CorpusConfig::default() },
                steps: 60,
                tol: 1e-6,
                ..FlowConfig::default()
            };
            let out = experiments::flow(&cfg).map_err(|e| e.to_string())?;
            let s = summary(&out, "flow_summary.json");
            let scen = s["scenarios"].as_array().cloned().unwrap_or_default();
            let min_steps = scen.iter().filter_map(|x| x["accepted_steps"].as_u64()).min().unwrap_or(0);
            let defect = scen.iter().filter_map(|x| x["max_evenness_defect"].as_f64()).fold(0.0, f64::max);
            let delta = num(&s, "min_ratio_delta");
            ok &= out.passed && s["monotone"] == true && scen.len() >= 20 && min_steps >= 50;
            notes.push(format!(
                "dim {dim} p {p}: {} bodies, >= {min_steps} steps, min rel change/time {delta:.1e}, evenness {defect:.0e}",
                scen.len()
            ));
        }
    }
    let g = SphereGrid::with_default_resolution(2).unwrap();
    let params = FlowParams::new(FlowKind::PCentroAffine { p: 1.0 }, Normalization::None).unwrap();
    let state = FlowState::new(ConvexBody::ball(1.0, &g).unwrap(), params).unwrap();
    let out = run(state, &RunOptions { t_end: 0.1, ..RunOptions::default() }).map_err(|e| e.to_string())?;
    let r = out.final_state.body().support().values()[0];
    let exact = (1.0f64 - 4.0 / 3.0 * 0.1).powf(0.75);
    let err = (r / exact - 1.0).abs();
    ok &= err <= 1e-6;
    notes.push(format!("ball R^(4/3) law at t=0.1 rel err {err:.1e}"));
    ensure(ok, notes.join("; "))
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 5] = [
        &["verify-identity", "--dim", "3", "--bodies", "5"],
        &["wirtinger", "--dim", "3", "--bodies", "5"],
        &["mixed", "--dim", "3", "--bodies", "5"],
        &["flow", "--dim", "2", "--bodies", "5"],
        &["flow", "--dim", "3", "--bodies", "2", "--steps", "10", "--p", "2"],
    ];
    let mut files = 0;
    for (i, args) in commands.iter().enumerate() {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let out = tmp.path().join(format!("{i}-{rep}"));
            let mut full = vec!["affwirt"];
            full.extend_from_slice(args);
            full.extend_from_slice(&["--seed", "2024", "--threads", "1", "--out", out.to_str().unwrap()]);
            let code = main_with_args(full);
            if code != 0 {
                return Err(format!("{} exited with {code}", args[0]));
            }
            runs.push(dir_bytes(&out));
        }
        if runs[0] != runs[1] {
            return Err(format!("{} outputs differ between runs", args.join(" ")));
        }
        files += runs[0].len();
    }
    Ok(format!("{} commands, {files} files byte-identical across repeated single-thread runs", commands.len()))
}

fn main() {
    let corpora: Vec<Value> = [2, 3].iter().filter_map(|&d| wirtinger_corpus(d).ok()).collect();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("1 curvature identity", Box::new(identity)),
        ("2 Wirtinger inequality", Box::new(|| if corpora.len() == 2 { wirtinger(&corpora) } else { Err("corpus run failed".into()) })),
        ("3 proof-chain equivalence", Box::new(|| if corpora.len() == 2 { proof_chain(&corpora) } else { Err("corpus run failed".into()) })),
        ("4 mixed volumes", Box::new(mixed)),
        ("5 affine mean curvature oracles", Box::new(mean_curvature_oracles)),
        ("6 curvature evolution", Box::new(richardson)),
        ("7 flow monotonicity", Box::new(flow_monotonicity)),
        ("8 determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {name}: PASS ({msg}) [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({msg}) [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
