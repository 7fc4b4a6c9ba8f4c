use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use pace_align::session::{compute_summary, run_config, ControlTrace, SchemeSummary, SessionConfig, SessionLog, Summary};
use pace_align::speech::{render_speech, PhrasingGraph, WavFormat};
use pace_align::trajectory::Trajectory;
use pace_align::ControlScheme;
use pace_align_service::{replay_session, ConfigEntry, ConfigRegistry, EngineOptions, Server};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{CompareArgs, RunArgs, ServeArgs, ValidateArgs};
use crate::CliError;

const AUDIO_RATE: u32 = 22050;

fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<SessionConfig, CliError> {
    SessionConfig::load_with_overrides(path, overrides).map_err(CliError::from_core)
}

fn load_assets(cfg: &SessionConfig) -> Result<(Trajectory, PhrasingGraph), CliError> {
    cfg.load_assets().map_err(CliError::from_core)
}

fn create_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(CliError::Runtime)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.into()))?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())).map_err(CliError::Runtime)
}

fn peak_abs_em(log: &SessionLog) -> f64 {
    log.records.iter().map(|r| r.em.abs()).fold(0.0, f64::max)
}

fn describe_am(am: Option<f64>) -> String {
    match am {
        Some(am) if am > 0.0 => format!("{am:+.3} s (motion finished before the audio)"),
        Some(am) if am < 0.0 => format!("{am:+.3} s (audio finished before the motion)"),
        Some(am) => format!("{am:+.3} s"),
        None => "undefined (session did not finish)".into(),
    }
}

pub fn run(args: &RunArgs, mut overrides: Vec<(String, String)>) -> Result<(), CliError> {
    if let Some(scheme) = args.scheme {
        overrides.push(("scheme".into(), scheme.name().into()));
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    let cfg = load_config(&args.common.config, &overrides)?;
    let (traj, graph) = load_assets(&cfg)?;
    let log = match &args.replay {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Asset(format!("{}: {e}", path.display())))?;
            let trace: ControlTrace =
                serde_json::from_str(&text).map_err(|e| CliError::Asset(format!("{}: {e}", path.display())))?;
            replay_session(&cfg, &traj, &graph, &trace)
        }
        None => run_config(&cfg, &traj, &graph),
    }
    .map_err(|e| CliError::Runtime(e.into()))?;

    let out = &args.common.out;
    create_out(out)?;
    log.save_csv(&out.join("session.csv")).map_err(|e| CliError::Runtime(e.into()))?;
    let summary = compute_summary([&log]);
    write_json(
        &out.join("summary.json"),
        &json!({
            "config": cfg,
            "outcome": log.outcome,
            "peak_abs_em": peak_abs_em(&log),
            "summary": summary.scheme(cfg.scheme),
        }),
    )?;
    if args.render_audio {
        let audio = render_speech(&graph, &log.spoken_phrases(), AUDIO_RATE).map_err(|e| CliError::Runtime(e.into()))?;
        audio.write_wav(&out.join("speech.wav"), WavFormat::Pcm16).map_err(|e| CliError::Runtime(e.into()))?;
    }

    println!("scheme {} seed {}", cfg.scheme, cfg.seed);
    println!("AM {}", describe_am(log.outcome.actual_misalignment));
    println!("peak |EM| {:.3} s", peak_abs_em(&log));
    println!("phrases {}", log.outcome.phrase_path.join(" > "));
    println!("wrote {}", out.display());
    if log.outcome.cap_hit {
        return Err(CliError::CapHit(format!("session reached max_duration_s = {} s", cfg.max_duration_s)));
    }
    Ok(())
}

struct Job {
    scheme: ControlScheme,
    seed: u64,
}

pub fn compare(args: &CompareArgs, overrides: Vec<(String, String)>) -> Result<(), CliError> {
    let base = load_config(&args.common.config, &overrides)?;
    let (traj, graph) = load_assets(&base)?;
    let mut schemes = args.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let jobs: Vec<Job> = schemes
        .iter()
        .flat_map(|&scheme| (0..args.seeds).map(move |i| Job { scheme, seed: base.seed + i }))
        .collect();
    let run_job = |job: &Job| {
        let mut cfg = base.clone();
        cfg.scheme = job.scheme;
        cfg.seed = job.seed;
        run_config(&cfg, &traj, &graph)
    };
    // Results keep job order, so outputs do not depend on completion order.
    let results: Vec<_> = if args.parallel { jobs.par_iter().map(run_job).collect() } else { jobs.iter().map(run_job).collect() };
    let logs = results.into_iter().collect::<Result<Vec<_>, _>>().map_err(|e| CliError::Runtime(e.into()))?;

    let out = &args.common.out;
    create_out(out)?;
    for &scheme in &schemes {
        let rows: Vec<(&Job, &SessionLog)> = jobs.iter().zip(&logs).filter(|(j, _)| j.scheme == scheme).collect();
        write_session_table(&out.join(format!("{scheme}_sessions.csv")), &rows)?;
        write_samples(&out.join(format!("{scheme}_samples.csv")), &rows)?;
    }
    let summary = compute_summary(&logs);
    let report = render_report(&base, args.seeds, &summary);
    fs::write(out.join("report.md"), &report).map_err(|e| CliError::Runtime(e.into()))?;
    let sessions: Vec<_> = jobs
        .iter()
        .zip(&logs)
        .map(|(j, l)| json!({"scheme": j.scheme, "seed": j.seed, "outcome": l.outcome}))
        .collect();
    write_json(&out.join("summary.json"), &json!({"config": base, "summary": summary, "sessions": sessions}))?;
    print!("{report}");
    println!("wrote {}", out.display());

    let capped = logs.iter().filter(|l| l.outcome.cap_hit).count();
    if capped > 0 {
        return Err(CliError::CapHit(format!("{capped} session(s) reached max_duration_s")));
    }
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Runtime(e.into()))
}

fn write_session_table(path: &Path, rows: &[(&Job, &SessionLog)]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let fail = |e: csv::Error| CliError::Runtime(e.into());
    w.write_record(["seed", "am", "motion_end_t", "audio_end_t", "cap_hit", "peak_abs_em", "phrase_path"]).map_err(fail)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for (job, log) in rows {
        let o = &log.outcome;
        w.write_record([
            job.seed.to_string(),
            opt(o.actual_misalignment),
            opt(o.motion_end_t),
            opt(o.audio_end_t),
            o.cap_hit.to_string(),
            peak_abs_em(log).to_string(),
            o.phrase_path.join(" "),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.into()))
}

/// Per-tick pace, cooperation and EM samples at 50 Hz for distribution
/// plots.
fn write_samples(path: &Path, rows: &[(&Job, &SessionLog)]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let fail = |e: csv::Error| CliError::Runtime(e.into());
    w.write_record(["seed", "t", "p", "a", "c", "em", "moving", "speaking"]).map_err(fail)?;
    for (job, log) in rows {
        let motion_end = log.outcome.motion_end_t.unwrap_or(f64::INFINITY);
        let audio_end = log.outcome.audio_end_t.unwrap_or(f64::INFINITY);
        for r in log.records.iter().step_by(10) {
            w.write_record([
                job.seed.to_string(),
                r.t.to_string(),
                r.p.to_string(),
                r.a.to_string(),
                r.c.to_string(),
                r.em.to_string(),
                u8::from(r.t < motion_end).to_string(),
                u8::from(r.t < audio_end).to_string(),
            ])
            .map_err(fail)?;
        }
    }
    w.flush().map_err(|e| CliError::Runtime(e.into()))
}

fn render_report(cfg: &SessionConfig, seeds: u64, summary: &Summary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Scheme comparison\n");
    let _ = writeln!(s, "{seeds} seeds from {}, max_duration_s {}.\n", cfg.seed, cfg.max_duration_s);
    let _ = writeln!(
        s,
        "| scheme | sessions | median abs AM [s] | IQR abs AM [s] | median AM [s] | median abs EM [s] | frac abs(a-1)<0.05 | median a | median p | median c | cap hits |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|---|---|");
    for x in &summary.schemes {
        let SchemeSummary { scheme, sessions, cap_hits, am, abs_am, abs_em, a, p, c, frac_a_near_1 } = x;
        let _ = writeln!(
            s,
            "| {scheme} | {sessions} | {:.3} | {:.3} to {:.3} | {:+.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {cap_hits} |",
            abs_am.median, abs_am.q25, abs_am.q75, am.median, abs_em.median, frac_a_near_1, a.median, p.median, c.median
        );
    }
    let _ = writeln!(s, "\nLargest pairwise KS distance between cooperation distributions: {:.3}", summary.cooperation_ks_max);
    s
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let mut paths = args.paths.clone();
    if paths.is_empty() {
        paths.push(args.config.clone().unwrap_or_else(|| PathBuf::from("configs/default.toml")));
    } else if let Some(cfg) = &args.config {
        paths.push(cfg.clone());
    }
    let mut failures = Vec::new();
    for path in &paths {
        match validate_path(path) {
            Ok(report) => print!("{report}"),
            Err(e) => {
                println!("{}: INVALID: {e}", path.display());
                failures.push(e);
            }
        }
    }
    match failures.into_iter().next() {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

fn validate_path(path: &Path) -> Result<String, CliError> {
    let is_config = path.extension().is_some_and(|e| e == "toml");
    if is_config {
        return validate_config(path);
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Asset(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Asset(format!("{}: {e}", path.display())))?;
    if value.get("vertices").is_some() {
        let graph = PhrasingGraph::load(path).map_err(CliError::from_core)?;
        check_graph(&graph).map_err(|e| CliError::Asset(format!("{}: {e}", path.display())))?;
        Ok(graph_report(path, &graph))
    } else if value.get("points").is_some() {
        let traj = Trajectory::load(path).map_err(CliError::from_core)?;
        Ok(trajectory_report(path, &traj))
    } else if value.get("trajectory").is_some() {
        validate_config(path)
    } else {
        Err(CliError::Asset(format!("{}: not a trajectory, phrasing graph or session config", path.display())))
    }
}

fn validate_config(path: &Path) -> Result<String, CliError> {
    let cfg = load_config(path, &[])?;
    let (traj, graph) = load_assets(&cfg)?;
    check_graph(&graph).map_err(|e| CliError::Asset(format!("{}: {e}", cfg.graph.display())))?;
    let mut s = format!("{}: valid config, scheme {}, seed {}\n", path.display(), cfg.scheme, cfg.seed);
    s += &trajectory_report(&cfg.trajectory, &traj);
    s += &graph_report(&cfg.graph, &graph);
    Ok(s)
}

/// Invariants beyond what loading enforces: every vertex reachable from the
/// start and bounds ordered.
fn check_graph(graph: &PhrasingGraph) -> Result<(), String> {
    let mut seen = vec![false; graph.len()];
    let mut stack = vec![graph.start()];
    while let Some(v) = stack.pop() {
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(graph.successors(v));
        }
    }
    let unreachable: Vec<&str> = (0..graph.len()).filter(|&v| !seen[v]).map(|v| graph.vertex(v).id.as_str()).collect();
    if !unreachable.is_empty() {
        return Err(format!("vertices unreachable from the start: {}", unreachable.join(", ")));
    }
    for v in 0..graph.len() {
        if graph.t_min(v) > graph.t_max(v) {
            return Err(format!("t_min > t_max at {}", graph.vertex(v).id));
        }
    }
    Ok(())
}

fn trajectory_report(path: &Path, traj: &Trajectory) -> String {
    format!(
        "{}: valid trajectory, {} axes, {:?} interpolation, {} points, length {:.4} m\n",
        path.display(),
        traj.dims(),
        traj.interpolation(),
        traj.control_points().len(),
        traj.length()
    )
}

/// Seconds rounded to the microsecond without trailing zeros.
fn seconds(v: f64) -> String {
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn graph_report(path: &Path, graph: &PhrasingGraph) -> String {
    let mut s = format!(
        "{}: valid phrasing graph, {} vertices, start {}, natural path {:.3} s\n",
        path.display(),
        graph.len(),
        graph.vertex(graph.start()).id,
        graph.natural_duration()
    );
    for &v in graph.topological_order() {
        let vx = graph.vertex(v);
        let next: Vec<&str> = graph.successors(v).iter().map(|&u| graph.vertex(u).id.as_str()).collect();
        let _ = writeln!(
            s,
            "  {id}: duration {} s, t_min({id}) = {}, t_max({id}) = {}{}",
            seconds(vx.duration_s),
            seconds(graph.t_min(v)),
            seconds(graph.t_max(v)),
            if next.is_empty() { String::from(", terminal") } else { format!(", next {}", next.join(" ")) },
            id = vx.id,
        );
    }
    s
}

pub fn serve(args: &ServeArgs, overrides: Vec<(String, String)>) -> Result<(), CliError> {
    let cfg = load_config(&args.config, &overrides)?;
    let default_id = args.config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "default".into());
    let mut registry = ConfigRegistry::new(default_id.clone(), ConfigEntry::load(cfg).map_err(CliError::from_core)?);
    // Sibling configs can be started by file stem.
    if let Some(dir) = args.config.parent().filter(|d| !d.as_os_str().is_empty()).or(Some(Path::new("."))) {
        for entry in fs::read_dir(dir).into_iter().flatten().flatten() {
            let path = entry.path();
            let Some(stem) = path.file_stem().map(|s| s.to_string_lossy().into_owned()) else { continue };
            if stem == default_id || !path.extension().is_some_and(|e| e == "toml") {
                continue;
            }
            match SessionConfig::load(&path).and_then(ConfigEntry::load) {
                Ok(entry) => registry.insert(stem, entry),
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
    }
    let options = EngineOptions { speed: args.speed, out_dir: Some(args.out.clone()) };
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| CliError::Runtime(e.into()))?;
    runtime.block_on(async {
        let server = Server::bind((args.host.as_str(), args.port), registry, options)
            .await
            .map_err(|e| CliError::Runtime(e.into()))?;
        println!("serving on ws://{}", server.local_addr().map_err(|e| CliError::Runtime(e.into()))?);
        server.run().await.map_err(|e| CliError::Runtime(e.into()))
    })
}
