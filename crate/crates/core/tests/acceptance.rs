//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pace_align::motion::{
    energy_audit, estimate_motion_etc, fixed_admittance_step, step_admittance, step_plant, virtual_force,
    AdmittanceParams, MotionConfig,
};
use pace_align::session::{compute_summary, run_config, ControlScheme, SessionLog};
use pace_align::speech::{select_next_vertex, time_scale, AudioClip, GraphFile, PhrasingGraph, VertexFile, HOP};
use pace_align::trajectory::{Interpolation, Trajectory};
use pace_align::{ideal_paces, MotionState, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, format!("took {:.2} s, limit {:.0} s", took.as_secs_f64(), limit.as_secs_f64()))
}

fn pace_oracle() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let (mut worst_dev, mut worst_res): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let t_x = rng.random_range(0.5..30.0);
        let t_a = rng.random_range(0.5..30.0);
        let (p, a) = ideal_paces(t_x, t_a).map_err(|e| e.to_string())?;
        let (gp, ga) = common::grid_ideal_paces(t_x, t_a, 1e-4);
        worst_dev = worst_dev.max((p - gp).abs()).max((a - ga).abs());
        worst_res = worst_res.max((t_x / p - t_a / a).abs());
    }
    ensure(worst_dev < 1e-3, format!("grid deviation {worst_dev:.2e}"))?;
    ensure(worst_res < 1e-9, format!("constraint residual {worst_res:.2e}"))?;
    within(Duration::from_secs(5), started)?;
    Ok(format!("max deviation {worst_dev:.1e}, max residual {worst_res:.1e}"))
}

fn time_scaling() -> Check {
    let started = Instant::now();
    let (m0, d0, force, dt, horizon) = (160.0, 1600.0, 160.0, 0.002, 5.0);
    let params = AdmittanceParams {
        mass: Vec3::repeat(m0),
        damping: Vec3::repeat(d0),
        stiffness: Vec3::repeat(1.0),
        propell: 0.0,
    };
    let steps = (horizon / dt) as usize;
    let mut report = Vec::new();
    for p in [0.7, 1.0, 1.3] {
        let base = common::fixed_trace(m0, d0, force, dt, (p * horizon / dt) as usize + 2);
        let mut state = MotionState::at_rest(Vec3::zeros());
        state.p = p;
        let f = Vec3::new(force, 0.0, 0.0);
        let mut worst: f64 = 0.0;
        for k in 1..=steps {
            state.v_ref = step_admittance(&params, &state, &f, &Vec3::zeros(), dt).map_err(|e| e.to_string())?;
            let t = k as f64 * dt;
            worst = worst.max((state.v_ref.x - p * common::sample_at(&base, dt, p * t)).abs());
        }
        ensure(worst < 1e-3, format!("p = {p}: deviation {worst:.2e} m/s"))?;
        report.push(format!("p={p}: {worst:.1e}"));
    }
    within(Duration::from_secs(10), started)?;
    Ok(report.join(", "))
}

fn reduction() -> Check {
    let cfg = common::config("cooperative.toml");
    let (traj, _) = common::assets(&cfg);
    let params = MotionConfig::default().params().map_err(|e| e.to_string())?;
    let dt = params.plant.dt;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut paced = MotionState::at_rest(traj.start());
    let mut fixed = paced;
    let mut worst: f64 = 0.0;
    for _ in 0..5000 {
        let f = Vec3::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), 0.0);
        let vf = virtual_force(&params.admittance, &traj, &paced.x);
        paced.v_ref = step_admittance(&params.admittance, &paced, &f, &vf.force, dt).map_err(|e| e.to_string())?;
        step_plant(&params.plant, &mut paced, &f);
        let vf = virtual_force(&params.admittance, &traj, &fixed.x);
        fixed.v_ref = fixed_admittance_step(&params.admittance, &fixed.v_ref, &(f + vf.force), dt);
        step_plant(&params.plant, &mut fixed, &f);
        worst = worst.max((paced.v_ref - fixed.v_ref).amax()).max((paced.x - fixed.x).amax());
    }
    ensure(worst <= 1e-12, format!("deviation {worst:.2e}"))?;
    Ok(format!("max deviation {worst:.1e} over 5000 ticks"))
}

fn passivity() -> Check {
    let traj = Trajectory::new(2, Interpolation::Linear, vec![vec![-1.0, 0.0], vec![1.0, 0.0]])
        .map_err(|e| e.to_string())?;
    let params = AdmittanceParams { propell: 0.0, ..MotionConfig::default().params().unwrap().admittance };
    let dt = 0.002;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let p = rng.random_range(0.61..1.39);
        let hold = rng.random_range(50..400);
        let levels: Vec<Vec3> = (0..40)
            .map(|_| Vec3::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), 0.0))
            .collect();
        let log = common::ideal_tracking_run(&params, &traj, Vec3::zeros(), p, dt, 3000, |k| {
            levels[(k / hold) % levels.len()]
        });
        worst = worst.min(energy_audit(&log, &params, &traj).min_residual);
    }
    ensure(worst >= -1e-4, format!("min residual {worst:.3e} J"))?;
    Ok(format!("min residual {worst:.2e} J over 50 runs"))
}

fn random_dag(rng: &mut ChaCha8Rng) -> PhrasingGraph {
    let n = rng.random_range(1..=12);
    let id = |i: usize| format!("v{i:02}");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.35) {
                edges.push((id(i), id(j)));
            }
        }
    }
    PhrasingGraph::from_file_data(GraphFile {
        start: id(0),
        vertices: (0..n)
            .map(|i| VertexFile { id: id(i), text: String::new(), duration_s: rng.random_range(0.1..5.0), audio: None })
            .collect(),
        edges,
        natural_path: None,
    })
    .unwrap()
}

fn graph_dp() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut selections = 0;
    for k in 0..200 {
        let g = random_dag(&mut rng);
        let bounds: Vec<(f64, f64)> = (0..g.len())
            .map(|v| {
                let all = common::path_durations(&g, v);
                (all.iter().copied().fold(f64::INFINITY, f64::min), all.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            })
            .collect();
        for (v, (lo, hi)) in bounds.iter().enumerate() {
            ensure((g.t_min(v) - lo).abs() < 1e-9 && (g.t_max(v) - hi).abs() < 1e-9, format!("graph {k} vertex {v}: bounds"))?;
        }
        for v in 0..g.len() {
            let t_x = rng.random_range(0.0..40.0);
            let oracle = g
                .successors(v)
                .iter()
                .map(|&u| ((t_x - 0.5 * (bounds[u].0 + bounds[u].1)).abs(), g.vertex(u).id.clone(), u))
                .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
                .map(|m| m.2);
            ensure(select_next_vertex(&g, v, t_x) == oracle, format!("graph {k} vertex {v}: selection"))?;
            selections += 1;
        }
    }
    Ok(format!("200 graphs, {selections} selections"))
}

fn vocoder() -> Check {
    let sr = 22050;
    let clip = AudioClip::tone(440.0, 3.0, 0.5, sr).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for a in [0.7, 1.0, 1.3] {
        let out = time_scale(&clip, a).map_err(|e| e.to_string())?;
        let len_err = out.samples().len() as f64 - clip.samples().len() as f64 / a;
        ensure(len_err.abs() <= HOP as f64, format!("a = {a}: length off by {len_err} samples"))?;
        let f = common::dominant_frequency(out.samples(), sr);
        ensure((f - 440.0).abs() / 440.0 < 0.02, format!("a = {a}: dominant {f:.1} Hz"))?;
        report.push(format!("a={a}: {f:.1} Hz"));
    }
    Ok(report.join(", "))
}

fn run_logs(name: &str, scheme: ControlScheme, seed: u64) -> Result<SessionLog, String> {
    let mut cfg = common::config(name);
    cfg.scheme = scheme;
    cfg.seed = seed;
    let (traj, graph) = common::assets(&cfg);
    run_config(&cfg, &traj, &graph).map_err(|e| e.to_string())
}

fn stress_comparison() -> Check {
    let started = Instant::now();
    let mut logs = Vec::new();
    for scheme in ControlScheme::ALL {
        for seed in 0..20 {
            logs.push(run_logs("default.toml", scheme, seed)?);
        }
    }
    let summary = compute_summary(&logs);
    let get = |s| summary.scheme(s).ok_or_else(|| format!("no {s} sessions"));
    let (ac, noap, lc) = (get(ControlScheme::Ac)?, get(ControlScheme::LcNoAp)?, get(ControlScheme::Lc)?);
    let (m_ac, m_noap, m_lc) = (ac.abs_am.median, noap.abs_am.median, lc.abs_am.median);
    let detail = format!(
        "median |AM| LC {m_lc:.3} < LC_noAP {m_noap:.3} < AC {m_ac:.3} s; near-1 LC {:.3} vs LC_noAP {:.3}; KS {:.3}",
        lc.frac_a_near_1, noap.frac_a_near_1, summary.cooperation_ks_max
    );
    ensure(m_lc < m_noap && m_noap < m_ac, format!("ordering: {detail}"))?;
    ensure(m_lc < 1.0, format!("LC median: {detail}"))?;
    ensure(lc.frac_a_near_1 > noap.frac_a_near_1, format!("concentration: {detail}"))?;
    ensure(summary.cooperation_ks_max < 0.2, format!("cooperation overlap: {detail}"))?;
    within(Duration::from_secs(120), started)?;
    Ok(detail)
}

fn burst_signature() -> Check {
    let log = run_logs("burst.toml", ControlScheme::Lc, 0)?;
    let (start, end) = (3.0, 4.0);
    let recs = &log.records;
    let before: Vec<_> = recs.iter().filter(|r| r.t >= start - 0.5 && r.t < start).collect();
    ensure(!before.is_empty(), "session ended before the burst")?;
    let speed_pre = before.iter().map(|r| r.x_dot.norm()).sum::<f64>() / before.len() as f64;
    let a_pre = before.last().unwrap().a;
    let first = |from: f64, pred: &dyn Fn(&pace_align::TickRecord) -> bool| {
        recs.iter().find(|r| r.t >= from && pred(r)).map(|r| r.t)
    };
    // Without resistance the deadband holds c at its pre-burst value, so the
    // dip starts at the first tick below it; it must also reach 0.95.
    let c_pre = before.last().unwrap().c;
    let t_c = first(start, &|r| r.c < c_pre).ok_or("c never dips")?;
    let c_min = recs.iter().filter(|r| r.t >= start && r.t < end).map(|r| r.c).fold(1.0, f64::min);
    ensure(c_min < 0.95, format!("c only dips to {c_min:.3}"))?;
    let t_v = first(start, &|r| r.x_dot.norm() < 0.9 * speed_pre).ok_or("no slowdown")?;
    let t_a = first(start, &|r| r.a < a_pre - 0.01).ok_or("a never dips")?;
    let t_r = first(t_a.max(end), &|r| r.a >= a_pre - 0.01).ok_or("a never recovers")?;
    let order = format!("c {t_c:.3} s, speed {t_v:.3} s, a dip {t_a:.3} s, a recovery {t_r:.3} s");
    ensure(t_c <= t_v && t_v <= t_a && t_a < t_r, format!("order: {order}"))?;
    let em_out = recs
        .iter()
        .filter(|r| (r.t < start - 1.0 || r.t > end + 1.0) && r.t < log.outcome.motion_end_t.unwrap_or(f64::INFINITY))
        .map(|r| r.em.abs())
        .fold(0.0, f64::max);
    ensure(em_out < 0.5, format!("|EM| {em_out:.3} s outside the burst window"))?;
    Ok(format!("{order}; min c {c_min:.3}; max |EM| outside window {em_out:.3} s"))
}

fn etc_self_consistency() -> Check {
    let cfg = common::config("cooperative.toml");
    let (traj, _) = common::assets(&cfg);
    let log = run_logs("cooperative.toml", ControlScheme::Lc, cfg.seed)?;
    let params = cfg.motion.params().map_err(|e| e.to_string())?;
    let predicted = estimate_motion_etc(&params, &traj, &MotionState::at_rest(traj.start())).seconds;
    let actual = log.outcome.motion_end_t.ok_or("motion did not complete")?;
    let rel = (predicted - actual).abs() / actual;
    ensure(rel < 0.1, format!("t_x(0) {predicted:.3} s vs completion {actual:.3} s"))?;
    Ok(format!("t_x(0) {predicted:.3} s, completion {actual:.3} s ({:.1}%)", 100.0 * rel))
}

fn determinism() -> Check {
    let mut n = 0;
    for name in ["default.toml", "burst.toml", "cooperative.toml"] {
        for scheme in ControlScheme::ALL {
            let a = run_logs(name, scheme, 11)?.to_csv_string();
            let b = run_logs(name, scheme, 11)?.to_csv_string();
            ensure(a == b, format!("{name} {scheme}: CSV differs"))?;
            n += 1;
        }
    }
    Ok(format!("{n} config/scheme pairs byte-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("pace optimization oracle", pace_oracle),
        ("admittance time scaling", time_scaling),
        ("unit pace reduction", reduction),
        ("passivity audit", passivity),
        ("phrasing graph DP", graph_dp),
        ("phase vocoder", vocoder),
        ("stress comparison", stress_comparison),
        ("resistance burst signature", burst_signature),
        ("ETC self-consistency", etc_self_consistency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let result = check();
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name} ({secs:.2} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2} s): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
