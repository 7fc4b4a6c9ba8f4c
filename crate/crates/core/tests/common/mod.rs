#![allow(dead_code)]

use std::path::PathBuf;

use pace_align::motion::{step_admittance, virtual_force, AdmittanceParams, MotionState};
use pace_align::session::{ControlScheme, Outcome, SessionConfig, SessionLog, TickRecord};
use pace_align::speech::{GraphFile, PhrasingGraph, VertexFile};
use pace_align::trajectory::Trajectory;
use pace_align::Vec3;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn config(name: &str) -> SessionConfig {
    SessionConfig::load(&repo_root().join("configs").join(name)).expect("shipped config loads")
}

pub fn assets(cfg: &SessionConfig) -> (Trajectory, PhrasingGraph) {
    cfg.load_assets().expect("shipped assets load")
}

pub fn graph(vertices: &[(&str, f64)], edges: &[(&str, &str)]) -> PhrasingGraph {
    PhrasingGraph::from_file_data(GraphFile {
        start: vertices[0].0.into(),
        vertices: vertices
            .iter()
            .map(|(id, d)| VertexFile { id: (*id).into(), text: String::new(), duration_s: *d, audio: None })
            .collect(),
        edges: edges.iter().map(|(u, v)| ((*u).into(), (*v).into())).collect(),
        natural_path: None,
    })
    .unwrap()
}

/// Brute-force projection: argmin over `n + 1` uniformly spaced parameters.
pub fn dense_projection(traj: &Trajectory, x: &Vec3, n: usize) -> (f64, f64) {
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=n {
        let d = i as f64 / n as f64;
        let dist = (traj.point_at(d).unwrap() - x).norm();
        if dist < best.1 {
            best = (d, dist);
        }
    }
    best
}

/// Every root-to-terminal path from `v`, as total durations.
pub fn path_durations(g: &PhrasingGraph, v: usize) -> Vec<f64> {
    let here = g.vertex(v).duration_s;
    if g.is_terminal(v) {
        return vec![here];
    }
    g.successors(v)
        .iter()
        .flat_map(|&u| path_durations(g, u).into_iter().map(move |t| t + here))
        .collect()
}

pub fn blank_record(t: f64, x: Vec3, v_ref: Vec3, f_ext: Vec3, p: f64) -> TickRecord {
    TickRecord {
        t,
        x,
        x_dot: v_ref,
        v_ref,
        f_ext,
        d: 0.0,
        p,
        a: 1.0,
        c: 1.0,
        etc_x: 0.0,
        etc_a: 0.0,
        em: 0.0,
        vertex: 0,
        playhead: 0.0,
    }
}

/// Runs the virtual admittance alone at constant pace with the end effector
/// following `v_ref` exactly, and logs what the energy audit needs.
pub fn ideal_tracking_run(
    params: &AdmittanceParams,
    traj: &Trajectory,
    x0: Vec3,
    p: f64,
    dt: f64,
    steps: usize,
    force: impl Fn(usize) -> Vec3,
) -> SessionLog {
    let mut state = MotionState::at_rest(x0);
    state.p = p;
    let mut records = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let f = if k < steps { force(k) } else { Vec3::zeros() };
        let t = k as f64 * dt;
        records.push(blank_record(t, state.x, state.v_ref, f, p));
        if k == steps {
            break;
        }
        state.t = t;
        let vf = virtual_force(params, traj, &state.x);
        state.v_ref = step_admittance(params, &state, &f, &vf.force, dt).unwrap();
        state.x += state.v_ref * dt;
    }
    log_from(records, traj.dims())
}

pub fn log_from(records: Vec<TickRecord>, dims: usize) -> SessionLog {
    SessionLog { scheme: ControlScheme::Ac, dims, vertex_ids: vec!["-".into()], records, outcome: Outcome::default() }
}

/// Explicit Euler trace of the fixed admittance `m v' + b v = f`.
pub fn fixed_trace(m: f64, b: f64, f: f64, dt: f64, steps: usize) -> Vec<f64> {
    let mut v = 0.0;
    let mut out = vec![v];
    for _ in 0..steps {
        v += dt * ((f - b * v) / m);
        out.push(v);
    }
    out
}

/// Linear interpolation of a uniformly sampled trace at time `t`.
pub fn sample_at(trace: &[f64], dt: f64, t: f64) -> f64 {
    let pos = t / dt;
    let i = (pos.floor() as usize).min(trace.len() - 2);
    let w = pos - i as f64;
    trace[i] * (1.0 - w) + trace[i + 1] * w
}

/// Dominant frequency by FFT peak with parabolic interpolation on the log
/// magnitude.
pub fn dominant_frequency(samples: &[f32], sample_rate: u32) -> f64 {
    use rustfft::{num_complex::Complex, FftPlanner};
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
            Complex::new(*s as f64 * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm().max(1e-300).ln()).collect();
    let k = (1..mags.len() - 1).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap();
    let (l, c, r) = (mags[k - 1], mags[k], mags[k + 1]);
    let shift = 0.5 * (l - r) / (l - 2.0 * c + r);
    (k as f64 + shift) * sample_rate as f64 / n as f64
}

/// Minimizes `(p - 1)^2 + (a - 1)^2` over the line `t_x / p = t_a / a` by
/// scanning its unit-speed parameterization in steps of `step`.
pub fn grid_ideal_paces(t_x: f64, t_a: f64, step: f64) -> (f64, f64) {
    let norm = (t_x * t_x + t_a * t_a).sqrt();
    let (ux, ua) = (t_x / norm, t_a / norm);
    let n = (1.5 / step) as usize;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n {
        let lambda = i as f64 * step;
        let (p, a) = (lambda * ux, lambda * ua);
        let cost = (p - 1.0).powi(2) + (a - 1.0).powi(2);
        if cost < best.0 {
            best = (cost, p, a);
        }
    }
    (best.1, best.2)
}
