mod common;

use pace_align::motion::estimate_motion_etc;
use pace_align::session::{
    compute_summary, run_config, ControlScheme, ProfileSpec, Session, SessionConfig, SessionParams, UserModel,
};
use pace_align::MotionState;

fn with(name: &str, scheme: ControlScheme, seed: u64) -> SessionConfig {
    let mut cfg = common::config(name);
    cfg.scheme = scheme;
    cfg.seed = seed;
    cfg
}

fn run(cfg: &SessionConfig) -> pace_align::SessionLog {
    let (traj, graph) = common::assets(cfg);
    run_config(cfg, &traj, &graph).unwrap()
}

#[test]
fn same_seed_gives_identical_csv() {
    let cfg = with("default.toml", ControlScheme::Lc, 7);
    assert_eq!(run(&cfg).to_csv_string(), run(&cfg).to_csv_string());
    let other = with("default.toml", ControlScheme::Lc, 8);
    assert_ne!(run(&cfg).to_csv_string(), run(&other).to_csv_string());
}

#[test]
fn fixed_scheme_keeps_unit_paces() {
    let log = run(&with("default.toml", ControlScheme::Ac, 3));
    assert!(log.records.iter().all(|r| r.p == 1.0 && r.a == 1.0));
}

#[test]
fn logged_misalignment_is_the_etc_difference() {
    for scheme in ControlScheme::ALL {
        let log = run(&with("default.toml", scheme, 1));
        for r in &log.records {
            assert_eq!(r.em, r.etc_a - r.etc_x);
        }
    }
}

#[test]
fn paced_schemes_keep_paces_in_bounds() {
    for scheme in [ControlScheme::Lc, ControlScheme::LcNoAp] {
        let cfg = with("default.toml", scheme, 2);
        let log = run(&cfg);
        for r in &log.records {
            assert!(r.p > cfg.pacing.pace_min && r.p < cfg.pacing.pace_max);
            assert!(r.a > cfg.pacing.pace_min && r.a < cfg.pacing.pace_max);
            assert!((0.0..=1.0).contains(&r.c));
        }
    }
}

#[test]
fn chain_graph_makes_paraphrasing_irrelevant() {
    let cfg = with("default.toml", ControlScheme::Lc, 5);
    let (traj, _) = common::assets(&cfg);
    let chain = common::graph(&[("a", 3.0), ("b", 3.5), ("c", 3.0)], &[("a", "b"), ("b", "c")]);
    let mut paths = Vec::new();
    for scheme in [ControlScheme::Lc, ControlScheme::LcNoAp] {
        let params = SessionParams::from_config(&cfg, scheme).unwrap();
        let user = UserModel::new(&cfg.user, cfg.seed, traj.dims()).unwrap();
        let log = Session::new(params, &traj, &chain, user).run().unwrap();
        paths.push(log.outcome.phrase_path);
    }
    assert_eq!(paths[0], paths[1]);
    assert_eq!(paths[0], ["a", "b", "c"]);
}

#[test]
fn cooperative_paced_session_stays_near_natural_speed() {
    let log = run(&with("cooperative.toml", ControlScheme::Lc, 0));
    let am = log.outcome.actual_misalignment.unwrap();
    assert!(am.abs() < 0.3, "AM {am}");
    assert!(log.records.iter().all(|r| (0.95..=1.05).contains(&r.a)));
    assert!(!log.outcome.cap_hit);
}

#[test]
fn noiseless_fixed_scheme_misalignment_is_duration_gap() {
    let mut cfg = with("cooperative.toml", ControlScheme::Ac, 0);
    cfg.user.noise_std = 0.0;
    let (traj, graph) = common::assets(&cfg);
    let log = run_config(&cfg, &traj, &graph).unwrap();
    let natural: f64 = graph.natural_path().iter().map(|&v| graph.vertex(v).duration_s).sum();
    let audio_end = log.outcome.audio_end_t.unwrap();
    let motion_end = log.outcome.motion_end_t.unwrap();
    assert!((audio_end - natural).abs() < 1e-9);
    assert!((log.outcome.actual_misalignment.unwrap() - (natural - motion_end)).abs() < 1e-12);
    let params = cfg.motion.params().unwrap();
    let predicted = estimate_motion_etc(&params, &traj, &MotionState::at_rest(traj.start())).seconds;
    let dt = params.plant.dt;
    assert!((motion_end - predicted).abs() <= 0.02 * predicted + dt, "{motion_end} vs {predicted}");
}

#[test]
fn completion_is_absorbing() {
    let log = run(&with("default.toml", ControlScheme::Lc, 4));
    let end = log.outcome.motion_end_t.unwrap();
    for r in log.records.iter().filter(|r| r.t >= end) {
        assert_eq!(r.etc_x, 0.0);
    }
    let last = log.records.last().unwrap();
    assert!(last.t + 1e-9 >= log.outcome.audio_end_t.unwrap().max(end) - 0.002);
}

#[test]
fn viscous_user_absorbs_power_on_average() {
    let mut mean_power = Vec::new();
    for seed in 0..8 {
        let log = run(&with("default.toml", ControlScheme::Ac, seed));
        let power: f64 = log.records.iter().map(|r| r.f_ext.dot(&r.x_dot)).sum::<f64>() / log.records.len() as f64;
        mean_power.push(power);
    }
    let avg = mean_power.iter().sum::<f64>() / mean_power.len() as f64;
    assert!(avg <= 0.0, "mean user power {avg} W");
}

#[test]
fn summary_of_one_log_reproduces_it() {
    let log = run(&with("default.toml", ControlScheme::LcNoAp, 6));
    let summary = compute_summary([&log]);
    let s = summary.scheme(ControlScheme::LcNoAp).unwrap();
    assert_eq!(s.sessions, 1);
    let am = log.outcome.actual_misalignment.unwrap();
    assert_eq!(s.am.median, am);
    assert_eq!(s.abs_am.median, am.abs());
    assert!(summary.scheme(ControlScheme::Ac).is_none());
}

#[test]
fn overrides_round_trip() {
    let path = common::repo_root().join("configs/default.toml");
    let cfg = SessionConfig::load_with_overrides(
        &path,
        &[
            ("seed".into(), "42".into()),
            ("scheme".into(), "AC".into()),
            ("pacing.pace_max".into(), "1.3".into()),
            ("user.profile".into(), r#"{"type": "constant", "level": 0.5}"#.into()),
        ],
    )
    .unwrap();
    assert_eq!(cfg.seed, 42);
    assert_eq!(cfg.scheme, ControlScheme::Ac);
    assert_eq!(cfg.pacing.pace_max, 1.3);
    assert_eq!(cfg.user.profile, ProfileSpec::Constant { level: 0.5 });

    let echoed = serde_json::to_string(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("echo.json");
    std::fs::write(&copy, echoed).unwrap();
    assert_eq!(SessionConfig::load(&copy).unwrap(), cfg);

    assert!(SessionConfig::load_with_overrides(&path, &[("pacing.unknown".into(), "1".into())]).is_err());
    assert!(SessionConfig::load_with_overrides(&path, &[("pacing.pace_min".into(), "1.5".into())]).is_err());
}
