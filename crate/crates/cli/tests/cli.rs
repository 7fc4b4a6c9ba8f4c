use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    repo().join("configs").join(name)
}

fn pace_align(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pace-align"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PACE_ALIGN_OUT")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_log_and_echoes_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = config("cooperative.toml");
    let o = pace_align(&["run", "--config", s(&cfg), "--out", s(&out), "--scheme", "AC", "--seed", "7", "--pacing.k_p", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("AM "), "{}", stdout(&o));
    assert!(stdout(&o).contains("peak |EM|"));

    let csv = fs::read_to_string(out.join("session.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, pace_align::session::csv_header(2).join(","));

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["scheme"], "AC");
    assert_eq!(summary["config"]["seed"], 7);
    assert_eq!(summary["config"]["pacing"]["k_p"], 3.0);
    assert!(summary["outcome"]["actual_misalignment"].is_number());
}

#[test]
fn run_uses_env_output_dir_and_renders_audio() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pace-align"))
        .args(["run", "--config", s(&config("cooperative.toml")), "--render-audio"])
        .current_dir(dir.path())
        .env("PACE_ALIGN_OUT", dir.path().join("env_out"))
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let wav = dir.path().join("env_out/speech.wav");
    assert!(fs::metadata(wav).unwrap().len() > 44);
}

#[test]
fn missing_trajectory_is_an_asset_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.toml");
    fs::write(&cfg, "trajectory = \"nowhere.json\"\ngraph = \"nowhere_graph.json\"\nscheme = \"LC\"\n").unwrap();
    let o = pace_align(&["run", "--config", s(&cfg), "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("nowhere.json"), "{}", stderr(&o));
}

#[test]
fn bad_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("cooperative.toml");
    let o = pace_align(&["run", "--config", s(&cfg), "--pacing.no_such_gain", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = pace_align(&["run", "--config", s(&dir.path().join("absent.toml"))], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn duration_cap_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("cooperative.toml");
    let short = dir.path().join("short.toml");
    let text = fs::read_to_string(&cfg).unwrap().replace("seed = 0", "seed = 0\nmax_duration_s = 2.0");
    fs::write(&short, text.replace("../assets", s(&repo().join("assets")))).unwrap();
    let o = pace_align(&["run", "--config", s(&short), "--out", "capped"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(dir.path().join("capped/session.csv").exists());
}

#[test]
fn validate_reports_diamond_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("diamond.json");
    fs::write(
        &graph,
        r#"{"start": "A",
            "vertices": [{"id": "A", "text": "a", "duration_s": 1},
                         {"id": "B", "text": "b", "duration_s": 2},
                         {"id": "C", "text": "c", "duration_s": 5},
                         {"id": "D", "text": "d", "duration_s": 1}],
            "edges": [["A", "B"], ["A", "C"], ["B", "D"], ["C", "D"]]}"#,
    )
    .unwrap();
    let o = pace_align(&["validate", s(&graph)], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("t_min(A) = 4,") && text.contains("t_max(A) = 7,"), "{text}");
}

#[test]
fn validate_rejects_bad_assets() {
    let dir = tempfile::tempdir().unwrap();
    let cyclic = dir.path().join("cyclic.json");
    fs::write(
        &cyclic,
        r#"{"start": "A",
            "vertices": [{"id": "A", "text": "", "duration_s": 1}, {"id": "B", "text": "", "duration_s": 1}],
            "edges": [["A", "B"], ["B", "A"]]}"#,
    )
    .unwrap();
    let o = pace_align(&["validate", s(&cyclic)], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let msg = stdout(&o) + &stderr(&o);
    assert!(msg.contains("cycle") && msg.contains('A') && msg.contains('B'), "{msg}");

    let single = dir.path().join("single.json");
    fs::write(&single, r#"{"dims": 2, "interpolation": "linear", "points": [[0, 0]]}"#).unwrap();
    let o = pace_align(&["validate", s(&single)], dir.path());
    assert_eq!(o.status.code(), Some(3));

    let o = pace_align(&["validate", "--config", s(&config("default.toml"))], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn compare_is_deterministic_and_order_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("default.toml");
    let a = pace_align(&["compare", "--config", s(&cfg), "--out", "a", "--seeds", "2"], dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    let b = pace_align(&["compare", "--config", s(&cfg), "--out", "b", "--seeds", "2", "--parallel"], dir.path());
    assert!(b.status.success(), "{}", stderr(&b));
    for file in ["report.md", "summary.json", "AC_sessions.csv", "LC_samples.csv", "LC_noAP_sessions.csv"] {
        let x = fs::read(dir.path().join("a").join(file)).unwrap();
        let y = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(x == y, "{file} differs");
    }
    let report = fs::read_to_string(dir.path().join("a/report.md")).unwrap();
    assert_eq!(report.lines().filter(|l| l.starts_with("| AC") || l.starts_with("| LC")).count(), 3);
    let sessions = fs::read_to_string(dir.path().join("a/LC_sessions.csv")).unwrap();
    assert_eq!(sessions.lines().count(), 3);
}

#[test]
fn help_documents_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = pace_align(&["run", "--help"], dir.path());
    let text = stdout(&o);
    for col in ["xdot_x", "vref_x", "fext_x", "etc_x", "etc_a", "em", "playhead"] {
        assert!(text.contains(col), "{col} missing from help");
    }
    assert!(text.contains("Exit codes"));
}
