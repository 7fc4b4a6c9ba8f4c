use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pace_align::ControlScheme;

const CSV_HELP: &str = "\
Session CSV columns, in order (axis columns only for the trajectory's active axes):
  t                     tick time [s]
  x_x x_y x_z           end-effector position [m]
  xdot_x xdot_y xdot_z  end-effector velocity [m/s]
  vref_x vref_y vref_z  admittance reference velocity [m/s]
  fext_x fext_y fext_z  external (user) force [N]
  d                     projection parameter on the trajectory, 0..1
  p                     physical pace
  a                     audio pace
  c                     cooperation, 0..1
  etc_x                 estimated motion time to completion [s]
  etc_a                 estimated speech time to completion [s]
  em                    estimated misalignment etc_a - etc_x [s]
  vertex                id of the phrase being spoken
  playhead              position inside that phrase at base pace [s]

Any config value can be overridden with a dotted flag, e.g. --pacing.k_p 3 or --user.R_max=2000.

Exit codes: 0 ok, 1 runtime error, 2 config error, 3 asset or validation error, 4 session hit the duration cap.";

#[derive(Debug, Parser)]
#[command(name = "pace-align", version, about = "Speech-motion alignment sessions", after_long_help = CSV_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one session and write session.csv and summary.json.
    #[command(after_long_help = CSV_HELP)]
    Run(RunArgs),
    /// Run every scheme over a range of seeds and write a comparison report.
    #[command(after_long_help = CSV_HELP)]
    Compare(CompareArgs),
    /// Check trajectory, phrasing graph or config files.
    Validate(ValidateArgs),
    /// Serve live sessions over a websocket.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Session config (TOML or JSON).
    #[arg(long, default_value = "configs/default.toml")]
    pub config: PathBuf,

    /// Output directory.
    #[arg(long, env = "PACE_ALIGN_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long)]
    pub scheme: Option<ControlScheme>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Also write the spoken path, time-scaled, to speech.wav.
    #[arg(long)]
    pub render_audio: bool,

    /// Replay a control trace recorded by `serve` instead of the configured user.
    #[arg(long, value_name = "TRACE_JSON")]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,

    /// Comma-separated schemes.
    #[arg(long, value_delimiter = ',', default_value = "AC,LC_noAP,LC")]
    pub schemes: Vec<ControlScheme>,

    /// Number of seeds, counted up from the config seed.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,

    /// Run sessions on all cores.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Trajectory, graph or config files. With none, checks the assets of --config.
    pub paths: Vec<PathBuf>,

    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "configs/default.toml")]
    pub config: PathBuf,

    #[arg(long, default_value_t = 8765)]
    pub port: u16,

    /// Bind address.
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,

    /// Per-session logs go here.
    #[arg(long, env = "PACE_ALIGN_OUT", default_value = "out")]
    pub out: PathBuf,

    /// Wall-clock speed-up of the control loop.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
}

/// Remaining argv plus `(key, value)` override pairs.
pub type SplitArgs = (Vec<String>, Vec<(String, String)>);

/// Splits dotted `--a.b value` / `--a.b=value` overrides out of `argv` so
/// the rest can go to clap.
pub fn extract_overrides(argv: Vec<String>) -> Result<SplitArgs, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut overrides = Vec::new();
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--" {
            rest.push(arg);
            rest.extend(it.by_ref());
            break;
        }
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k, Some(v.to_string())),
            None => (flag, None),
        };
        if !key.contains('.') {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| format!("override --{key} needs a value"))?,
        };
        overrides.push((key.to_string(), value));
    }
    Ok((rest, overrides))
}
