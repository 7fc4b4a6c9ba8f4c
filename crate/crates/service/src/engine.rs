//! The control thread. It is the only owner of simulation state: network
//! tasks hand it commands through a channel that is drained at tick
//! boundaries, and it publishes frames to a broadcast queue that drops the
//! oldest entries for slow readers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{Receiver, RecvTimeoutError, Sender};
use log::{info, warn};
use pace_align::session::{
    ControlMsg, ControlScheme, ControlTrace, LiveInput, LiveUser, Session, SessionConfig, SessionLog, SessionParams,
};
use pace_align::speech::PhrasingGraph;
use pace_align::trajectory::Trajectory;
use serde_json::json;
use tokio::sync::broadcast;

use crate::protocol::{ServerFrame, Snapshot};
use crate::Error;

pub const SNAPSHOT_HZ: f64 = 30.0;

/// A loaded session config with its assets.
#[derive(Debug, Clone)]
pub struct ConfigEntry {
    pub config: SessionConfig,
    pub trajectory: Arc<Trajectory>,
    pub graph: Arc<PhrasingGraph>,
}

impl ConfigEntry {
    pub fn load(config: SessionConfig) -> pace_align::Result<Self> {
        let (trajectory, graph) = config.load_assets()?;
        Ok(ConfigEntry { config, trajectory: Arc::new(trajectory), graph: Arc::new(graph) })
    }
}

/// Configs a client may start by id. A scheme name (`AC`, `LC_noAP`, `LC`)
/// also works and runs the default config with that scheme.
#[derive(Debug, Clone)]
pub struct ConfigRegistry {
    default_id: String,
    entries: BTreeMap<String, ConfigEntry>,
}

impl ConfigRegistry {
    pub fn new(default_id: impl Into<String>, default: ConfigEntry) -> Self {
        let default_id = default_id.into();
        let mut entries = BTreeMap::new();
        entries.insert(default_id.clone(), default);
        ConfigRegistry { default_id, entries }
    }

    pub fn insert(&mut self, id: impl Into<String>, entry: ConfigEntry) {
        self.entries.insert(id.into(), entry);
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn resolve(&self, id: Option<&str>) -> Result<(String, ConfigEntry), Error> {
        let id = id.unwrap_or(&self.default_id);
        if let Some(entry) = self.entries.get(id) {
            return Ok((id.to_string(), entry.clone()));
        }
        if let Ok(scheme) = id.parse::<ControlScheme>() {
            let mut entry = self.entries[&self.default_id].clone();
            entry.config.scheme = scheme;
            return Ok((format!("{}:{scheme}", self.default_id), entry));
        }
        Err(Error::UnknownConfig(id.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Wall-clock speed-up; 1 runs in real time.
    pub speed: f64,
    /// Where per-session logs go. `None` keeps nothing on disk.
    pub out_dir: Option<PathBuf>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { speed: 1.0, out_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Control(ControlMsg),
    Shutdown,
}

/// Handle to the control thread.
#[derive(Debug)]
pub struct Engine {
    commands: Sender<Command>,
    frames: broadcast::Sender<Arc<str>>,
    join: Option<thread::JoinHandle<()>>,
}

impl Engine {
    pub fn spawn(registry: ConfigRegistry, options: EngineOptions) -> Result<Self, Error> {
        if options.speed.is_nan() || options.speed <= 0.0 {
            return Err(Error::Options("speed must be positive".into()));
        }
        let (commands, rx) = crossbeam_channel::bounded(256);
        let (frames, _) = broadcast::channel(256);
        let worker = Worker { registry, options, commands: rx, frames: frames.clone(), sessions: 0, resistance: 0.0 };
        let join = thread::Builder::new().name("pace-align-control".into()).spawn(move || worker.run())?;
        Ok(Engine { commands, frames, join: Some(join) })
    }

    pub fn commands(&self) -> Sender<Command> {
        self.commands.clone()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Arc<str>> {
        self.frames.subscribe()
    }

    pub fn frames(&self) -> broadcast::Sender<Arc<str>> {
        self.frames.clone()
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        let _ = self.commands.send(Command::Shutdown);
        if let Some(join) = self.join.take() {
            let _ = join.join();
        }
    }
}

struct Worker {
    registry: ConfigRegistry,
    options: EngineOptions,
    commands: Receiver<Command>,
    frames: broadcast::Sender<Arc<str>>,
    sessions: u64,
    resistance: f64,
}

enum Next {
    Idle,
    Start(Option<String>),
    Exit,
}

impl Worker {
    fn publish(&self, frame: &ServerFrame) {
        // No subscribers is fine; frames are only telemetry.
        let _ = self.frames.send(frame.to_json().into());
    }

    fn run(mut self) {
        let mut next = Next::Idle;
        loop {
            next = match next {
                Next::Exit => break,
                Next::Start(id) => self.run_session(id.as_deref()),
                Next::Idle => match self.commands.recv_timeout(Duration::from_millis(200)) {
                    Ok(Command::Control(ControlMsg::Start { config })) => Next::Start(config),
                    Ok(Command::Control(ControlMsg::Reset)) => Next::Idle,
                    Ok(Command::Control(ControlMsg::SetResistance(r))) => {
                        // Held until the next session starts.
                        self.resistance = if r.is_finite() { r.clamp(0.0, 1.0) } else { 0.0 };
                        Next::Idle
                    }
                    Ok(Command::Control(ControlMsg::Push { .. })) => {
                        self.publish(&ServerFrame::error("push ignored: no session running"));
                        Next::Idle
                    }
                    Ok(Command::Shutdown) | Err(RecvTimeoutError::Disconnected) => Next::Exit,
                    Err(RecvTimeoutError::Timeout) => Next::Idle,
                },
            }
        }
    }

    fn run_session(&mut self, id: Option<&str>) -> Next {
        let (config_id, entry) = match self.registry.resolve(id) {
            Ok(found) => found,
            Err(e) => {
                self.publish(&ServerFrame::error(e.to_string()));
                return Next::Idle;
            }
        };
        let cfg = &entry.config;
        let (traj, graph) = (&*entry.trajectory, &*entry.graph);
        let dims = traj.dims();
        let built = SessionParams::from_config(cfg, cfg.scheme)
            .and_then(|params| Ok((params, LiveUser::new(cfg.user.r_max, cfg.user.noise_std, cfg.seed, dims)?)));
        let (params, user) = match built {
            Ok(b) => b,
            Err(e) => {
                self.publish(&ServerFrame::error(e.to_string()));
                return Next::Idle;
            }
        };
        self.sessions += 1;
        let session_id = self.sessions;
        let dt = params.motion.plant.dt;
        let f_max = params.pacing.f_max;
        let mut session = Session::new(params, traj, graph, user);
        if self.resistance > 0.0 {
            session.user_mut().apply(0, 0.0, LiveInput::SetResistance(self.resistance));
        }
        info!("session {session_id} started with config {config_id} ({})", cfg.scheme);
        self.publish(&ServerFrame::started(session_id, &config_id, cfg.scheme.name(), dt, traj, graph));

        let started = Instant::now();
        let period = 1.0 / SNAPSHOT_HZ;
        let mut next_snapshot = 0.0;
        let mut seq = 0;
        let mut next = None;
        loop {
            for cmd in self.commands.try_iter() {
                match cmd {
                    Command::Shutdown => next = Some(Next::Exit),
                    Command::Control(ControlMsg::Reset) => next = Some(Next::Idle),
                    Command::Control(ControlMsg::Start { .. }) => {
                        self.publish(&ServerFrame::error("a session is already running; send reset first"))
                    }
                    Command::Control(msg) => match LiveInput::from_msg(&msg, dims, f_max) {
                        Ok(Some(input)) => {
                            if let LiveInput::SetResistance(r) = input {
                                self.resistance = r;
                            }
                            let (tick, t) = (session.tick(), session.time());
                            session.user_mut().apply(tick, t, input);
                        }
                        Ok(None) => {}
                        Err(e) => self.publish(&ServerFrame::error(e.to_string())),
                    },
                }
            }
            if next.is_some() {
                break;
            }
            match session.step() {
                Ok(true) => {}
                Ok(false) => break,
                Err(e) => {
                    self.publish(&ServerFrame::error(format!("session {session_id} failed: {e}")));
                    next = Some(Next::Idle);
                    break;
                }
            }
            let record = session.records().last().expect("a step logs a record");
            if record.t + 1e-9 >= next_snapshot {
                next_snapshot += period;
                self.publish(&ServerFrame::Snapshot(Snapshot::from_record(session_id, seq, &session, graph, record, dims)));
                seq += 1;
            }
            let due = started + Duration::from_secs_f64(session.time() / self.options.speed);
            if let Some(wait) = due.checked_duration_since(Instant::now()) {
                thread::sleep(wait);
            }
        }

        let trace = session.user().trace().clone();
        let finished = session.is_done();
        let log = session.into_log();
        let log_dir = self.save(session_id, &config_id, cfg, &log, &trace);
        if finished {
            info!("session {session_id} complete: AM {:?}", log.outcome.actual_misalignment);
            self.publish(&ServerFrame::Complete { session: session_id, outcome: log.outcome.clone(), log_dir });
        } else {
            info!("session {session_id} stopped");
            self.publish(&ServerFrame::Stopped { session: session_id, log_dir });
        }
        next.unwrap_or(Next::Idle)
    }

    fn save(&self, session_id: u64, config_id: &str, cfg: &SessionConfig, log: &SessionLog, trace: &ControlTrace) -> Option<String> {
        let out = self.options.out_dir.as_ref()?;
        let dir = out.join(format!("session_{session_id:03}"));
        match write_session(&dir, config_id, cfg, log, trace) {
            Ok(()) => Some(dir.display().to_string()),
            Err(e) => {
                warn!("could not write {}: {e}", dir.display());
                self.publish(&ServerFrame::error(format!("could not write session log: {e}")));
                None
            }
        }
    }
}

/// Writes `session.csv`, `trace.json` and `summary.json` into `dir`.
pub fn write_session(
    dir: &Path,
    config_id: &str,
    cfg: &SessionConfig,
    log: &SessionLog,
    trace: &ControlTrace,
) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    log.save_csv(&dir.join("session.csv"))?;
    std::fs::write(dir.join("trace.json"), serde_json::to_string_pretty(trace)?)?;
    let summary = json!({
        "config_id": config_id,
        "config": cfg,
        "outcome": log.outcome,
    });
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

/// Reruns a recorded live session headlessly.
pub fn replay_session(
    config: &SessionConfig,
    traj: &Trajectory,
    graph: &PhrasingGraph,
    trace: &ControlTrace,
) -> pace_align::Result<SessionLog> {
    let user = LiveUser::replaying(config.user.r_max, config.user.noise_std, config.seed, traj.dims(), trace)?;
    let params = SessionParams::from_config(config, config.scheme)?;
    Session::new(params, traj, graph, user).run()
}
