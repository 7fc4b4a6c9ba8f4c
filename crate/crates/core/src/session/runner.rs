use super::config::{ControlScheme, SessionConfig};
use super::log::{Outcome, SessionLog, TickRecord};
use super::user::{ForceSource, UserModel};
use crate::error::Result;
use crate::motion::{
    estimate_motion_etc, is_complete, step_admittance, step_plant, virtual_force, MotionParams, MotionState,
};
use crate::pacing::{ideal_paces, update_cooperation, update_paces, PacingParams, PacingState};
use crate::speech::{advance_playhead, estimate_audio_etc, PathPolicy, PhrasingGraph, SpeechState};
use crate::trajectory::Trajectory;

/// Parameters shared by every tick of a session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionParams {
    pub scheme: ControlScheme,
    pub motion: MotionParams,
    pub pacing: PacingParams,
    pub max_duration_s: f64,
}

impl SessionParams {
    pub fn from_config(config: &SessionConfig, scheme: ControlScheme) -> Result<Self> {
        config.validate()?;
        Ok(SessionParams {
            scheme,
            motion: config.motion.params()?,
            pacing: config.pacing,
            max_duration_s: config.max_duration_s,
        })
    }

    pub fn policy(&self) -> PathPolicy {
        match self.scheme {
            ControlScheme::Lc => PathPolicy::Adaptive,
            ControlScheme::Ac | ControlScheme::LcNoAp => PathPolicy::Natural,
        }
    }
}

/// Whether the last pace update hit a bound.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClampFlags {
    pub p: bool,
    pub a: bool,
}

/// One running session. Each [`Session::step`] advances the loop by `dt`.
pub struct Session<'a, U: ForceSource> {
    params: SessionParams,
    policy: PathPolicy,
    traj: &'a Trajectory,
    graph: &'a PhrasingGraph,
    user: U,
    motion: MotionState,
    pacing: PacingState,
    speech: SpeechState,
    tick: u64,
    etc_every: u64,
    etc_x: f64,
    etc_x_held: f64,
    etc_phase: f64,
    clamps: ClampFlags,
    records: Vec<TickRecord>,
    outcome: Outcome,
    done: bool,
}

impl<'a, U: ForceSource> Session<'a, U> {
    pub fn new(params: SessionParams, traj: &'a Trajectory, graph: &'a PhrasingGraph, user: U) -> Self {
        let dt = params.motion.plant.dt;
        let etc_every = ((1.0 / (params.motion.etc_rate_hz * dt)).round() as u64).max(1);
        let capacity = (params.max_duration_s / dt).min(1e6) as usize + 1;
        Session {
            params,
            policy: params.policy(),
            traj,
            graph,
            user,
            motion: MotionState::at_rest(traj.start()),
            pacing: PacingState::default(),
            speech: SpeechState::new(graph),
            tick: 0,
            etc_every,
            etc_x: 0.0,
            etc_x_held: 0.0,
            etc_phase: 0.0,
            clamps: ClampFlags::default(),
            records: Vec::with_capacity(capacity),
            outcome: Outcome::default(),
            done: false,
        }
    }

    pub fn params(&self) -> &SessionParams {
        &self.params
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.params.motion.plant.dt
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn motion(&self) -> &MotionState {
        &self.motion
    }

    pub fn speech(&self) -> &SpeechState {
        &self.speech
    }

    pub fn pacing(&self) -> &PacingState {
        &self.pacing
    }

    pub fn clamps(&self) -> ClampFlags {
        self.clamps
    }

    pub fn records(&self) -> &[TickRecord] {
        &self.records
    }

    pub fn outcome(&self) -> &Outcome {
        &self.outcome
    }

    pub fn user(&self) -> &U {
        &self.user
    }

    pub fn user_mut(&mut self) -> &mut U {
        &mut self.user
    }

    /// Runs one tick. Returns `false` once the session has ended.
    pub fn step(&mut self) -> Result<bool> {
        if self.done {
            return Ok(false);
        }
        let dt = self.params.motion.plant.dt;
        let t = self.time();
        self.motion.t = t;

        let projection = self.traj.project(&self.motion.x);
        self.motion.d = projection.d;
        if !self.motion.completed && is_complete(&self.params.motion.completion, &projection) {
            self.motion.completed = true;
            self.outcome.motion_end_t = Some(t);
        }
        if self.motion.completed && self.speech.finished {
            self.finish_outcome(false);
            return Ok(false);
        }
        if t >= self.params.max_duration_s - 0.5 * dt {
            self.finish_outcome(true);
            return Ok(false);
        }

        let f_ext = self.user.force(self.tick, t, &self.motion);
        let c = update_cooperation(&self.params.pacing, &mut self.pacing, &f_ext, dt);

        // The simulation runs at the estimator rate; between runs the held
        // estimate is aged by the paced time elapsed since it was taken.
        if self.motion.completed {
            self.etc_x = 0.0;
        } else {
            if self.tick.is_multiple_of(self.etc_every) {
                self.etc_x_held = estimate_motion_etc(&self.params.motion, self.traj, &self.motion).seconds;
                self.etc_phase = self.motion.phase;
            }
            self.etc_x = (self.etc_x_held - (self.motion.phase - self.etc_phase)).max(0.0);
        }
        let etc_a = estimate_audio_etc(self.graph, &self.speech, self.policy, self.etc_x);

        if self.params.scheme.paced() {
            let (p_star, a_star) = if self.etc_x > 0.0 && etc_a > 0.0 {
                ideal_paces(self.etc_x, etc_a)?
            } else {
                (1.0, 1.0)
            };
            let update = update_paces(&self.params.pacing, &mut self.pacing, p_star, a_star, c, dt);
            self.motion.p = update.p;
            self.motion.p_dot = update.p_dot;
            self.clamps = ClampFlags { p: update.p_clamped, a: update.a_clamped };
        } else {
            self.pacing.p = 1.0;
            self.pacing.a = 1.0;
            self.motion.p = 1.0;
            self.motion.p_dot = 0.0;
        }

        self.records.push(TickRecord {
            t,
            x: self.motion.x,
            x_dot: self.motion.x_dot,
            v_ref: self.motion.v_ref,
            f_ext,
            d: projection.d,
            p: self.motion.p,
            a: self.pacing.a,
            c,
            etc_x: self.etc_x,
            etc_a,
            em: etc_a - self.etc_x,
            vertex: self.speech.current,
            playhead: self.speech.playhead_s,
        });

        let vf = virtual_force(&self.params.motion.admittance, self.traj, &self.motion.x);
        self.motion.v_ref = step_admittance(&self.params.motion.admittance, &self.motion, &f_ext, &vf.force, dt)?;
        step_plant(&self.params.motion.plant, &mut self.motion, &f_ext);

        let advance = advance_playhead(self.graph, &mut self.speech, self.policy, self.pacing.a, dt, self.etc_x);
        if let Some(early) = advance.finished_early_by {
            self.outcome.audio_end_t = Some(t + dt - early);
        }

        self.tick += 1;
        Ok(true)
    }

    fn finish_outcome(&mut self, cap_hit: bool) {
        self.done = true;
        self.outcome.cap_hit = cap_hit;
        self.outcome.actual_misalignment = match (self.outcome.motion_end_t, self.outcome.audio_end_t) {
            (Some(m), Some(a)) => Some(a - m),
            _ => None,
        };
        self.outcome.phrase_path = self
            .speech
            .committed_path
            .iter()
            .map(|&v| self.graph.vertex(v).id.clone())
            .collect();
    }

    /// Runs to the end and returns the log.
    pub fn run(mut self) -> Result<SessionLog> {
        while self.step()? {}
        Ok(self.into_log())
    }

    /// Ends the session where it stands and returns the log. A session
    /// stopped early is reported as cap-hit.
    pub fn into_log(mut self) -> SessionLog {
        if !self.done {
            self.finish_outcome(true);
        }
        SessionLog {
            scheme: self.params.scheme,
            dims: self.traj.dims(),
            vertex_ids: self.graph.vertices().iter().map(|v| v.id.clone()).collect(),
            records: self.records,
            outcome: self.outcome,
        }
    }
}

/// Runs one complete session with a simulated user.
pub fn run_session(
    config: &SessionConfig,
    scheme: ControlScheme,
    user: UserModel,
    traj: &Trajectory,
    graph: &PhrasingGraph,
) -> Result<SessionLog> {
    let params = SessionParams::from_config(config, scheme)?;
    Session::new(params, traj, graph, user).run()
}

/// Builds the user described by `config` and runs its scheme.
pub fn run_config(config: &SessionConfig, traj: &Trajectory, graph: &PhrasingGraph) -> Result<SessionLog> {
    let user = UserModel::new(&config.user, config.seed, traj.dims())?;
    run_session(config, config.scheme, user, traj, graph)
}
