//! Human-in-the-loop input: operator control messages, the force source they
//! drive, and the recorded trace that replays a live session headlessly.

use serde::{Deserialize, Serialize};

use super::user::{direction_vec, ForceNoise, ForceSource};
use crate::error::Result;
use crate::motion::MotionState;
use crate::Vec3;

/// Messages accepted from the operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlMsg {
    SetResistance(f64),
    Push {
        direction: Vec<f64>,
        magnitude: f64,
        duration: f64,
    },
    Start {
        #[serde(default)]
        config: Option<String>,
    },
    Reset,
}

/// The part of a control message that acts on the simulated force, after
/// server-side clamping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiveInput {
    SetResistance(f64),
    Push { force: [f64; 3], duration: f64 },
}

impl LiveInput {
    /// Converts a force-related message, clamping resistance into `[0, 1]`
    /// and push magnitude into `[0, f_max]`. Returns `Ok(None)` for session
    /// control messages.
    pub fn from_msg(msg: &ControlMsg, dims: usize, f_max: f64) -> Result<Option<Self>> {
        Ok(match msg {
            ControlMsg::SetResistance(r) => {
                let r = if r.is_finite() { r.clamp(0.0, 1.0) } else { 0.0 };
                Some(LiveInput::SetResistance(r))
            }
            ControlMsg::Push { direction, magnitude, duration } => {
                let dir = direction_vec(direction, dims)?;
                let mag = if magnitude.is_finite() { magnitude.clamp(0.0, f_max) } else { 0.0 };
                let duration = if duration.is_finite() { duration.max(0.0) } else { 0.0 };
                let f = dir * mag;
                Some(LiveInput::Push { force: [f.x, f.y, f.z], duration })
            }
            ControlMsg::Start { .. } | ControlMsg::Reset => None,
        })
    }
}

/// One input applied at the start of a tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub tick: u64,
    pub input: LiveInput,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlTrace {
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone)]
struct LivePush {
    end: f64,
    force: Vec3,
}

/// Force source driven by the latest operator input, sampled and held at
/// tick boundaries. With a schedule attached it replays a recorded trace.
#[derive(Debug, Clone)]
pub struct LiveUser {
    r_max: f64,
    resistance: f64,
    pushes: Vec<LivePush>,
    noise: ForceNoise,
    schedule: Vec<TraceEntry>,
    next_scheduled: usize,
    recorded: ControlTrace,
    last_t: f64,
}

impl LiveUser {
    pub fn new(r_max: f64, noise_std: f64, seed: u64, dims: usize) -> Result<Self> {
        Ok(LiveUser {
            r_max,
            resistance: 0.0,
            pushes: Vec::new(),
            noise: ForceNoise::new(noise_std, seed, dims)?,
            schedule: Vec::new(),
            next_scheduled: 0,
            recorded: ControlTrace::default(),
            last_t: 0.0,
        })
    }

    /// Replays `trace`: each entry is applied at the start of its tick.
    pub fn replaying(r_max: f64, noise_std: f64, seed: u64, dims: usize, trace: &ControlTrace) -> Result<Self> {
        let mut user = Self::new(r_max, noise_std, seed, dims)?;
        user.schedule = trace.entries.clone();
        user.schedule.sort_by_key(|e| e.tick);
        Ok(user)
    }

    /// Applies `input` before the tick numbered `tick` and records it.
    pub fn apply(&mut self, tick: u64, t: f64, input: LiveInput) {
        match &input {
            LiveInput::SetResistance(r) => self.resistance = r.clamp(0.0, 1.0),
            LiveInput::Push { force, duration } => self.pushes.push(LivePush {
                end: t + duration,
                force: Vec3::new(force[0], force[1], force[2]),
            }),
        }
        self.recorded.entries.push(TraceEntry { tick, input });
    }

    pub fn trace(&self) -> &ControlTrace {
        &self.recorded
    }

    pub fn current_resistance(&self) -> f64 {
        self.resistance
    }

    pub fn last_time(&self) -> f64 {
        self.last_t
    }
}

impl ForceSource for LiveUser {
    fn force(&mut self, tick: u64, t: f64, motion: &MotionState) -> Vec3 {
        while self.next_scheduled < self.schedule.len() && self.schedule[self.next_scheduled].tick <= tick {
            let entry = self.schedule[self.next_scheduled].clone();
            self.next_scheduled += 1;
            self.apply(tick, t, entry.input);
        }
        self.last_t = t;
        self.pushes.retain(|p| t < p.end);
        let mut f = -motion.x_dot * (self.resistance * self.r_max);
        for p in &self.pushes {
            f += p.force;
        }
        f + self.noise.sample()
    }

    fn resistance(&self) -> f64 {
        self.resistance
    }
}
