use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::MotionState;
use crate::Vec3;

const PROFILE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Source of the external force acting on the end effector each tick.
pub trait ForceSource {
    fn force(&mut self, tick: u64, t: f64, motion: &MotionState) -> Vec3;

    /// Resistance level in effect after the last call to [`ForceSource::force`].
    fn resistance(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserKind {
    ScriptedProfile,
    ViscousResistor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Push {
    pub start: f64,
    pub duration: f64,
    pub direction: Vec<f64>,
    pub magnitude: f64,
}

/// Resistance schedule description. `random_bursts` draws its bursts from
/// the session seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        level: f64,
    },
    Segments {
        segments: Vec<Segment>,
    },
    RandomBursts {
        count: [usize; 2],
        start: [f64; 2],
        duration: [f64; 2],
        level: [f64; 2],
    },
}

impl ProfileSpec {
    /// Mixed-resistance profile used for scheme comparisons.
    pub fn stress() -> Self {
        ProfileSpec::RandomBursts {
            count: [1, 3],
            start: [1.0, 8.0],
            duration: [0.5, 2.0],
            level: [0.3, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UserConfig {
    pub kind: UserKind,
    /// Viscous coefficient at full resistance, N s/m.
    #[serde(rename = "R_max")]
    pub r_max: f64,
    /// Standard deviation of additive force noise per active axis, N.
    pub noise_std: f64,
    pub profile: ProfileSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pushes: Vec<Push>,
}

impl Default for UserConfig {
    fn default() -> Self {
        UserConfig {
            kind: UserKind::ViscousResistor,
            r_max: 3000.0,
            noise_std: 0.3,
            profile: ProfileSpec::Constant { level: 0.0 },
            pushes: Vec::new(),
        }
    }
}

/// Piecewise-constant resistance `r(t)`; overlapping segments take the
/// larger level.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResistanceProfile {
    pub segments: Vec<Segment>,
}

impl ResistanceProfile {
    pub fn level(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .filter(|s| t >= s.start && t < s.end)
            .map(|s| s.level)
            .fold(0.0, f64::max)
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::Config(format!("resistance level {level} outside [0, 1]")));
    }
    Ok(())
}

fn uniform(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        rng.random_range(range[0]..range[1])
    } else {
        range[0]
    }
}

impl ProfileSpec {
    pub fn resolve(&self, seed: u64) -> Result<ResistanceProfile> {
        let segments = match self {
            ProfileSpec::Constant { level } => {
                check_level(*level)?;
                vec![Segment { start: 0.0, end: f64::INFINITY, level: *level }]
            }
            ProfileSpec::Segments { segments } => {
                for s in segments {
                    check_level(s.level)?;
                    if s.end.is_nan() || s.start.is_nan() || s.end < s.start {
                        return Err(Error::Config(format!("segment ends before it starts: {s:?}")));
                    }
                }
                segments.clone()
            }
            ProfileSpec::RandomBursts { count, start, duration, level } => {
                check_level(level[0])?;
                check_level(level[1])?;
                if count[1] < count[0] {
                    return Err(Error::Config("random_bursts count range is empty".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(PROFILE_STREAM);
                let n = rng.random_range(count[0]..=count[1]);
                (0..n)
                    .map(|_| {
                        let s = uniform(&mut rng, *start);
                        let d = uniform(&mut rng, *duration);
                        let l = uniform(&mut rng, *level);
                        Segment { start: s, end: s + d, level: l }
                    })
                    .collect()
            }
        };
        Ok(ResistanceProfile { segments })
    }
}

#[derive(Debug, Clone)]
struct ActivePush {
    start: f64,
    end: f64,
    force: Vec3,
}

/// Seeded gaussian noise on the active axes.
#[derive(Debug, Clone)]
pub(crate) struct ForceNoise {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
    dims: usize,
}

impl ForceNoise {
    pub(crate) fn new(std: f64, seed: u64, dims: usize) -> Result<Self> {
        if !(std >= 0.0 && std.is_finite()) {
            return Err(Error::Config("noise_std must be >= 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(NOISE_STREAM);
        let normal = if std > 0.0 { Some(Normal::new(0.0, std).unwrap()) } else { None };
        Ok(ForceNoise { rng, normal, dims })
    }

    pub(crate) fn sample(&mut self) -> Vec3 {
        let mut v = Vec3::zeros();
        if let Some(normal) = &self.normal {
            for i in 0..self.dims {
                v[i] = normal.sample(&mut self.rng);
            }
        }
        v
    }
}

pub(crate) fn direction_vec(direction: &[f64], dims: usize) -> Result<Vec3> {
    if direction.is_empty() || direction.len() > 3 {
        return Err(Error::Config("push direction needs 1 to 3 components".into()));
    }
    let mut v = Vec3::zeros();
    for (i, c) in direction.iter().enumerate().take(dims) {
        v[i] = *c;
    }
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Config("push direction must be a non-zero vector".into()));
    }
    Ok(v / n)
}

/// Simulated participant: viscous resistance scaled by a scheduled level,
/// optional fixed-direction pushes, and sensor noise. Deterministic for a
/// given seed.
#[derive(Debug, Clone)]
pub struct UserModel {
    kind: UserKind,
    r_max: f64,
    profile: ResistanceProfile,
    pushes: Vec<ActivePush>,
    noise: ForceNoise,
    current_level: f64,
}

impl UserModel {
    pub fn new(config: &UserConfig, seed: u64, dims: usize) -> Result<Self> {
        if !(config.r_max >= 0.0 && config.r_max.is_finite()) {
            return Err(Error::Config("R_max must be >= 0".into()));
        }
        let profile = config.profile.resolve(seed)?;
        let pushes = match config.kind {
            UserKind::ViscousResistor => Vec::new(),
            UserKind::ScriptedProfile => config
                .pushes
                .iter()
                .map(|p| {
                    Ok(ActivePush {
                        start: p.start,
                        end: p.start + p.duration,
                        force: direction_vec(&p.direction, dims)? * p.magnitude,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(UserModel {
            kind: config.kind,
            r_max: config.r_max,
            profile,
            pushes,
            noise: ForceNoise::new(config.noise_std, seed, dims)?,
            current_level: 0.0,
        })
    }

    pub fn kind(&self) -> UserKind {
        self.kind
    }

    pub fn profile(&self) -> &ResistanceProfile {
        &self.profile
    }
}

/// `F_ext = -r(t) R_max x' + noise` (+ scheduled pushes).
pub fn user_force(user: &mut UserModel, motion: &MotionState, t: f64) -> Vec3 {
    let level = user.profile.level(t);
    user.current_level = level;
    let mut f = -motion.x_dot * (level * user.r_max);
    for p in &user.pushes {
        if t >= p.start && t < p.end {
            f += p.force;
        }
    }
    f + user.noise.sample()
}

impl ForceSource for UserModel {
    fn force(&mut self, _tick: u64, t: f64, motion: &MotionState) -> Vec3 {
        user_force(self, motion, t)
    }

    fn resistance(&self) -> f64 {
        self.current_level
    }
}
