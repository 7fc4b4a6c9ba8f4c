//! The physical half of the controller: guide and propell forces, the
//! pace-varying virtual admittance, the velocity-controlled plant, motion
//! time-to-completion estimation and the passivity energy audit.

mod admittance;
mod audit;
mod etc;
mod plant;

use serde::{Deserialize, Serialize};

pub use admittance::{fixed_admittance_step, step_admittance, virtual_force, virtual_force_at, VirtualForce};
pub use audit::{energy_audit, EnergyAudit};
pub use etc::{estimate_motion_etc, MotionEtc, ETC_CAP_S};
pub use plant::{is_complete, step_plant};

use crate::error::{Error, Result};
use crate::Vec3;

/// A diagonal matrix given either as one scalar for every axis or per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diagonal {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

impl Diagonal {
    pub fn to_vec3(&self, name: &str) -> Result<Vec3> {
        let v = match self {
            Diagonal::Uniform(s) => Vec3::repeat(*s),
            Diagonal::PerAxis(axes) => {
                if axes.is_empty() || axes.len() > 3 {
                    return Err(Error::Config(format!("{name} needs 1 to 3 diagonal entries")));
                }
                let mut v = Vec3::repeat(*axes.last().unwrap());
                for (i, a) in axes.iter().enumerate() {
                    v[i] = *a;
                }
                v
            }
        };
        if v.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::Config(format!("{name} entries must be strictly positive")));
        }
        Ok(v)
    }
}

impl From<f64> for Diagonal {
    fn from(v: f64) -> Self {
        Diagonal::Uniform(v)
    }
}

/// Virtual admittance and virtual force parameters. Matrices are diagonal
/// and stored by their diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmittanceParams {
    pub mass: Vec3,
    pub damping: Vec3,
    pub stiffness: Vec3,
    /// Magnitude of the propell force along the trajectory tangent, N.
    pub propell: f64,
}

impl AdmittanceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: &Vec3| v.iter().all(|e| e.is_finite() && *e > 0.0);
        if !positive(&self.mass) || !positive(&self.damping) || !positive(&self.stiffness) {
            return Err(Error::Config("M0, D0 and K entries must be strictly positive".into()));
        }
        if !(self.propell.is_finite() && self.propell >= 0.0) {
            return Err(Error::Config("F_propell must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    pub mass: Vec3,
    /// Proportional velocity-loop gain, N s/m.
    pub gain: f64,
    /// Integration step, s.
    pub dt: f64,
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if self.mass.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Config("M_robot entries must be strictly positive".into()));
        }
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(Error::Config("C_gain must be strictly positive".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config("dt must be strictly positive".into()));
        }
        Ok(())
    }
}

/// Motion counts as complete once the projection parameter reaches `d` and
/// the end effector is within `distance` of the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub d: f64,
    pub distance: f64,
}

impl Default for Completion {
    fn default() -> Self {
        Completion { d: 0.995, distance: 0.01 }
    }
}

/// Flat motion configuration as it appears in session config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    #[serde(rename = "M0")]
    pub m0: Diagonal,
    #[serde(rename = "D0")]
    pub d0: Diagonal,
    #[serde(rename = "K")]
    pub k: Diagonal,
    #[serde(rename = "F_propell")]
    pub f_propell: f64,
    #[serde(rename = "M_robot")]
    pub m_robot: Diagonal,
    #[serde(rename = "C_gain")]
    pub c_gain: f64,
    pub dt: f64,
    pub etc_rate_hz: f64,
    pub completion_d: f64,
    pub completion_dist: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            m0: 160.0.into(),
            d0: 1600.0.into(),
            k: 4000.0.into(),
            f_propell: 80.0,
            m_robot: 40.0.into(),
            c_gain: 8000.0,
            dt: 0.002,
            etc_rate_hz: 10.0,
            completion_d: 0.995,
            completion_dist: 0.01,
        }
    }
}

/// Validated motion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    pub admittance: AdmittanceParams,
    pub plant: PlantParams,
    pub completion: Completion,
    pub etc_rate_hz: f64,
}

impl MotionConfig {
    pub fn params(&self) -> Result<MotionParams> {
        let admittance = AdmittanceParams {
            mass: self.m0.to_vec3("M0")?,
            damping: self.d0.to_vec3("D0")?,
            stiffness: self.k.to_vec3("K")?,
            propell: self.f_propell,
        };
        admittance.validate()?;
        let plant = PlantParams {
            mass: self.m_robot.to_vec3("M_robot")?,
            gain: self.c_gain,
            dt: self.dt,
        };
        plant.validate()?;
        if !(self.completion_d > 0.0 && self.completion_d <= 1.0) {
            return Err(Error::Config("completion_d must lie in (0, 1]".into()));
        }
        if self.completion_dist.is_nan() || self.completion_dist <= 0.0 {
            return Err(Error::Config("completion_dist must be positive".into()));
        }
        if !(self.etc_rate_hz > 0.0 && self.etc_rate_hz <= 1.0 / self.dt) {
            return Err(Error::Config("etc_rate_hz must lie in (0, 1/dt]".into()));
        }
        Ok(MotionParams {
            admittance,
            plant,
            completion: Completion { d: self.completion_d, distance: self.completion_dist },
            etc_rate_hz: self.etc_rate_hz,
        })
    }
}

/// Full dynamical state of the motion channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub x: Vec3,
    pub x_dot: Vec3,
    pub v_ref: Vec3,
    /// Physical pace.
    pub p: f64,
    /// Analytic pace derivative fed into the variable admittance, 1/s.
    pub p_dot: f64,
    /// Paced time, the integral of `p`.
    pub phase: f64,
    pub t: f64,
    /// Parameter of the last projection onto the trajectory.
    pub d: f64,
    pub completed: bool,
}

impl MotionState {
    pub fn at_rest(x: Vec3) -> Self {
        MotionState {
            x,
            x_dot: Vec3::zeros(),
            v_ref: Vec3::zeros(),
            p: 1.0,
            p_dot: 0.0,
            phase: 0.0,
            t: 0.0,
            d: 0.0,
            completed: false,
        }
    }
}
