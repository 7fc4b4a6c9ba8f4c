//! Cooperation estimation, the closed-form ideal paces and the first-order
//! tracking laws that move the physical pace `p` and audio pace `a` toward
//! them.
//!
//! # Ideal paces
//!
//! The targets minimize `(p - 1)^2 + (a - 1)^2` subject to both channels
//! finishing together, `t_x / p = t_a / a`. With `s = t_x / t_a` the
//! constraint reads `p = s a`, and stationarity gives
//!
//! ```text
//! a* = (s + 1) / (s^2 + 1)        p* = s (s + 1) / (s^2 + 1)
//! ```
//!
//! Swapping the two expressions (an easy slip when deriving this by hand)
//! breaks the constraint for every `s != 1`; the tests check the constraint
//! residual directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Paces are kept this far inside the open interval `(pace_min, pace_max)`.
const CLAMP_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacingParams {
    pub k_p: f64,
    pub k_a: f64,
    pub k_c: f64,
    /// Per-second decay base of the resistance integral, `0 < alpha < 1`.
    pub alpha: f64,
    #[serde(rename = "F_max")]
    pub f_max: f64,
    pub deadband: f64,
    pub pace_min: f64,
    pub pace_max: f64,
}

impl Default for PacingParams {
    fn default() -> Self {
        PacingParams {
            k_p: 2.0,
            k_a: 2.0,
            k_c: 0.5,
            alpha: 0.1,
            f_max: 30.0,
            deadband: 1.5,
            pace_min: 0.6,
            pace_max: 1.4,
        }
    }
}

impl PacingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_p > 0.0 && self.k_a > 0.0 && self.k_c > 0.0) {
            return Err(Error::Config("pacing gains must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("alpha must lie in (0, 1)".into()));
        }
        if !(self.f_max > 0.0 && self.deadband >= 0.0) {
            return Err(Error::Config("F_max must be positive and deadband non-negative".into()));
        }
        if !(self.pace_min > 0.0 && self.pace_min < 1.0 && self.pace_max > 1.0) {
            return Err(Error::Config("pace bounds must satisfy 0 < pace_min < 1 < pace_max".into()));
        }
        Ok(())
    }

    fn clamp_pace(&self, v: f64) -> f64 {
        v.clamp(self.pace_min + CLAMP_MARGIN, self.pace_max - CLAMP_MARGIN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacingState {
    pub p: f64,
    pub a: f64,
    pub c: f64,
    /// Leaky integral of normalized deadbanded force.
    pub resistance_accum: f64,
}

impl Default for PacingState {
    fn default() -> Self {
        PacingState { p: 1.0, a: 1.0, c: 1.0, resistance_accum: 0.0 }
    }
}

/// Result of one tracking-law step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaceUpdate {
    pub p: f64,
    pub a: f64,
    /// `k_p (p* - p)` before clamping.
    pub p_dot: f64,
    pub p_clamped: bool,
    pub a_clamped: bool,
}

/// Advances the cooperation estimate by one step and returns the new `c`.
///
/// The integral `int alpha^(t - tau) |F| / F_max dtau` is discretized with the
/// exact per-step decay `alpha^dt`.
pub fn update_cooperation(params: &PacingParams, state: &mut PacingState, f_ext: &Vec3, dt: f64) -> f64 {
    let magnitude = (f_ext.norm() - params.deadband).max(0.0);
    let normalized = magnitude / params.f_max;
    state.resistance_accum = params.alpha.powf(dt) * state.resistance_accum + normalized * dt;
    state.c = (1.0 - state.resistance_accum).clamp(0.0, 1.0);
    state.c
}

/// Closed-form minimizer of the pace deviation subject to equal finishing
/// times. Returns `(p*, a*)`.
pub fn ideal_paces(etc_motion: f64, etc_audio: f64) -> Result<(f64, f64)> {
    if !(etc_motion > 0.0 && etc_motion.is_finite()) || !(etc_audio > 0.0 && etc_audio.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "time-to-completion estimates must be positive (motion {etc_motion}, audio {etc_audio})"
        )));
    }
    let s = etc_motion / etc_audio;
    let denom = s * s + 1.0;
    let a = (s + 1.0) / denom;
    Ok((s * a, a))
}

/// One explicit Euler step of `p' = k_p (p* - p)` and
/// `a' = k_a (a* - a) - k_c (1 - c)`, clamped into the pace bounds.
pub fn update_paces(
    params: &PacingParams,
    state: &mut PacingState,
    p_star: f64,
    a_star: f64,
    c: f64,
    dt: f64,
) -> PaceUpdate {
    let p_dot = params.k_p * (p_star - state.p);
    let a_dot = params.k_a * (a_star - state.a) - params.k_c * (1.0 - c);
    let p_raw = state.p + p_dot * dt;
    let a_raw = state.a + a_dot * dt;
    state.p = params.clamp_pace(p_raw);
    state.a = params.clamp_pace(a_raw);
    PaceUpdate {
        p: state.p,
        a: state.a,
        p_dot,
        p_clamped: state.p != p_raw,
        a_clamped: state.a != a_raw,
    }
}
