use super::{AdmittanceParams, MotionState};
use crate::error::{Error, Result};
use crate::trajectory::{ProjectionResult, Trajectory};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualForce {
    pub force: Vec3,
    pub guide: Vec3,
    pub propell: Vec3,
    pub projection: ProjectionResult,
}

/// Guide spring toward the closest trajectory point plus a constant-magnitude
/// push along the forward tangent. The push vanishes at the endpoint so the
/// end of the trajectory is an equilibrium.
pub fn virtual_force(params: &AdmittanceParams, traj: &Trajectory, x: &Vec3) -> VirtualForce {
    virtual_force_at(params, traj.project(x), x)
}

/// [`virtual_force`] for an already computed projection of `x`.
pub fn virtual_force_at(params: &AdmittanceParams, projection: ProjectionResult, x: &Vec3) -> VirtualForce {
    let guide = params.stiffness.component_mul(&(projection.point - x));
    let propell = if projection.d >= 1.0 {
        Vec3::zeros()
    } else {
        projection.tangent * params.propell
    };
    VirtualForce { force: guide + propell, guide, propell, projection }
}

/// One explicit step of the variable admittance
/// `M0 dv/dt = p^2 (F_ext + F_virtual) - (p D0 - (p_dot / p) M0) v`, which is
/// the plain admittance `M0 dv/dt + D0 v = F` run on paced time.
pub fn step_admittance(
    params: &AdmittanceParams,
    state: &MotionState,
    f_ext: &Vec3,
    f_virtual: &Vec3,
    dt: f64,
) -> Result<Vec3> {
    if !f_ext.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { quantity: "external force", t: state.t });
    }
    if !f_virtual.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { quantity: "virtual force", t: state.t });
    }
    let p = state.p;
    let total = f_ext + f_virtual;
    let mut v = state.v_ref;
    for i in 0..3 {
        let m0 = params.mass[i];
        let damping = p * params.damping[i] - (state.p_dot / p) * m0;
        let accel = (p * p * total[i] - damping * v[i]) / m0;
        v[i] += dt * accel;
    }
    if !v.iter().all(|e| e.is_finite()) {
        return Err(Error::NonFinite { quantity: "reference velocity", t: state.t });
    }
    Ok(v)
}

/// Fixed admittance `M0 dv/dt + D0 v = F`, same discretization.
pub fn fixed_admittance_step(params: &AdmittanceParams, v_ref: &Vec3, force: &Vec3, dt: f64) -> Vec3 {
    let mut v = *v_ref;
    for i in 0..3 {
        v[i] += dt * ((force[i] - params.damping[i] * v[i]) / params.mass[i]);
    }
    v
}
