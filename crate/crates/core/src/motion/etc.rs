use super::{admittance, is_complete, plant, MotionParams, MotionState};
use crate::trajectory::Trajectory;
use crate::Vec3;

/// Forward simulations stop after this much simulated time.
pub const ETC_CAP_S: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionEtc {
    pub seconds: f64,
    pub cap_hit: bool,
}

/// Remaining motion time for a fully cooperative user at base pace.
///
/// Clones the kinematic state, forces `p = 1`, `p_dot = 0`, `F_ext = 0`, and
/// runs the closed loop at the plant step until completion or [`ETC_CAP_S`].
pub fn estimate_motion_etc(params: &MotionParams, traj: &Trajectory, state: &MotionState) -> MotionEtc {
    let mut sim = MotionState {
        p: 1.0,
        p_dot: 0.0,
        phase: 0.0,
        t: 0.0,
        ..*state
    };
    let zero = Vec3::zeros();
    let mut projection = traj.project(&sim.x);
    let dt = params.plant.dt;
    let max_steps = (ETC_CAP_S / dt).round() as usize;
    for step in 0..max_steps {
        if is_complete(&params.completion, &projection) {
            return MotionEtc { seconds: step as f64 * dt, cap_hit: false };
        }
        let vf = admittance::virtual_force_at(&params.admittance, projection, &sim.x);
        sim.v_ref = admittance::fixed_admittance_step(&params.admittance, &sim.v_ref, &vf.force, dt);
        plant::step_plant(&params.plant, &mut sim, &zero);
        projection = traj.project_tracking(&sim.x, projection.d);
    }
    if is_complete(&params.completion, &projection) {
        return MotionEtc { seconds: ETC_CAP_S, cap_hit: false };
    }
    MotionEtc { seconds: ETC_CAP_S, cap_hit: true }
}
