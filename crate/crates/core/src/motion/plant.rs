use super::{Completion, MotionState, PlantParams};
use crate::trajectory::ProjectionResult;
use crate::Vec3;

/// Semi-implicit Euler step of `M_robot x'' = F_ext + C (v_ref - x')`:
/// velocity first, then position from the new velocity. `v_ref` must already
/// hold this tick's value.
pub fn step_plant(plant: &PlantParams, state: &mut MotionState, f_ext: &Vec3) {
    let drive = (state.v_ref - state.x_dot) * plant.gain;
    let accel = (f_ext + drive).component_div(&plant.mass);
    state.x_dot += accel * plant.dt;
    state.x += state.x_dot * plant.dt;
    state.t += plant.dt;
    state.phase += state.p * plant.dt;
}

pub fn is_complete(completion: &Completion, projection: &ProjectionResult) -> bool {
    projection.d >= completion.d && projection.distance <= completion.distance
}
