use super::AdmittanceParams;
use crate::session::SessionLog;
use crate::trajectory::Trajectory;

/// Dissipation residual of a logged run:
/// `R(t) = int F_ext . v_ref dt - (V(t) - V(0))` with storage
/// `V = v_ref^T (M0 / 2p^2) v_ref + 1/2 (x_d - x)^T K (x_d - x)`.
///
/// A passive run keeps `R` non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    pub t: Vec<f64>,
    pub residual: Vec<f64>,
    pub storage: Vec<f64>,
    pub input_energy: Vec<f64>,
    pub min_residual: f64,
}

pub fn energy_audit(log: &SessionLog, params: &AdmittanceParams, traj: &Trajectory) -> EnergyAudit {
    let records = &log.records;
    let storage: Vec<f64> = records
        .iter()
        .map(|r| {
            let kinetic: f64 = (0..3)
                .map(|i| 0.5 * params.mass[i] * r.v_ref[i] * r.v_ref[i] / (r.p * r.p))
                .sum();
            let err = traj.project(&r.x).point - r.x;
            let potential: f64 = (0..3).map(|i| 0.5 * params.stiffness[i] * err[i] * err[i]).sum();
            kinetic + potential
        })
        .collect();

    let mut input = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    input.push(0.0);
    for w in records.windows(2) {
        // The force logged at a tick acts over the step to the next record;
        // the midpoint velocity matches the discrete kinetic-energy change.
        let dt = w[1].t - w[0].t;
        let v_mid = (w[0].v_ref + w[1].v_ref) * 0.5;
        acc += w[0].f_ext.dot(&v_mid) * dt;
        input.push(acc);
    }

    let v0 = storage.first().copied().unwrap_or(0.0);
    let residual: Vec<f64> = input.iter().zip(&storage).map(|(w, v)| w - (v - v0)).collect();
    let min_residual = residual.iter().copied().fold(f64::INFINITY, f64::min);
    EnergyAudit {
        t: records.iter().map(|r| r.t).collect(),
        residual,
        storage,
        input_energy: input,
        min_residual: if min_residual.is_finite() { min_residual } else { 0.0 },
    }
}
