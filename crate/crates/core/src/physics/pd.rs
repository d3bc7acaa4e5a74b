//! Proportional-derivative joint actuation.

use super::model::{HumanoidModel, ROOT_DOFS};
use super::state::{HumanoidState, PdAction};
use super::PhysicsError;

/// `tau_j = clamp(kp_j (a_j - q_j) - kd_j qdot_j, +-cap_j)` with the target
/// clamped into the joint range first.
pub fn pd_torques(
    model: &HumanoidModel,
    state: &HumanoidState,
    action: &PdAction,
) -> Result<Vec<f64>, PhysicsError> {
    if action.targets.len() != model.n_joints() {
        return Err(PhysicsError::DimMismatch {
            what: "pd action",
            expected: model.n_joints(),
            got: action.targets.len(),
        });
    }
    state.check_dims(model)?;
    Ok((0..model.n_joints())
        .map(|j| {
            let joint = &model.joints[j];
            let [lo, hi] = joint.limits;
            let target = action.targets[j].clamp(lo, hi);
            let q = state.q[ROOT_DOFS + j];
            let qd = state.qdot[ROOT_DOFS + j];
            let tau = joint.kp * (target - q) - joint.kd * qd;
            tau.clamp(-joint.torque_cap, joint.torque_cap)
        })
        .collect())
}

/// Stiff restoring spring-damper engaged only outside the joint range,
/// capped at `limit.max_torque`.
pub fn limit_torques(model: &HumanoidModel, state: &HumanoidState) -> Vec<f64> {
    (0..model.n_joints())
        .map(|j| {
            let [lo, hi] = model.joints[j].limits;
            let q = state.q[ROOT_DOFS + j];
            let qd = state.qdot[ROOT_DOFS + j];
            let lim = &model.limit;
            let tau = if q < lo {
                lim.stiffness * (lo - q) - lim.damping * qd
            } else if q > hi {
                lim.stiffness * (hi - q) - lim.damping * qd
            } else {
                0.0
            };
            tau.clamp(-lim.max_torque, lim.max_torque)
        })
        .collect()
}
