//! Generalized state and PD actions.

use serde::{Deserialize, Serialize};

use super::model::{HumanoidModel, ROOT_DOFS};
use super::PhysicsError;

/// Generalized coordinates `(root_x, root_z, root_pitch, joints...)` and
/// velocities. Per-link poses/velocities are a pure function of this via
/// [`super::forward_kinematics`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanoidState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub time_s: f64,
}

impl HumanoidState {
    pub fn zeros(model: &HumanoidModel) -> Self {
        HumanoidState {
            q: vec![0.0; model.nq()],
            qdot: vec![0.0; model.nq()],
            time_s: 0.0,
        }
    }

    pub fn from_qs(q: Vec<f64>, qdot: Vec<f64>) -> Self {
        HumanoidState { q, qdot, time_s: 0.0 }
    }

    pub fn root_x(&self) -> f64 {
        self.q[0]
    }

    pub fn root_z(&self) -> f64 {
        self.q[1]
    }

    pub fn root_pitch(&self) -> f64 {
        self.q[2]
    }

    pub fn joint_angle(&self, j: usize) -> f64 {
        self.q[ROOT_DOFS + j]
    }

    pub fn joint_rate(&self, j: usize) -> f64 {
        self.qdot[ROOT_DOFS + j]
    }

    pub fn check_dims(&self, model: &HumanoidModel) -> Result<(), PhysicsError> {
        if self.q.len() != model.nq() {
            return Err(PhysicsError::DimMismatch {
                what: "state.q",
                expected: model.nq(),
                got: self.q.len(),
            });
        }
        if self.qdot.len() != model.nq() {
            return Err(PhysicsError::DimMismatch {
                what: "state.qdot",
                expected: model.nq(),
                got: self.qdot.len(),
            });
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

/// Per-joint PD target angles (rad). Targets are clamped to the joint
/// limits before torque computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdAction {
    pub targets: Vec<f64>,
}

impl PdAction {
    pub fn hold(model: &HumanoidModel, state: &HumanoidState) -> Self {
        PdAction {
            targets: (0..model.n_joints()).map(|j| state.joint_angle(j)).collect(),
        }
    }

    pub fn zeros(model: &HumanoidModel) -> Self {
        PdAction {
            targets: vec![0.0; model.n_joints()],
        }
    }

    /// Map a normalized action vector (policy output space) to PD targets:
    /// `target_j = a_j * (hi_j - lo_j) / 2`, clamped to the limits. Zero
    /// action is the rest pose.
    pub fn from_normalized(model: &HumanoidModel, a: &[f64]) -> Self {
        PdAction {
            targets: (0..model.n_joints())
                .map(|j| {
                    let [lo, hi] = model.joints[j].limits;
                    (a[j] * model.action_scale(j)).clamp(lo, hi)
                })
                .collect(),
        }
    }
}
