//! Deterministic planar (sagittal) articulated rigid-body simulation.
//!
//! Reduced coordinates `q = (root_x, root_z, root_pitch, joint_angles...)`,
//! PD joint actuation with per-joint torque caps, spring-damper ground
//! contact with a Coulomb friction cone, semi-implicit Euler integration.
//! Everything is a pure function of value-typed state: identical inputs
//! produce bit-identical outputs.

mod contact;
mod dynamics;
mod fk;
mod model;
mod pd;
mod state;
mod trajectory;

pub use contact::{contact_forces, ContactForce};
pub use dynamics::{mass_matrix, mechanical_energy, step, step_detailed, StepDetail};
pub use fk::{forward_kinematics, BodyKin, LinkKin};
pub use model::{
    default_humanoid, ContactParams, ContactPointDef, EndEffectors, HumanoidModel, JointDef,
    LimitParams, LinkDef, ModelConfig, ROOT_DOFS,
};
pub use pd::pd_torques;
pub use state::{HumanoidState, PdAction};
pub use trajectory::{export_trajectory, read_trajectory, TrajectoryFrame, TrajectoryLink};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("numerical divergence: {what} (index {index}, value {value})")]
    NumericalDivergence {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub(crate) type Vec2 = [f64; 2];

#[inline]
pub(crate) fn rot(angle: f64, v: Vec2) -> Vec2 {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// 2D analog of `omega x r` for out-of-plane omega = 1.
#[inline]
pub(crate) fn perp(v: Vec2) -> Vec2 {
    [-v[1], v[0]]
}

#[inline]
pub(crate) fn cross2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub(crate) fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn scale(a: Vec2, s: f64) -> Vec2 {
    [a[0] * s, a[1] * s]
}
