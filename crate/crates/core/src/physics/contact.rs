//! Penalty ground contact: spring-damper normal forces with a Coulomb-cone
//! bound on viscous tangential friction.
//!
//! Explicit penalties with the configured default stiffness are unstable on
//! light distal links at the 1/60 s substep, so each contact point limits its
//! effective spring/damper coefficients by the apparent mass along the
//! contact axis (`cap_fraction * m_app / dt^2` and `cap_fraction * m_app / dt`).
//! The caps are inactive for heavy modes and keep the force a pure function
//! of `(model, state)`.

use ndarray::{Array1, Array2};

use super::dynamics::{chol_solve, cholesky, mass_matrix_from, Workspace};
use super::fk::{forward_kinematics, BodyKin};
use super::model::HumanoidModel;
use super::state::HumanoidState;
use super::{PhysicsError, Vec2};

/// Force on the body at a contact point, world axes: `normal` along +z
/// (never negative), `tangent` along +x (|tangent| <= mu * normal).
#[derive(Debug, Clone, PartialEq)]
pub struct ContactForce {
    pub link: usize,
    pub point: Vec2,
    pub normal: f64,
    pub tangent: f64,
    pub penetration: f64,
}

/// Contact forces for every configured contact point (zero entries for
/// points above the ground).
pub fn contact_forces(
    model: &HumanoidModel,
    state: &HumanoidState,
) -> Result<Vec<ContactForce>, PhysicsError> {
    state.check_dims(model)?;
    let kin = forward_kinematics(model, &state.q, &state.qdot)?;
    let ws = Workspace::new(model, &kin);
    let m = mass_matrix_from(model, &ws);
    let active: Vec<usize> = if model.fixed_base {
        (super::model::ROOT_DOFS..model.nq()).collect()
    } else {
        (0..model.nq()).collect()
    };
    let na = active.len();
    let mut ma = Array2::zeros((na, na));
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            ma[[r, c]] = m[[i, j]];
        }
    }
    let chol = cholesky(&ma)?;
    Ok(contact_forces_internal(model, &kin, &ws, &chol, &active))
}

pub(crate) fn contact_forces_internal(
    model: &HumanoidModel,
    kin: &BodyKin,
    ws: &Workspace,
    chol: &Array2<f64>,
    active: &[usize],
) -> Vec<ContactForce> {
    let cp = &model.contact;
    let dt = cp.stability_dt;
    let mut out = Vec::with_capacity(model.contact_points.len());
    for def in &model.contact_points {
        let p = kin.point_world(def.link, def.offset);
        let penetration = cp.ground_z - p[1];
        if penetration <= 0.0 {
            out.push(ContactForce {
                link: def.link,
                point: p,
                normal: 0.0,
                tangent: 0.0,
                penetration: 0.0,
            });
            continue;
        }
        let v = kin.point_velocity(def.link, def.offset);
        let basis = ws.point_basis(model, kin, def.link, p);
        let m_app_x = apparent_mass(&basis, chol, active, 0);
        let m_app_z = apparent_mass(&basis, chol, active, 1);

        let k_eff = cp.stiffness.min(cp.cap_fraction * m_app_z / (dt * dt));
        let d_eff = cp.damping.min(cp.cap_fraction * m_app_z / dt);
        let dt_eff = cp.tangent_damping.min(cp.cap_fraction * m_app_x / dt);

        let normal = (k_eff * penetration - d_eff * v[1]).max(0.0);
        let bound = cp.friction_mu * normal;
        let tangent = (-dt_eff * v[0]).clamp(-bound, bound);
        out.push(ContactForce {
            link: def.link,
            point: p,
            normal,
            tangent,
            penetration,
        });
    }
    out
}

/// `1 / (j^T M^-1 j)` for a unit force along `axis` at the contact point.
fn apparent_mass(basis: &[(usize, Vec2)], chol: &Array2<f64>, active: &[usize], axis: usize) -> f64 {
    let na = active.len();
    let mut j = Array1::zeros(na);
    for (dof, b) in basis {
        if let Some(r) = active.iter().position(|a| a == dof) {
            j[r] = b[axis];
        }
    }
    let minv_j = chol_solve(chol, &j);
    let denom = j.dot(&minv_j);
    if denom <= 1e-12 {
        // direction is effectively constrained; treat as very heavy
        1e12
    } else {
        1.0 / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::model::{default_humanoid, standing_root_height};
    use crate::physics::{step_detailed, PdAction};

    fn standing(model: &HumanoidModel) -> HumanoidState {
        let mut s = HumanoidState::zeros(model);
        s.q[1] = standing_root_height(model);
        s
    }

    #[test]
    fn airborne_points_have_zero_force() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing(&model);
        s.q[1] += 0.5;
        let forces = contact_forces(&model, &s).unwrap();
        assert_eq!(forces.len(), model.contact_points.len());
        assert!(forces.iter().all(|f| f.normal == 0.0 && f.tangent == 0.0));
    }

    #[test]
    fn static_stance_supports_the_weight_after_settling() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing(&model);
        let action = PdAction::zeros(&model);
        let dt = 1.0 / 240.0;
        for _ in 0..240 {
            s = step_detailed(&model, &s, &action, dt).unwrap().state;
        }
        let forces = contact_forces(&model, &s).unwrap();
        let total_normal: f64 = forces.iter().map(|f| f.normal).sum();
        let weight = model.total_mass() * model.gravity;
        assert!(
            (total_normal - weight).abs() < 0.02 * weight,
            "normal sum {total_normal} vs weight {weight}"
        );
    }

    #[test]
    fn friction_respects_the_cone() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing(&model);
        s.q[1] -= 0.005; // slight penetration
        s.qdot[0] = 1.5; // sliding
        let forces = contact_forces(&model, &s).unwrap();
        let mut any_contact = false;
        for f in &forces {
            assert!(f.normal >= 0.0);
            assert!(f.tangent.abs() <= model.contact.friction_mu * f.normal + 1e-12);
            if f.normal > 0.0 {
                any_contact = true;
                // sliding in +x: friction opposes motion
                assert!(f.tangent <= 0.0);
            }
        }
        assert!(any_contact);
    }

    #[test]
    fn forces_are_unilateral_under_upward_motion() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing(&model);
        s.q[1] -= 0.002;
        s.qdot[1] = 5.0; // separating fast: damper would pull down
        let forces = contact_forces(&model, &s).unwrap();
        assert!(forces.iter().all(|f| f.normal >= 0.0));
    }

    #[test]
    fn standing_is_stable_under_zero_action_hold() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing(&model);
        let action = PdAction::zeros(&model);
        let dt = 1.0 / 240.0;
        let z0 = s.q[1];
        for _ in 0..(5 * 240) {
            s = step_detailed(&model, &s, &action, dt).unwrap().state;
        }
        assert!(
            (s.q[1] - z0).abs() < 0.03,
            "root z drifted from {z0} to {}",
            s.q[1]
        );
        assert!(s.q[2].abs() < 0.1, "pitch {}", s.q[2]);
        assert!(s.qdot.iter().all(|v| v.abs() < 0.5), "still moving: {:?}", s.qdot);
    }
}
