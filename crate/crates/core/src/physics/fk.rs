//! Forward kinematics: world-frame pose and velocity per link.

use super::model::{HumanoidModel, ROOT_DOFS};
use super::{add, perp, rot, scale, sub, PhysicsError, Vec2};

#[derive(Debug, Clone)]
pub struct LinkKin {
    /// world angle (rad)
    pub angle: f64,
    /// frame origin (inboard joint position), world (m)
    pub origin: Vec2,
    /// distal tip, world (m); this is the link's reported "position"
    pub tip: Vec2,
    /// center of mass, world (m)
    pub com: Vec2,
    /// angular velocity (rad/s)
    pub omega: f64,
    pub v_origin: Vec2,
    pub v_tip: Vec2,
    pub v_com: Vec2,
}

#[derive(Debug, Clone)]
pub struct BodyKin {
    pub links: Vec<LinkKin>,
}

impl BodyKin {
    /// World position of a point given in the frame of `link`.
    pub fn point_world(&self, link: usize, local: Vec2) -> Vec2 {
        let k = &self.links[link];
        add(k.origin, rot(k.angle, local))
    }

    /// World velocity of a point given in the frame of `link`.
    pub fn point_velocity(&self, link: usize, local: Vec2) -> Vec2 {
        let k = &self.links[link];
        let r = rot(k.angle, local);
        add(k.v_origin, scale(perp(r), k.omega))
    }
}

/// Compute per-link world poses and velocities. With all-zero `q`/`qdot`
/// every link sits at its rest pose with zero velocity.
pub fn forward_kinematics(
    model: &HumanoidModel,
    q: &[f64],
    qdot: &[f64],
) -> Result<BodyKin, PhysicsError> {
    if q.len() != model.nq() {
        return Err(PhysicsError::DimMismatch {
            what: "fk.q",
            expected: model.nq(),
            got: q.len(),
        });
    }
    if qdot.len() != model.nq() {
        return Err(PhysicsError::DimMismatch {
            what: "fk.qdot",
            expected: model.nq(),
            got: qdot.len(),
        });
    }
    let n = model.n_links();
    let mut links: Vec<Option<LinkKin>> = vec![None; n];

    let root = &model.links[0];
    links[0] = Some(finish_link(
        root,
        q[2],
        [q[0], q[1]],
        qdot[2],
        [qdot[0], qdot[1]],
    ));

    for &ji in &model.joint_topo {
        let joint = &model.joints[ji];
        let parent = links[joint.parent].as_ref().expect("topo order");
        let anchor_world = add(parent.origin, rot(parent.angle, joint.anchor));
        let anchor_vel = add(
            parent.v_origin,
            scale(perp(sub(anchor_world, parent.origin)), parent.omega),
        );
        let angle = parent.angle + q[ROOT_DOFS + ji];
        let omega = parent.omega + qdot[ROOT_DOFS + ji];
        links[joint.child] = Some(finish_link(
            &model.links[joint.child],
            angle,
            anchor_world,
            omega,
            anchor_vel,
        ));
    }

    Ok(BodyKin {
        links: links.into_iter().map(|l| l.expect("tree covers all links")).collect(),
    })
}

fn finish_link(def: &super::model::LinkDef, angle: f64, origin: Vec2, omega: f64, v_origin: Vec2) -> LinkKin {
    let dir = rot(angle, def.axis);
    let tip = add(origin, scale(dir, def.length));
    let com = add(origin, scale(dir, def.com_offset));
    let v_tip = add(v_origin, scale(perp(sub(tip, origin)), omega));
    let v_com = add(v_origin, scale(perp(sub(com, origin)), omega));
    LinkKin {
        angle,
        origin,
        tip,
        com,
        omega,
        v_origin,
        v_tip,
        v_com,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::model::{default_humanoid, standing_root_height};
    use crate::physics::HumanoidState;

    fn standing_state(model: &HumanoidModel) -> HumanoidState {
        let mut s = HumanoidState::zeros(model);
        s.q[1] = standing_root_height(model);
        s
    }

    #[test]
    fn zero_state_is_rest_pose_with_zero_velocity() {
        let model = default_humanoid().build().unwrap();
        let s = standing_state(&model);
        let kin = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        // torso axis up: tip (= neck point) directly above pelvis
        let torso = &kin.links[0];
        assert_eq!(torso.tip[0], 0.0);
        assert!((torso.tip[1] - (s.q[1] + 0.55)).abs() < 1e-12);
        // feet level with the ground: sole points at z = 0 via ankle at 0.03
        let foot = model.link_index("foot_l").unwrap();
        let sole = kin.point_world(foot, [0.0, -0.03]);
        assert!(sole[1].abs() < 1e-12, "sole z {}", sole[1]);
        for l in &kin.links {
            assert_eq!(l.omega, 0.0);
            assert_eq!(l.v_tip, [0.0, 0.0]);
        }
    }

    #[test]
    fn root_pose_matches_floating_base_coordinates() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing_state(&model);
        s.q[0] = 1.3;
        s.q[2] = 0.21;
        let kin = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        assert_eq!(kin.links[0].origin, [1.3, s.q[1]]);
        assert_eq!(kin.links[0].angle, 0.21);
    }

    #[test]
    fn translation_shifts_every_link_exactly() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing_state(&model);
        s.q[3] = 0.4;
        s.q[5] = -0.2;
        let base = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        s.q[0] += 1.0;
        let moved = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        for (a, b) in base.links.iter().zip(&moved.links) {
            assert!((b.tip[0] - a.tip[0] - 1.0).abs() < 1e-12);
            assert!((b.tip[1] - a.tip[1]).abs() < 1e-12);
            assert_eq!(a.angle, b.angle);
        }
    }

    #[test]
    fn single_pendulum_tip_matches_symbolic_rotation() {
        // One link pinned at the root: q = (0, 0, 0, theta). With the link
        // axis pointing down and length L, the tip sits at
        // (L sin(theta), -L cos(theta)) for any theta; check theta = pi/2.
        use crate::physics::model::*;
        let cfg = ModelConfig {
            links: vec![
                LinkConfigEntry { name: "base".into(), mass: 1.0, inertia: 0.01, length: 0.1, com_offset: 0.05, axis: [0.0, 1.0] },
                LinkConfigEntry { name: "rod".into(), mass: 1.0, inertia: 0.02, length: 0.7, com_offset: 0.35, axis: [0.0, -1.0] },
            ],
            joints: vec![JointConfigEntry {
                name: "pivot".into(), parent: "base".into(), child: "rod".into(),
                anchor: [0.0, 0.0], limits: [-10.0, 10.0], kp: 0.0, kd: 0.0, torque_cap: 1.0,
            }],
            contact_points: vec![],
            end_effectors: EndEffectorConfig { head: "base".into(), hand: "rod".into(), feet: vec![] },
            contact: ContactParams::default(),
            limit: LimitParams::default(),
            gravity: 9.81,
            fixed_base: true,
            q_bound: 1e3,
            qdot_bound: 1e3,
        };
        let model = cfg.build().unwrap();
        let q = vec![0.0, 0.0, 0.0, std::f64::consts::FRAC_PI_2];
        let qdot = vec![0.0; 4];
        let kin = forward_kinematics(&model, &q, &qdot).unwrap();
        let tip = kin.links[1].tip;
        // R(pi/2) * (0,-1) * 0.7 = (0.7, 0)
        assert!((tip[0] - 0.7).abs() < 1e-12);
        assert!(tip[1].abs() < 1e-12);
    }

    #[test]
    fn velocities_match_finite_differences_of_positions() {
        let model = default_humanoid().build().unwrap();
        let mut s = standing_state(&model);
        s.q[2] = 0.1;
        s.q[3] = 0.5;
        s.q[4] = -0.8;
        s.qdot = (0..model.nq()).map(|i| 0.3 * (i as f64 + 1.0).sin()).collect();
        let h = 1e-7;
        let kin = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        let q_fwd: Vec<f64> = s.q.iter().zip(&s.qdot).map(|(q, v)| q + h * v).collect();
        let q_bwd: Vec<f64> = s.q.iter().zip(&s.qdot).map(|(q, v)| q - h * v).collect();
        let kf = forward_kinematics(&model, &q_fwd, &s.qdot).unwrap();
        let kb = forward_kinematics(&model, &q_bwd, &s.qdot).unwrap();
        for i in 0..model.n_links() {
            for ax in 0..2 {
                let fd = (kf.links[i].tip[ax] - kb.links[i].tip[ax]) / (2.0 * h);
                assert!(
                    (fd - kin.links[i].v_tip[ax]).abs() < 1e-6,
                    "link {i} axis {ax}: fd {fd} vs {}",
                    kin.links[i].v_tip[ax]
                );
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let model = default_humanoid().build().unwrap();
        let err = forward_kinematics(&model, &[0.0; 3], &[0.0; 12]).unwrap_err();
        assert!(matches!(err, PhysicsError::DimMismatch { .. }));
    }
}
