//! Reduced-coordinate dynamics: composite-rigid-body mass matrix, recursive
//! inverse-dynamics bias forces, and the semi-implicit Euler step.
//!
//! Spatial quantities are taken about a fixed reference point `O = (root_x, 0)`
//! in world axes (planar motion vectors `(omega, vx, vz)`), which keeps the
//! arithmetic invariant to world x-translation. The mass matrix is assembled
//! by accumulating subtree spatial inertias bottom-up and projecting them
//! onto the joint motion subspaces; bias forces come from a velocity-product
//! inverse-dynamics pass with gravity folded in as a fictitious base
//! acceleration.

use ndarray::{Array1, Array2};

use super::contact::{contact_forces_internal, ContactForce};
use super::fk::{forward_kinematics, BodyKin};
use super::model::{HumanoidModel, ROOT_DOFS};
use super::pd::{limit_torques, pd_torques};
use super::state::{HumanoidState, PdAction};
use super::{cross2, perp, scale, sub, PhysicsError, Vec2};

/// Planar spatial vector: (angular, linear_x, linear_z).
pub(crate) type Spatial = [f64; 3];

/// 3x3 symmetric spatial inertia about the reference point.
pub(crate) type SpatialInertia = [[f64; 3]; 3];

pub(crate) struct Workspace {
    /// fixed reference point for all spatial algebra
    pub origin: Vec2,
    /// motion subspace per dof
    pub s: Vec<Spatial>,
    /// per-link spatial inertia about `origin`
    pub isp: Vec<SpatialInertia>,
    /// per-link subtree inertia (link + all descendants)
    pub isub: Vec<SpatialInertia>,
    /// spatial velocity per link about `origin`
    pub vel: Vec<Spatial>,
}

#[inline]
fn mat_vec(m: &SpatialInertia, v: &Spatial) -> Spatial {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

#[inline]
fn dot3(a: &Spatial, b: &Spatial) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Workspace {
    pub fn new(model: &HumanoidModel, kin: &BodyKin) -> Self {
        let origin = [kin.links[0].origin[0], 0.0];
        let n_links = model.n_links();

        let mut isp = Vec::with_capacity(n_links);
        let mut vel = Vec::with_capacity(n_links);
        for (def, k) in model.links.iter().zip(&kin.links) {
            let c = sub(k.com, origin);
            let m = def.mass;
            let i_o = def.inertia + m * (c[0] * c[0] + c[1] * c[1]);
            isp.push([
                [i_o, -m * c[1], m * c[0]],
                [-m * c[1], m, 0.0],
                [m * c[0], 0.0, m],
            ]);
            // velocity of the body-fixed point at `origin`
            let v_o = sub(k.v_origin, scale(perp(sub(k.origin, origin)), k.omega));
            vel.push([k.omega, v_o[0], v_o[1]]);
        }

        let mut isub = isp.clone();
        for &l in model.link_topo.iter().rev() {
            for &c in &model.children[l] {
                let child = isub[c];
                let acc = &mut isub[l];
                for r in 0..3 {
                    for cc in 0..3 {
                        acc[r][cc] += child[r][cc];
                    }
                }
            }
        }

        // Motion subspaces: root x, root z, root pitch (about the root
        // origin point), then one revolute subspace per joint about its
        // world anchor.
        let mut s: Vec<Spatial> = Vec::with_capacity(model.nq());
        s.push([0.0, 1.0, 0.0]);
        s.push([0.0, 0.0, 1.0]);
        let pr = sub(kin.links[0].origin, origin);
        let sp = perp(scale(pr, -1.0));
        s.push([1.0, sp[0], sp[1]]);
        for j in &model.joints {
            let a = sub(kin.links[j.child].origin, origin);
            let sj = perp(scale(a, -1.0));
            s.push([1.0, sj[0], sj[1]]);
        }

        Workspace {
            origin,
            s,
            isp,
            isub,
            vel,
        }
    }

    /// Point-velocity basis vectors: for each dof moving `link`, the world
    /// velocity of `point` per unit generalized rate.
    pub fn point_basis(
        &self,
        model: &HumanoidModel,
        kin: &BodyKin,
        link: usize,
        point: Vec2,
    ) -> Vec<(usize, Vec2)> {
        let mut cols = Vec::with_capacity(ROOT_DOFS + model.path_joints[link].len());
        if !model.fixed_base {
            cols.push((0, [1.0, 0.0]));
            cols.push((1, [0.0, 1.0]));
            cols.push((2, perp(sub(point, kin.links[0].origin))));
        }
        for &ji in &model.path_joints[link] {
            let anchor = kin.links[model.joints[ji].child].origin;
            cols.push((ROOT_DOFS + ji, perp(sub(point, anchor))));
        }
        cols
    }
}

/// Mass matrix via composite-rigid-body accumulation.
pub fn mass_matrix(model: &HumanoidModel, kin: &BodyKin) -> Array2<f64> {
    let ws = Workspace::new(model, kin);
    mass_matrix_from(model, &ws)
}

pub(crate) fn mass_matrix_from(model: &HumanoidModel, ws: &Workspace) -> Array2<f64> {
    let n = model.nq();
    let mut m = Array2::zeros((n, n));
    // root block: composite inertia of the whole body
    let itot = &ws.isub[0];
    for a in 0..ROOT_DOFS {
        let f = mat_vec(itot, &ws.s[a]);
        for b in 0..ROOT_DOFS {
            m[[a, b]] = dot3(&ws.s[b], &f);
        }
    }
    for (ji, joint) in model.joints.iter().enumerate() {
        let d = ROOT_DOFS + ji;
        let f = mat_vec(&ws.isub[joint.child], &ws.s[d]);
        m[[d, d]] = dot3(&ws.s[d], &f);
        for a in 0..ROOT_DOFS {
            let v = dot3(&ws.s[a], &f);
            m[[a, d]] = v;
            m[[d, a]] = v;
        }
        for &aj in &model.path_joints[joint.parent] {
            let ad = ROOT_DOFS + aj;
            let v = dot3(&ws.s[ad], &f);
            m[[ad, d]] = v;
            m[[d, ad]] = v;
        }
    }
    m
}

/// Generalized bias forces (Coriolis/centrifugal + gravity), i.e. the
/// left-hand side residual with `qddot = 0`.
pub(crate) fn bias_forces(model: &HumanoidModel, kin: &BodyKin, ws: &Workspace) -> Array1<f64> {
    let n_links = model.n_links();
    // spatial accelerations with qddot = 0, gravity as base acceleration
    let mut acc: Vec<Spatial> = vec![[0.0; 3]; n_links];
    {
        let root = &kin.links[0];
        let sdot = perp(scale(root.v_origin, -1.0));
        acc[0] = [
            0.0,
            sdot[0] * root.omega * 0.0, // root x/z translations have constant subspaces
            model.gravity,
        ];
        // pitch subspace moves with the root origin point
        acc[0][1] += sdot[0] * kin_rate(model, kin, 2);
        acc[0][2] += sdot[1] * kin_rate(model, kin, 2);
    }
    for &ji in &model.joint_topo {
        let joint = &model.joints[ji];
        let child = joint.child;
        let sdot = perp(scale(kin.links[child].v_origin, -1.0));
        let qd = kin_rate(model, kin, ROOT_DOFS + ji);
        let pa = acc[joint.parent];
        acc[child] = [pa[0], pa[1] + sdot[0] * qd, pa[2] + sdot[1] * qd];
    }

    // net spatial force per link; accumulate subtree sums bottom-up
    let mut f: Vec<Spatial> = Vec::with_capacity(n_links);
    for l in 0..n_links {
        let ia = mat_vec(&ws.isp[l], &acc[l]);
        let iv = mat_vec(&ws.isp[l], &ws.vel[l]);
        let v = &ws.vel[l];
        let vlin = [v[1], v[2]];
        let flin = [iv[1], iv[2]];
        let vxf = [
            cross2(vlin, flin),
            -v[0] * flin[1], // omega * perp(f)
            v[0] * flin[0],
        ];
        f.push([ia[0] + vxf[0], ia[1] + vxf[1], ia[2] + vxf[2]]);
    }
    let mut fsub = f;
    for &l in model.link_topo.iter().rev() {
        for &c in &model.children[l] {
            let child = fsub[c];
            let acc = &mut fsub[l];
            acc[0] += child[0];
            acc[1] += child[1];
            acc[2] += child[2];
        }
    }

    let mut c = Array1::zeros(model.nq());
    for a in 0..ROOT_DOFS {
        c[a] = dot3(&ws.s[a], &fsub[0]);
    }
    for (ji, joint) in model.joints.iter().enumerate() {
        c[ROOT_DOFS + ji] = dot3(&ws.s[ROOT_DOFS + ji], &fsub[joint.child]);
    }
    c
}

// The workspace does not carry qdot; velocities come back out of the FK
// velocity fields. Root pitch rate and joint rates are recovered from
// adjacent links' angular velocities.
#[inline]
fn kin_rate(model: &HumanoidModel, kin: &BodyKin, dof: usize) -> f64 {
    if dof == 2 {
        kin.links[0].omega
    } else {
        let j = &model.joints[dof - ROOT_DOFS];
        kin.links[j.child].omega - kin.links[j.parent].omega
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
pub(crate) fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>, PhysicsError> {
    let n = a.nrows();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(sum > 0.0) {
                    return Err(PhysicsError::NumericalDivergence {
                        what: "mass matrix lost positive definiteness",
                        index: i,
                        value: sum,
                    });
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

pub(crate) fn chol_solve(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * y[k];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}

/// Everything one substep produces beyond the next state.
#[derive(Debug, Clone)]
pub struct StepDetail {
    pub state: HumanoidState,
    /// applied PD torques (post-cap) per joint
    pub pd_torques: Vec<f64>,
    /// joint-limit restoring torques per joint
    pub limit_torques: Vec<f64>,
    pub contacts: Vec<ContactForce>,
}

/// One semi-implicit Euler substep:
/// `qdot' = qdot + dt * qddot(q, qdot)`, `q' = q + dt * qdot'`.
pub fn step(
    model: &HumanoidModel,
    state: &HumanoidState,
    action: &PdAction,
    dt: f64,
) -> Result<HumanoidState, PhysicsError> {
    step_detailed(model, state, action, dt).map(|d| d.state)
}

pub fn step_detailed(
    model: &HumanoidModel,
    state: &HumanoidState,
    action: &PdAction,
    dt: f64,
) -> Result<StepDetail, PhysicsError> {
    assert!(dt > 0.0, "dt must be positive");
    state.check_dims(model)?;
    if !state.all_finite() {
        return Err(PhysicsError::NumericalDivergence {
            what: "non-finite input state",
            index: 0,
            value: f64::NAN,
        });
    }

    let kin = forward_kinematics(model, &state.q, &state.qdot)?;
    let ws = Workspace::new(model, &kin);
    let m = mass_matrix_from(model, &ws);

    let active: Vec<usize> = if model.fixed_base {
        (ROOT_DOFS..model.nq()).collect()
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

    let tau_pd = pd_torques(model, state, action)?;
    let tau_lim = limit_torques(model, state);

    let mut q_gen = Array1::zeros(model.nq());
    for j in 0..model.n_joints() {
        q_gen[ROOT_DOFS + j] = tau_pd[j] + tau_lim[j];
    }

    let contacts = contact_forces_internal(model, &kin, &ws, &chol, &active);
    for cf in &contacts {
        let force = [cf.tangent, cf.normal];
        if force == [0.0, 0.0] {
            continue;
        }
        for (dof, basis) in ws.point_basis(model, &kin, cf.link, cf.point) {
            q_gen[dof] += basis[0] * force[0] + basis[1] * force[1];
        }
    }

    let c = bias_forces(model, &kin, &ws);

    let rhs = Array1::from_shape_fn(na, |r| {
        let i = active[r];
        q_gen[i] - c[i]
    });
    let qdd_active = chol_solve(&chol, &rhs);

    let mut next = state.clone();
    for (r, &i) in active.iter().enumerate() {
        next.qdot[i] += dt * qdd_active[r];
    }
    for i in 0..model.nq() {
        next.q[i] += dt * next.qdot[i];
    }
    next.time_s += dt;

    for (i, &v) in next.q.iter().enumerate() {
        if !v.is_finite() || v.abs() > model.q_bound {
            return Err(PhysicsError::NumericalDivergence {
                what: "q out of bounds",
                index: i,
                value: v,
            });
        }
    }
    for (i, &v) in next.qdot.iter().enumerate() {
        if !v.is_finite() || v.abs() > model.qdot_bound {
            return Err(PhysicsError::NumericalDivergence {
                what: "qdot out of bounds",
                index: i,
                value: v,
            });
        }
    }

    Ok(StepDetail {
        state: next,
        pd_torques: tau_pd,
        limit_torques: tau_lim,
        contacts,
    })
}

/// Kinetic plus gravitational potential energy of the assembly.
pub fn mechanical_energy(model: &HumanoidModel, kin: &BodyKin) -> f64 {
    let mut e = 0.0;
    for (def, k) in model.links.iter().zip(&kin.links) {
        let v2 = k.v_com[0] * k.v_com[0] + k.v_com[1] * k.v_com[1];
        e += 0.5 * def.mass * v2 + 0.5 * def.inertia * k.omega * k.omega;
        e += def.mass * model.gravity * k.com[1];
    }
    e
}


#[cfg(test)]
mod probe {
    use super::*;
    use crate::physics::model::{default_humanoid, standing_root_height};

    #[test]
    #[ignore]
    fn probe_standing_divergence() {
        let model = default_humanoid().build().unwrap();
        let mut s = HumanoidState::zeros(&model);
        s.q[1] = standing_root_height(&model);
        let action = PdAction::zeros(&model);
        let dt = 1.0 / 240.0;
        for step_i in 0..2400 {
            match step_detailed(&model, &s, &action, dt) {
                Ok(d) => s = d.state,
                Err(e) => { println!("step {step_i}: {e}"); return; }
            }
            if step_i % 120 == 0 {
                let (mut mi, mut mv) = (0, 0.0f64);
                for (i, v) in s.qdot.iter().enumerate() {
                    if v.abs() > mv { mv = v.abs(); mi = i; }
                }
                println!("step {step_i}: z={:.4} pitch={:.4} max qdot[{}]={:.3}", s.q[1], s.q[2], mi, mv);
            }
        }
    }

    #[test]
    #[ignore]
    fn probe_pendulum_tiny_dt() {
        use crate::physics::model::*;
        let cfg = ModelConfig {
            links: vec![
                LinkConfigEntry { name: "base".into(), mass: 1.0, inertia: 0.01, length: 0.05, com_offset: 0.0, axis: [0.0, 1.0] },
                LinkConfigEntry { name: "rod1".into(), mass: 1.0, inertia: 1.0 / 12.0 * 0.25, length: 0.5, com_offset: 0.25, axis: [0.0, -1.0] },
                LinkConfigEntry { name: "rod2".into(), mass: 1.0, inertia: 1.0 / 12.0 * 0.25, length: 0.5, com_offset: 0.25, axis: [0.0, -1.0] },
            ],
            joints: vec![
                JointConfigEntry { name: "j1".into(), parent: "base".into(), child: "rod1".into(), anchor: [0.0, 0.0], limits: [-100.0, 100.0], kp: 0.0, kd: 0.0, torque_cap: 1.0 },
                JointConfigEntry { name: "j2".into(), parent: "rod1".into(), child: "rod2".into(), anchor: [0.0, -0.5], limits: [-100.0, 100.0], kp: 0.0, kd: 0.0, torque_cap: 1.0 },
            ],
            contact_points: vec![],
            end_effectors: EndEffectorConfig { head: "base".into(), hand: "rod2".into(), feet: vec![] },
            contact: ContactParams::default(),
            limit: LimitParams { stiffness: 0.0, damping: 0.0, max_torque: 1.0 },
            gravity: 9.81,
            fixed_base: true,
            q_bound: 1e6, qdot_bound: 1e6,
        };
        let model = cfg.build().unwrap();
        let mut s = HumanoidState::zeros(&model);
        s.q[3] = std::f64::consts::FRAC_PI_4;
        s.q[4] = 0.3;
        let action = PdAction::zeros(&model);
        let dt = 1e-5;
        let kin0 = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        let e0 = mechanical_energy(&model, &kin0);
        for _ in 0..100_000 {
            s = step(&model, &s, &action, dt).unwrap();
        }
        let kin = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        println!("e0={e0:.9} e1={:.9} (1 s at dt=1e-5)", mechanical_energy(&model, &kin));
    }
}


#[cfg(test)]
mod probe2 {
    use super::*;
    use crate::physics::model::{default_humanoid, standing_root_height};

    #[test]
    #[ignore]
    fn probe_apparent_inertia() {
        let model = default_humanoid().build().unwrap();
        let mut s = HumanoidState::zeros(&model);
        s.q[1] = standing_root_height(&model);
        let kin = forward_kinematics(&model, &s.q, &s.qdot).unwrap();
        let m = mass_matrix(&model, &kin);
        let l = cholesky(&m).unwrap();
        let n = model.nq();
        for j in 0..model.n_joints() {
            let d = ROOT_DOFS + j;
            let mut e = Array1::zeros(n);
            e[d] = 1.0;
            let x = chol_solve(&l, &e);
            let app = 1.0 / x[d];
            let joint = &model.joints[j];
            let h = 1.0 / 60.0;
            let hk = h * h * joint.kp / app;
            let hd = h * joint.kd / app;
            println!("{:10} M_dd={:8.4} app={:8.4} h2k/m={:6.3} hd/m={:6.3}", joint.name, m[[d, d]], app, hk, hd);
        }
    }
}
