//! Model description: links, joints, gains, contact geometry.
//!
//! Models are described declaratively ([`ModelConfig`], TOML/JSON with
//! name-based references) and compiled into an index-based [`HumanoidModel`]
//! with the joint tree validated and topologically ordered.

use serde::{Deserialize, Serialize};

use super::PhysicsError;

/// Floating-base coordinates: x, z, pitch.
pub const ROOT_DOFS: usize = 3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkDef {
    pub name: String,
    /// kg
    pub mass: f64,
    /// kg·m² about the center of mass
    pub inertia: f64,
    /// m, origin to distal tip along `axis`
    pub length: f64,
    /// m along `axis` from the origin to the center of mass
    pub com_offset: f64,
    /// unit direction of the link in its local frame (world direction at
    /// zero angle)
    pub axis: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointDef {
    pub name: String,
    /// parent link index
    pub parent: usize,
    /// child link index; the child frame origin sits at the joint
    pub child: usize,
    /// anchor point in the parent link frame (m)
    pub anchor: [f64; 2],
    /// [lo, hi] angle limits (rad)
    pub limits: [f64; 2],
    /// PD gains
    pub kp: f64,
    pub kd: f64,
    /// N·m
    pub torque_cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactPointDef {
    pub link: usize,
    /// point in the link frame (m)
    pub offset: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndEffectors {
    pub head: usize,
    pub hand: usize,
    pub feet: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactParams {
    /// N/m penetration spring
    pub stiffness: f64,
    /// N·s/m normal damping
    pub damping: f64,
    /// N·s/m tangential viscous coefficient
    pub tangent_damping: f64,
    /// Coulomb cone coefficient
    pub friction_mu: f64,
    /// ground plane height (m)
    pub ground_z: f64,
    /// Reference substep used by the per-contact stability caps. Spring and
    /// damper coefficients are limited to `cap_fraction * m_app / dt^2` and
    /// `cap_fraction * m_app / dt` (apparent mass along the contact axis) so
    /// light distal links stay stable under explicit integration.
    pub stability_dt: f64,
    pub cap_fraction: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        ContactParams {
            stiffness: 3.0e4,
            damping: 3.0e2,
            tangent_damping: 3.0e2,
            friction_mu: 0.9,
            ground_z: 0.0,
            stability_dt: 1.0 / 240.0,
            cap_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitParams {
    /// N·m/rad spring engaged outside the joint range
    pub stiffness: f64,
    /// N·m·s/rad damping while violated
    pub damping: f64,
    /// cap on the restoring torque (N·m)
    pub max_torque: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams {
            stiffness: 60.0,
            damping: 0.5,
            max_torque: 40.0,
        }
    }
}

/// Declarative model file: link/joint tables with name references.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub links: Vec<LinkConfigEntry>,
    pub joints: Vec<JointConfigEntry>,
    #[serde(default)]
    pub contact_points: Vec<ContactPointEntry>,
    pub end_effectors: EndEffectorConfig,
    #[serde(default)]
    pub contact: ContactParams,
    #[serde(default)]
    pub limit: LimitParams,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default)]
    pub fixed_base: bool,
    #[serde(default = "default_q_bound")]
    pub q_bound: f64,
    #[serde(default = "default_qdot_bound")]
    pub qdot_bound: f64,
}

fn default_gravity() -> f64 {
    9.81
}
fn default_q_bound() -> f64 {
    1.0e3
}
fn default_qdot_bound() -> f64 {
    1.0e3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkConfigEntry {
    pub name: String,
    pub mass: f64,
    pub inertia: f64,
    pub length: f64,
    pub com_offset: f64,
    pub axis: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointConfigEntry {
    pub name: String,
    pub parent: String,
    pub child: String,
    pub anchor: [f64; 2],
    pub limits: [f64; 2],
    pub kp: f64,
    pub kd: f64,
    pub torque_cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactPointEntry {
    pub link: String,
    pub offset: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndEffectorConfig {
    pub head: String,
    pub hand: String,
    pub feet: Vec<String>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<HumanoidModel, PhysicsError> {
        let find = |name: &str| -> Result<usize, PhysicsError> {
            self.links
                .iter()
                .position(|l| l.name == name)
                .ok_or_else(|| PhysicsError::InvalidModel(format!("unknown link '{name}'")))
        };
        let links: Vec<LinkDef> = self
            .links
            .iter()
            .map(|l| LinkDef {
                name: l.name.clone(),
                mass: l.mass,
                inertia: l.inertia,
                length: l.length,
                com_offset: l.com_offset,
                axis: l.axis,
            })
            .collect();
        let mut joints = Vec::with_capacity(self.joints.len());
        for j in &self.joints {
            joints.push(JointDef {
                name: j.name.clone(),
                parent: find(&j.parent)?,
                child: find(&j.child)?,
                anchor: j.anchor,
                limits: j.limits,
                kp: j.kp,
                kd: j.kd,
                torque_cap: j.torque_cap,
            });
        }
        let contact_points = self
            .contact_points
            .iter()
            .map(|c| {
                Ok(ContactPointDef {
                    link: find(&c.link)?,
                    offset: c.offset,
                })
            })
            .collect::<Result<Vec<_>, PhysicsError>>()?;
        let end_effectors = EndEffectors {
            head: find(&self.end_effectors.head)?,
            hand: find(&self.end_effectors.hand)?,
            feet: self
                .end_effectors
                .feet
                .iter()
                .map(|f| find(f))
                .collect::<Result<Vec<_>, _>>()?,
        };
        HumanoidModel::new(
            links,
            joints,
            contact_points,
            end_effectors,
            self.contact.clone(),
            self.limit.clone(),
            self.gravity,
            self.fixed_base,
            self.q_bound,
            self.qdot_bound,
        )
    }

    pub fn from_toml(text: &str) -> Result<Self, PhysicsError> {
        toml::from_str(text).map_err(|e| PhysicsError::InvalidModel(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, PhysicsError> {
        serde_json::from_str(text).map_err(|e| PhysicsError::InvalidModel(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct HumanoidModel {
    pub links: Vec<LinkDef>,
    pub joints: Vec<JointDef>,
    pub contact_points: Vec<ContactPointDef>,
    pub end_effectors: EndEffectors,
    pub contact: ContactParams,
    pub limit: LimitParams,
    pub gravity: f64,
    pub fixed_base: bool,
    pub q_bound: f64,
    pub qdot_bound: f64,
    /// joints reordered so parents precede children (indices into `joints`)
    pub(crate) joint_topo: Vec<usize>,
    /// for each link: joint indices on the path root -> link, in order
    pub(crate) path_joints: Vec<Vec<usize>>,
    /// for each link: child link indices
    pub(crate) children: Vec<Vec<usize>>,
    /// links in topological order (root first)
    pub(crate) link_topo: Vec<usize>,
}

impl HumanoidModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        links: Vec<LinkDef>,
        joints: Vec<JointDef>,
        contact_points: Vec<ContactPointDef>,
        end_effectors: EndEffectors,
        contact: ContactParams,
        limit: LimitParams,
        gravity: f64,
        fixed_base: bool,
        q_bound: f64,
        qdot_bound: f64,
    ) -> Result<Self, PhysicsError> {
        let n_links = links.len();
        if n_links == 0 {
            return Err(PhysicsError::InvalidModel("no links".into()));
        }
        for l in &links {
            if !(l.mass > 0.0) {
                return Err(PhysicsError::InvalidModel(format!(
                    "link {} mass must be > 0",
                    l.name
                )));
            }
            if !(l.inertia > 0.0) {
                return Err(PhysicsError::InvalidModel(format!(
                    "link {} inertia must be > 0",
                    l.name
                )));
            }
        }
        let mut inbound = vec![usize::MAX; n_links];
        for (ji, j) in joints.iter().enumerate() {
            if j.parent >= n_links || j.child >= n_links {
                return Err(PhysicsError::InvalidModel("joint link index".into()));
            }
            if j.child == 0 {
                return Err(PhysicsError::InvalidModel(
                    "root link cannot be a joint child".into(),
                ));
            }
            if inbound[j.child] != usize::MAX {
                return Err(PhysicsError::InvalidModel(format!(
                    "link {} has two inbound joints",
                    links[j.child].name
                )));
            }
            if !(j.kp >= 0.0 && j.kd >= 0.0) {
                return Err(PhysicsError::InvalidModel(format!(
                    "joint {} gains must be >= 0",
                    j.name
                )));
            }
            if !(j.torque_cap > 0.0) {
                return Err(PhysicsError::InvalidModel(format!(
                    "joint {} torque_cap must be > 0",
                    j.name
                )));
            }
            if j.limits[0] > j.limits[1] {
                return Err(PhysicsError::InvalidModel(format!(
                    "joint {} limits out of order",
                    j.name
                )));
            }
            inbound[j.child] = ji;
        }
        for (li, inb) in inbound.iter().enumerate().skip(1) {
            if *inb == usize::MAX {
                return Err(PhysicsError::InvalidModel(format!(
                    "link {} is not connected to the tree",
                    links[li].name
                )));
            }
        }
        // Topological order by walking down from the root (also rejects cycles).
        let mut children = vec![Vec::new(); n_links];
        for (ji, j) in joints.iter().enumerate() {
            children[j.parent].push((ji, j.child));
        }
        let mut link_topo = vec![0usize];
        let mut joint_topo = Vec::with_capacity(joints.len());
        let mut head = 0;
        while head < link_topo.len() {
            let l = link_topo[head];
            head += 1;
            for &(ji, child) in &children[l] {
                joint_topo.push(ji);
                link_topo.push(child);
            }
        }
        if link_topo.len() != n_links {
            return Err(PhysicsError::InvalidModel(
                "joint graph is not a tree rooted at link 0".into(),
            ));
        }
        let mut path_joints: Vec<Vec<usize>> = vec![Vec::new(); n_links];
        for &ji in &joint_topo {
            let j = &joints[ji];
            let mut path = path_joints[j.parent].clone();
            path.push(ji);
            path_joints[j.child] = path;
        }
        for cp in &contact_points {
            if cp.link >= n_links {
                return Err(PhysicsError::InvalidModel("contact point link index".into()));
            }
        }
        Ok(HumanoidModel {
            children: children
                .into_iter()
                .map(|v| v.into_iter().map(|(_, c)| c).collect())
                .collect(),
            links,
            joints,
            contact_points,
            end_effectors,
            contact,
            limit,
            gravity,
            fixed_base,
            q_bound,
            qdot_bound,
            joint_topo,
            path_joints,
            link_topo,
        })
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    /// Generalized coordinate count (always 3 + joints; the root coordinates
    /// remain in `q` even for fixed-base models).
    pub fn nq(&self) -> usize {
        ROOT_DOFS + self.joints.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    /// Midpoint of the joint range; the zero-action PD target.
    pub fn action_scale(&self, joint: usize) -> f64 {
        let [lo, hi] = self.joints[joint].limits;
        0.5 * (hi - lo)
    }
}

/// The default desk humanoid: 10 links, 9 actuated revolute joints
/// (hips, knees, ankles, shoulder, elbow, neck), floating base at the pelvis.
/// At `q = 0` it stands upright: torso and head up, legs straight down,
/// feet flat, arm hanging.
pub fn default_humanoid() -> ModelConfig {
    let link = |name: &str, mass: f64, inertia: f64, length: f64, com_offset: f64, axis: [f64; 2]| {
        LinkConfigEntry {
            name: name.into(),
            mass,
            inertia,
            length,
            com_offset,
            axis,
        }
    };
    let joint = |name: &str,
                 parent: &str,
                 child: &str,
                 anchor: [f64; 2],
                 limits: [f64; 2],
                 kp: f64,
                 kd: f64| JointConfigEntry {
        name: name.into(),
        parent: parent.into(),
        child: child.into(),
        anchor,
        limits,
        kp,
        kd,
        torque_cap: 200.0,
    };
    let up = [0.0, 1.0];
    let down = [0.0, -1.0];
    let fwd = [1.0, 0.0];
    ModelConfig {
        links: vec![
            link("torso", 16.0, 0.50, 0.55, 0.27, up),
            link("head", 4.0, 0.03, 0.22, 0.11, up),
            link("thigh_l", 7.0, 0.12, 0.42, 0.20, down),
            link("shin_l", 3.5, 0.06, 0.43, 0.20, down),
            link("foot_l", 2.0, 0.040, 0.20, 0.06, fwd),
            link("thigh_r", 7.0, 0.12, 0.42, 0.20, down),
            link("shin_r", 3.5, 0.06, 0.43, 0.20, down),
            link("foot_r", 2.0, 0.040, 0.20, 0.06, fwd),
            link("upper_arm", 2.2, 0.020, 0.32, 0.15, down),
            link("forearm", 1.6, 0.015, 0.30, 0.14, down),
        ],
        joints: vec![
            joint("hip_l", "torso", "thigh_l", [0.0, 0.0], [-1.2, 1.2], 1000.0, 15.0),
            joint("knee_l", "thigh_l", "shin_l", [0.0, -0.42], [-2.3, 0.01], 900.0, 10.0),
            joint("ankle_l", "shin_l", "foot_l", [0.0, -0.43], [-0.9, 0.7], 700.0, 3.0),
            joint("hip_r", "torso", "thigh_r", [0.0, 0.0], [-1.2, 1.2], 1000.0, 15.0),
            joint("knee_r", "thigh_r", "shin_r", [0.0, -0.42], [-2.3, 0.01], 900.0, 10.0),
            joint("ankle_r", "shin_r", "foot_r", [0.0, -0.43], [-0.9, 0.7], 700.0, 3.0),
            joint("shoulder", "torso", "upper_arm", [0.0, 0.47], [-2.5, 2.5], 150.0, 5.0),
            joint("elbow", "upper_arm", "forearm", [0.0, -0.32], [-0.05, 2.4], 60.0, 1.0),
            joint("neck", "torso", "head", [0.0, 0.55], [-0.6, 0.6], 50.0, 2.0),
        ],
        contact_points: vec![
            ContactPointEntry { link: "foot_l".into(), offset: [-0.06, -0.03] },
            ContactPointEntry { link: "foot_l".into(), offset: [0.16, -0.03] },
            ContactPointEntry { link: "foot_r".into(), offset: [-0.06, -0.03] },
            ContactPointEntry { link: "foot_r".into(), offset: [0.16, -0.03] },
            // Sparse body points so fallen poses rest on the ground instead
            // of sinking through it.
            ContactPointEntry { link: "torso".into(), offset: [0.0, 0.0] },
            ContactPointEntry { link: "head".into(), offset: [0.0, 0.22] },
            ContactPointEntry { link: "shin_l".into(), offset: [0.0, 0.0] },
            ContactPointEntry { link: "shin_r".into(), offset: [0.0, 0.0] },
            ContactPointEntry { link: "forearm".into(), offset: [0.0, -0.30] },
        ],
        end_effectors: EndEffectorConfig {
            head: "head".into(),
            hand: "forearm".into(),
            feet: vec!["foot_l".into(), "foot_r".into()],
        },
        contact: ContactParams::default(),
        limit: LimitParams::default(),
        gravity: 9.81,
        fixed_base: false,
        q_bound: 1.0e3,
        qdot_bound: 1.0e3,
    }
}

/// Pelvis height of the rest pose (legs straight, soles on the ground).
pub fn standing_root_height(model: &HumanoidModel) -> f64 {
    // thigh + shin lengths plus the sole offset below the ankle
    let thigh = model.links[model.link_index("thigh_l").expect("thigh_l")].length;
    let shin = model.links[model.link_index("shin_l").expect("shin_l")].length;
    let sole = 0.03;
    thigh + shin + sole
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_humanoid_builds() {
        let model = default_humanoid().build().unwrap();
        assert_eq!(model.n_links(), 10);
        assert_eq!(model.n_joints(), 9);
        assert_eq!(model.nq(), 12);
        assert!((model.total_mass() - 48.8).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = default_humanoid();
        let text = toml::to_string(&cfg).unwrap();
        let back = ModelConfig::from_toml(&text).unwrap();
        let model = back.build().unwrap();
        assert_eq!(model.n_joints(), 9);
    }

    #[test]
    fn bad_models_are_rejected() {
        let mut cfg = default_humanoid();
        cfg.links[0].mass = 0.0;
        assert!(cfg.build().is_err());

        let mut cfg = default_humanoid();
        cfg.joints[0].child = "torso".into();
        assert!(cfg.build().is_err());

        let mut cfg = default_humanoid();
        cfg.joints[0].parent = "nope".into();
        assert!(cfg.build().is_err());
    }

    #[test]
    fn paths_reach_the_root() {
        let model = default_humanoid().build().unwrap();
        let foot = model.link_index("foot_l").unwrap();
        let names: Vec<&str> = model.path_joints[foot]
            .iter()
            .map(|&j| model.joints[j].name.as_str())
            .collect();
        assert_eq!(names, vec!["hip_l", "knee_l", "ankle_l"]);
    }
}
