//! Trajectory export: JSONL, one frame per line with generalized state and
//! derived per-link pose/velocity.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fk::forward_kinematics;
use super::model::HumanoidModel;
use super::state::HumanoidState;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryLink {
    pub p: [f64; 2],
    pub theta: f64,
    pub v: [f64; 2],
    pub omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryFrame {
    pub time_s: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub links: Vec<TrajectoryLink>,
}

impl TrajectoryFrame {
    pub fn from_state(model: &HumanoidModel, state: &HumanoidState) -> Self {
        let kin = forward_kinematics(model, &state.q, &state.qdot)
            .expect("state dims match model");
        TrajectoryFrame {
            time_s: state.time_s,
            q: state.q.clone(),
            qdot: state.qdot.clone(),
            links: kin
                .links
                .iter()
                .map(|l| TrajectoryLink {
                    p: l.tip,
                    theta: l.angle,
                    v: l.v_tip,
                    omega: l.omega,
                })
                .collect(),
        }
    }
}

pub fn export_trajectory(
    path: &Path,
    model: &HumanoidModel,
    states: &[HumanoidState],
) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    for s in states {
        let frame = TrajectoryFrame::from_state(model, s);
        serde_json::to_writer(&mut w, &frame)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_trajectory(path: &Path) -> io::Result<Vec<TrajectoryFrame>> {
    let r = BufReader::new(File::open(path)?);
    let mut frames = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        frames.push(serde_json::from_str(&line)?);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::model::default_humanoid;

    #[test]
    fn export_and_read_round_trip() {
        let model = default_humanoid().build().unwrap();
        let mut s = HumanoidState::zeros(&model);
        s.q[1] = 0.88;
        let states = vec![s.clone(), {
            let mut t = s.clone();
            t.q[0] = 0.5;
            t.time_s = 1.0 / 30.0;
            t
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.jsonl");
        export_trajectory(&path, &model, &states).unwrap();
        let frames = read_trajectory(&path).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].q, states[0].q);
        assert_eq!(frames[1].links.len(), model.n_links());
        assert_eq!(frames[1].q[0], 0.5);
    }
}
