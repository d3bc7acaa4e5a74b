//! Adam optimizer over [`MlpParams`] blocks.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::mlp::{Head, MlpGrads, MlpParams};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    m_layers: Vec<(Array2<f64>, Array1<f64>)>,
    v_layers: Vec<(Array2<f64>, Array1<f64>)>,
    m_log_std: Option<Array1<f64>>,
    v_log_std: Option<Array1<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        let zeros = |p: &MlpParams| {
            p.layers
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect::<Vec<_>>()
        };
        let ls = match &params.head {
            Head::Linear => None,
            Head::Gaussian { log_std } => Some(Array1::zeros(log_std.len())),
        };
        AdamState {
            m_layers: zeros(params),
            v_layers: zeros(params),
            m_log_std: ls.clone(),
            v_log_std: ls,
            t: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One Adam update. Gradients are for a loss being *minimized*.
    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpGrads, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);

        #[inline]
        fn update(p: &mut f64, m: &mut f64, v: &mut f64, g: f64, lr: f64, bc1: f64, bc2: f64) {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }

        for (i, layer) in params.layers.iter_mut().enumerate() {
            let g = &grads.layers[i];
            let (mw, mb) = &mut self.m_layers[i];
            let (vw, vb) = &mut self.v_layers[i];
            for ((p, m), (v, g)) in layer
                .w
                .iter_mut()
                .zip(mw.iter_mut())
                .zip(vw.iter_mut().zip(g.dw.iter()))
            {
                update(p, m, v, *g, lr, bc1, bc2);
            }
            for ((p, m), (v, g)) in layer
                .b
                .iter_mut()
                .zip(mb.iter_mut())
                .zip(vb.iter_mut().zip(g.db.iter()))
            {
                update(p, m, v, *g, lr, bc1, bc2);
            }
        }
        if let (Head::Gaussian { log_std }, Some(dls)) = (&mut params.head, &grads.d_log_std) {
            let m = self.m_log_std.as_mut().unwrap();
            let v = self.v_log_std.as_mut().unwrap();
            for ((p, m), (v, g)) in log_std
                .iter_mut()
                .zip(m.iter_mut())
                .zip(v.iter_mut().zip(dls.iter()))
            {
                update(p, m, v, *g, lr, bc1, bc2);
            }
        }
    }
}

/// Scale gradients down so their global L2 norm is at most `max_norm`.
/// Returns the pre-clip norm.
pub fn clip_grad_norm(grads: &mut MlpGrads, max_norm: f64) -> f64 {
    let norm = grads.global_norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::mlp::{Activation, HeadKind};
    use crate::rng::stream;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut rng = stream(31, "init/adam");
        let mut net = MlpParams::new(&[2, 3, 1], Activation::SiLU, HeadKind::Linear, &mut rng);
        let before = net.clone();
        let grads = MlpGrads::zeros_like(&net);
        let mut opt = AdamState::new(&net);
        opt.step(&mut net, &grads, 1e-3);
        for (a, b) in net.layers.iter().zip(&before.layers) {
            assert_eq!(a.w, b.w);
            assert_eq!(a.b, b.b);
        }
        assert_eq!(opt.steps_taken(), 1);
    }

    #[test]
    fn first_step_magnitude_is_about_lr() {
        let mut net = MlpParams::zeros(&[1, 1], Activation::ReLU, HeadKind::Linear);
        let mut grads = MlpGrads::zeros_like(&net);
        grads.layers[0].dw[[0, 0]] = 3.7;
        let mut opt = AdamState::new(&net);
        let lr = 0.01;
        opt.step(&mut net, &grads, lr);
        // m_hat = g, v_hat = g^2  =>  delta = lr * g / (|g| + eps) ~ lr * sign(g)
        let delta = net.layers[0].w[[0, 0]];
        assert!((delta + lr).abs() < 1e-6, "delta {delta}");
    }

    #[test]
    fn two_steps_match_hand_computed_scalar_trace() {
        // Scalar parameter, gradients g1 = 1.0, g2 = -2.0, lr = 0.1.
        let (b1, b2, eps) = (ADAM_BETA1, ADAM_BETA2, ADAM_EPS);
        let lr = 0.1;
        let mut p_ref: f64 = 0.5;
        let (mut m, mut v) = (0.0, 0.0);
        for (t, g) in [(1, 1.0f64), (2, -2.0f64)] {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            p_ref -= lr * mh / (vh.sqrt() + eps);
        }

        let mut net = MlpParams::zeros(&[1, 1], Activation::ReLU, HeadKind::Linear);
        net.layers[0].w[[0, 0]] = 0.5;
        let mut opt = AdamState::new(&net);
        for g in [1.0, -2.0] {
            let mut grads = MlpGrads::zeros_like(&net);
            grads.layers[0].dw[[0, 0]] = g;
            opt.step(&mut net, &grads, lr);
        }
        assert!((net.layers[0].w[[0, 0]] - p_ref).abs() < 1e-15);
    }

    #[test]
    fn clip_reduces_large_norms_only() {
        let net = MlpParams::zeros(&[2, 2], Activation::ReLU, HeadKind::Linear);
        let mut grads = MlpGrads::zeros_like(&net);
        grads.layers[0].dw.fill(10.0);
        let norm = clip_grad_norm(&mut grads, 1.0);
        assert!((norm - 20.0).abs() < 1e-12);
        assert!((grads.global_norm() - 1.0).abs() < 1e-12);
        let norm2 = clip_grad_norm(&mut grads, 5.0);
        assert!((norm2 - 1.0).abs() < 1e-12);
        assert!((grads.global_norm() - 1.0).abs() < 1e-12);
    }
}
