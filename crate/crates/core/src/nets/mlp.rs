//! Layered dense networks with SiLU/ReLU hidden activations.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NetsError;

/// State-independent log-std entries are clamped to this range, so the
/// distribution std always lies in `[e^-8, e^2]`.
pub const LOG_STD_MIN: f64 = -8.0;
pub const LOG_STD_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    SiLU,
    ReLU,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::SiLU => x * sigmoid(x),
            Activation::ReLU => x.max(0.0),
        }
    }

    /// Derivative with respect to the pre-activation.
    #[inline]
    pub fn grad(self, x: f64) -> f64 {
        match self {
            Activation::SiLU => {
                let s = sigmoid(x);
                s * (1.0 + x * (1.0 - s))
            }
            Activation::ReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One dense layer; `w` is `(out, in)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Output head: plain linear, or linear mean plus a state-independent
/// (trainable) log-std vector defining a diagonal Gaussian.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Head {
    Linear,
    Gaussian { log_std: Array1<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadKind {
    Linear,
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub head: Head,
}

impl MlpParams {
    /// Glorot-uniform init. `dims` is `[in, hidden..., out]`.
    pub fn new(dims: &[usize], activation: Activation, head: HeadKind, rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let layers = dims
            .windows(2)
            .map(|d| {
                let (n_in, n_out) = (d[0], d[1]);
                let bound = (6.0 / (n_in + n_out) as f64).sqrt();
                let w = Array2::from_shape_fn((n_out, n_in), |_| rng.gen_range(-bound..bound));
                Layer {
                    w,
                    b: Array1::zeros(n_out),
                }
            })
            .collect();
        let head = match head {
            HeadKind::Linear => Head::Linear,
            HeadKind::Gaussian => Head::Gaussian {
                log_std: Array1::zeros(*dims.last().unwrap()),
            },
        };
        MlpParams {
            layers,
            activation,
            head,
        }
    }

    /// All-zero parameters (useful for tests and rest-pose policies).
    pub fn zeros(dims: &[usize], activation: Activation, head: HeadKind) -> Self {
        let layers = dims
            .windows(2)
            .map(|d| Layer {
                w: Array2::zeros((d[1], d[0])),
                b: Array1::zeros(d[1]),
            })
            .collect();
        let head = match head {
            HeadKind::Linear => Head::Linear,
            HeadKind::Gaussian => Head::Gaussian {
                log_std: Array1::zeros(*dims.last().unwrap()),
            },
        };
        MlpParams {
            layers,
            activation,
            head,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().w.nrows()
    }

    /// Shrink the final layer (and zero its bias); keeps early policy
    /// outputs near the rest pose.
    pub fn scale_final_layer(&mut self, factor: f64) {
        let last = self.layers.last_mut().unwrap();
        last.w.mapv_inplace(|v| v * factor);
        last.b.fill(0.0);
    }

    /// Distribution std for Gaussian-headed nets: `exp(clamp(log_std))`.
    pub fn std(&self) -> Option<Array1<f64>> {
        match &self.head {
            Head::Linear => None,
            Head::Gaussian { log_std } => {
                Some(log_std.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX).exp()))
            }
        }
    }

    /// Checked single-input forward pass (the public `mlp_forward` surface).
    pub fn try_forward(&self, x: &Array1<f64>) -> Result<Array1<f64>, NetsError> {
        if x.len() != self.in_dim() {
            return Err(NetsError::DimMismatch {
                what: "mlp input",
                expected: self.in_dim(),
                got: x.len(),
            });
        }
        let out = self.forward1(x);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(NetsError::NonFinite("mlp forward"));
        }
        Ok(out)
    }

    /// Single-input forward pass (mean output for Gaussian-headed nets).
    pub fn forward1(&self, x: &Array1<f64>) -> Array1<f64> {
        let n = self.layers.len();
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.w.dot(&cur);
            z += &layer.b;
            if i + 1 < n {
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            cur = z;
        }
        cur
    }

    /// Batched forward pass; `x` is `(batch, in)`.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Array2<f64> {
        let n = self.layers.len();
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = cur.dot(&layer.w.t());
            z += &layer.b;
            if i + 1 < n {
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            cur = z;
        }
        cur
    }

    /// Forward pass retaining everything `backward` needs.
    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, ForwardCache) {
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre_acts = Vec::with_capacity(n.saturating_sub(1));
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(cur.clone());
            let mut z = cur.dot(&layer.w.t());
            z += &layer.b;
            if i + 1 < n {
                pre_acts.push(z.clone());
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            cur = z;
        }
        (cur, ForwardCache { inputs, pre_acts })
    }

    /// Backpropagate `d_out` (gradient of a scalar loss w.r.t. the batched
    /// output). Returns parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, cache: &ForwardCache, d_out: &Array2<f64>) -> (MlpGrads, Array2<f64>) {
        let n = self.layers.len();
        let mut layer_grads = vec![
            LayerGrads {
                dw: Array2::zeros((0, 0)),
                db: Array1::zeros(0)
            };
            n
        ];
        let mut d_cur = d_out.clone();
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let input = &cache.inputs[l];
            let dw = d_cur.t().dot(input);
            let db = d_cur.sum_axis(Axis(0));
            let d_input = d_cur.dot(&layer.w);
            layer_grads[l] = LayerGrads { dw, db };
            if l > 0 {
                let pre = &cache.pre_acts[l - 1];
                d_cur = d_input * pre.mapv(|v| self.activation.grad(v));
            } else {
                d_cur = d_input;
            }
        }
        (
            MlpGrads {
                layers: layer_grads,
                d_log_std: match &self.head {
                    Head::Linear => None,
                    Head::Gaussian { log_std } => Some(Array1::zeros(log_std.len())),
                },
            },
            d_cur,
        )
    }

    /// Fold a gradient w.r.t. the std vector into the log-std parameter,
    /// respecting the clamp (no gradient outside the active range).
    pub fn accumulate_std_grad(&self, grads: &mut MlpGrads, d_std: &Array1<f64>) {
        if let Head::Gaussian { log_std } = &self.head {
            let std = self.std().unwrap();
            let dls = grads
                .d_log_std
                .as_mut()
                .expect("gaussian head grads carry d_log_std");
            for i in 0..log_std.len() {
                let gate = log_std[i] > LOG_STD_MIN && log_std[i] < LOG_STD_MAX;
                if gate {
                    dls[i] += d_std[i] * std[i];
                }
            }
        }
    }

    pub fn num_params(&self) -> usize {
        let mut n: usize = self.layers.iter().map(|l| l.w.len() + l.b.len()).sum();
        if let Head::Gaussian { log_std } = &self.head {
            n += log_std.len();
        }
        n
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().all(|v| v.is_finite()) && l.b.iter().all(|v| v.is_finite()))
            && match &self.head {
                Head::Linear => true,
                Head::Gaussian { log_std } => log_std.iter().all(|v| v.is_finite()),
            }
    }
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: Vec<Array2<f64>>,
    pub pre_acts: Vec<Array2<f64>>,
}

#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub dw: Array2<f64>,
    pub db: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<LayerGrads>,
    pub d_log_std: Option<Array1<f64>>,
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGrads {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrads {
                    dw: Array2::zeros(l.w.dim()),
                    db: Array1::zeros(l.b.len()),
                })
                .collect(),
            d_log_std: match &params.head {
                Head::Linear => None,
                Head::Gaussian { log_std } => Some(Array1::zeros(log_std.len())),
            },
        }
    }

    pub fn add_assign(&mut self, other: &MlpGrads) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.dw += &b.dw;
            a.db += &b.db;
        }
        if let (Some(a), Some(b)) = (self.d_log_std.as_mut(), other.d_log_std.as_ref()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.dw.mapv_inplace(|v| v * s);
            l.db.mapv_inplace(|v| v * s);
        }
        if let Some(d) = self.d_log_std.as_mut() {
            d.mapv_inplace(|v| v * s);
        }
    }

    pub fn global_norm(&self) -> f64 {
        let mut sq = 0.0;
        for l in &self.layers {
            sq += l.dw.iter().map(|v| v * v).sum::<f64>();
            sq += l.db.iter().map(|v| v * v).sum::<f64>();
        }
        if let Some(d) = &self.d_log_std {
            sq += d.iter().map(|v| v * v).sum::<f64>();
        }
        sq.sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.dw.iter().all(|v| v.is_finite()) && l.db.iter().all(|v| v.is_finite()))
            && self
                .d_log_std
                .as_ref()
                .map_or(true, |d| d.iter().all(|v| v.is_finite()))
    }
}
