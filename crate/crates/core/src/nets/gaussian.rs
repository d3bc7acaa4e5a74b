//! Diagonal Gaussian distributions: log-density, closed-form KL, and
//! reparameterized sampling.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagGaussian {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Array1<f64>, std: Array1<f64>) -> Self {
        assert_eq!(mean.len(), std.len(), "mean/std dims must match");
        debug_assert!(std.iter().all(|&s| s >= 0.0 && s.is_finite()));
        DiagGaussian { mean, std }
    }

    pub fn standard(dim: usize) -> Self {
        DiagGaussian {
            mean: Array1::zeros(dim),
            std: Array1::ones(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Sum over dims of univariate normal log-densities.
    pub fn log_pdf(&self, x: &Array1<f64>) -> f64 {
        assert_eq!(x.len(), self.dim(), "log_pdf dim mismatch");
        let mut acc = 0.0;
        for i in 0..self.dim() {
            let z = (x[i] - self.mean[i]) / self.std[i];
            acc += -0.5 * z * z - self.std[i].ln() - 0.5 * LN_2PI;
        }
        acc
    }

    /// `z = mean + std ∘ eps`, `eps ~ N(0, I)`; returns `(z, eps)` so callers
    /// can differentiate through mean and std.
    pub fn reparam_sample(&self, rng: &mut ChaCha8Rng) -> (Array1<f64>, Array1<f64>) {
        let eps = Array1::from_shape_fn(self.dim(), |_| standard_normal(rng));
        let z = &self.mean + &(&self.std * &eps);
        (z, eps)
    }
}

/// Box-Muller standard normal. Kept local (rather than `rand_distr`) so the
/// exact draw sequence is pinned by this crate alone.
#[inline]
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Draw u1 in (0, 1] to avoid ln(0).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Closed-form KL(a || b) for diagonal Gaussians:
/// `Σ_i ln(σb/σa) + (σa² + (μa−μb)²) / (2 σb²) − 1/2`.
pub fn kl_diag_gaussian(a: &DiagGaussian, b: &DiagGaussian) -> f64 {
    assert_eq!(a.dim(), b.dim(), "kl dim mismatch");
    let mut acc = 0.0;
    for i in 0..a.dim() {
        let (sa, sb) = (a.std[i], b.std[i]);
        let dm = a.mean[i] - b.mean[i];
        acc += (sb / sa).ln() + (sa * sa + dm * dm) / (2.0 * sb * sb) - 0.5;
    }
    acc
}

/// Per-row log-density for a batch of means sharing a state-independent std.
pub fn log_pdf_rows(mean: &Array2<f64>, std: &Array1<f64>, x: &Array2<f64>) -> Array1<f64> {
    let (rows, dim) = mean.dim();
    assert_eq!(x.dim(), (rows, dim));
    assert_eq!(std.len(), dim);
    let base: f64 = std.iter().map(|s| -s.ln() - 0.5 * LN_2PI).sum();
    Array1::from_shape_fn(rows, |r| {
        let mut acc = base;
        for i in 0..dim {
            let z = (x[[r, i]] - mean[[r, i]]) / std[i];
            acc -= 0.5 * z * z;
        }
        acc
    })
}

/// Per-row KL(a || b) for batches of means with shared stds.
pub fn kl_rows(
    mu_a: &Array2<f64>,
    std_a: &Array1<f64>,
    mu_b: &Array2<f64>,
    std_b: &Array1<f64>,
) -> Array1<f64> {
    let (rows, dim) = mu_a.dim();
    assert_eq!(mu_b.dim(), (rows, dim));
    let base: f64 = (0..dim)
        .map(|i| (std_b[i] / std_a[i]).ln() + std_a[i] * std_a[i] / (2.0 * std_b[i] * std_b[i]) - 0.5)
        .sum();
    Array1::from_shape_fn(rows, |r| {
        let mut acc = base;
        for i in 0..dim {
            let dm = mu_a[[r, i]] - mu_b[[r, i]];
            acc += dm * dm / (2.0 * std_b[i] * std_b[i]);
        }
        acc
    })
}
