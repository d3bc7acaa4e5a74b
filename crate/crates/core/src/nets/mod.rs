//! Dense networks, diagonal Gaussians, and exact gradients.
//!
//! All training math is f64. Backpropagation is implemented for the closed
//! set of compositions this crate actually uses (PPO surrogate, value MSE,
//! and the distillation objective), assembled from per-op vector-Jacobian
//! products rather than a general tape. Every composed loss is checked
//! against central finite differences in the test suites.

mod adam;
mod checkpoint;
pub mod fdcheck;
mod gaussian;
mod mlp;

pub use adam::{clip_grad_norm, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use checkpoint::{params_hash, Checkpoint, CheckpointError};
pub use gaussian::{kl_diag_gaussian, kl_rows, log_pdf_rows, DiagGaussian};
pub use mlp::{
    Activation, ForwardCache, Head, HeadKind, Layer, LayerGrads, MlpGrads, MlpParams,
    LOG_STD_MAX, LOG_STD_MIN,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetsError {
    #[error("dimension mismatch: expected {expected}, got {got} for {what}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
    #[error("parameter block {0} produced a non-finite gradient")]
    NonFiniteGrad(String),
}
