//! Desk-scale physics-based character control lab.
//!
//! The pipeline has three stages, each reusing the previous one's artifact:
//!
//! 1. [`imitator`] trains a PPO motion-tracking policy (the *teacher*) on a
//!    dataset of reference clips, with progressive hard-negative mining.
//! 2. [`latent`] distills the teacher online into an encoder/decoder/prior
//!    triple with a variational information bottleneck (the *student*).
//! 3. [`tasks`] trains small high-level policies that act in the frozen
//!    latent space (residuals on the learned prior mean) for downstream
//!    control, and samples the prior directly for generative rollouts.
//!
//! Everything below those stages is self-contained: [`physics`] is a planar
//! reduced-coordinate rigid-body simulator with PD actuation and penalty
//! contacts, [`motion`] generates and curates reference clips, [`nets`] is a
//! small f64 dense-network stack with exact gradients for the closed set of
//! losses used here, and [`ppo`] is the shared RL engine. [`harness`]-level
//! concerns (metrics, experiment configs, run directories, SVG plots) live in
//! [`metrics`], [`experiment`] and [`plot`].

pub mod config;
pub mod env;
pub mod experiment;
pub mod imitator;
pub mod latent;
pub mod metrics;
pub mod motion;
pub mod nets;
pub mod physics;
pub mod plot;
pub mod ppo;
pub mod rng;
pub mod tasks;
