//! Finite-difference gradient checking utilities.
//!
//! Test-only support: the oracles here stay independent of the analytic
//! backward paths they validate. They are exposed publicly so integration
//! suites (and the acceptance gate) can reuse them.

use ndarray::Array1;

use super::mlp::{Head, MlpGrads, MlpParams};

/// Flatten all trainable parameters into one vector
/// (layer order: w row-major, then b; log-std last).
pub fn param_vector(p: &MlpParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.num_params());
    for l in &p.layers {
        out.extend(l.w.iter());
        out.extend(l.b.iter());
    }
    if let Head::Gaussian { log_std } = &p.head {
        out.extend(log_std.iter());
    }
    out
}

pub fn set_param_vector(p: &mut MlpParams, v: &[f64]) {
    let mut it = v.iter();
    for l in &mut p.layers {
        for w in l.w.iter_mut() {
            *w = *it.next().unwrap();
        }
        for b in l.b.iter_mut() {
            *b = *it.next().unwrap();
        }
    }
    if let Head::Gaussian { log_std } = &mut p.head {
        for s in log_std.iter_mut() {
            *s = *it.next().unwrap();
        }
    }
    assert!(it.next().is_none(), "param vector length mismatch");
}

/// Flatten gradients in the same order as [`param_vector`].
pub fn grad_vector(g: &MlpGrads) -> Vec<f64> {
    let mut out = Vec::new();
    for l in &g.layers {
        out.extend(l.dw.iter());
        out.extend(l.db.iter());
    }
    if let Some(d) = &g.d_log_std {
        out.extend(d.iter());
    }
    out
}

/// Central finite differences of `loss` over every parameter of `p`.
pub fn central_diff<F: FnMut(&MlpParams) -> f64>(
    p: &mut MlpParams,
    mut loss: F,
    h: f64,
) -> Vec<f64> {
    let theta = param_vector(p);
    let mut fd = vec![0.0; theta.len()];
    let mut work = theta.clone();
    for i in 0..theta.len() {
        work[i] = theta[i] + h;
        set_param_vector(p, &work);
        let up = loss(p);
        work[i] = theta[i] - h;
        set_param_vector(p, &work);
        let down = loss(p);
        work[i] = theta[i];
        fd[i] = (up - down) / (2.0 * h);
    }
    set_param_vector(p, &theta);
    fd
}

/// Directional derivative check for larger nets: compares `grad · dir`
/// against a central difference along `dir`.
pub fn directional_diff<F: FnMut(&MlpParams) -> f64>(
    p: &mut MlpParams,
    mut loss: F,
    dir: &Array1<f64>,
    h: f64,
) -> f64 {
    let theta = param_vector(p);
    assert_eq!(theta.len(), dir.len());
    let shift = |sign: f64| -> Vec<f64> {
        theta
            .iter()
            .zip(dir.iter())
            .map(|(t, d)| t + sign * h * d)
            .collect()
    };
    set_param_vector(p, &shift(1.0));
    let up = loss(p);
    set_param_vector(p, &shift(-1.0));
    let down = loss(p);
    set_param_vector(p, &theta);
    (up - down) / (2.0 * h)
}

/// Max relative error between two gradient vectors, with an absolute floor
/// below which entries are compared absolutely.
pub fn max_rel_err(analytic: &[f64], fd: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), fd.len());
    analytic
        .iter()
        .zip(fd.iter())
        .map(|(a, f)| {
            let denom = a.abs().max(f.abs());
            if denom < floor {
                (a - f).abs()
            } else {
                (a - f).abs() / denom
            }
        })
        .fold(0.0, f64::max)
}
