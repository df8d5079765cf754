//! Probe design: adaptive ε schedule, capped multilevel waterfilling for
//! exploitation and uniform sampling on the estimated-constraint slice for
//! exploration.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::units::dot;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ControlError {
    #[error("estimate has zero norm")]
    ZeroEstimate,
    #[error("slice ĝᵀp = 1 does not meet the power box")]
    EmptySlice,
}

/// SU transmit powers (mW) with their caps.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerVector {
    pub p: Vec<f64>,
    pub p_max: Vec<f64>,
}

impl PowerVector {
    pub fn zeros(p_max: &[f64]) -> Self {
        Self { p: vec![0.0; p_max.len()], p_max: p_max.to_vec() }
    }

    pub fn within_bounds(&self, tol: f64) -> bool {
        self.p.iter().zip(&self.p_max).all(|(p, m)| *p >= -tol && *p <= m + tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub d_th: f64,
}

impl EpsilonSchedule {
    pub fn epsilon(&self, d_max_val: f64, g_est_norm: f64) -> Result<f64, ControlError> {
        epsilon(d_max_val, g_est_norm, self.d_th)
    }
}

/// Exploration probability `1 − d_th/d_rel` above the threshold, else 0,
/// with `d_rel = d_max / ‖ĝ‖`.
pub fn epsilon(d_max_val: f64, g_est_norm: f64, d_th: f64) -> Result<f64, ControlError> {
    if g_est_norm == 0.0 {
        return Err(ControlError::ZeroEstimate);
    }
    let d_rel = d_max_val / g_est_norm;
    Ok(if d_rel > d_th { 1.0 - d_th / d_rel } else { 0.0 })
}

/// Coordinates whose estimate is below this get full power.
const NEGLIGIBLE_GAIN: f64 = 1e-12;
const BISECTION_ITERS: usize = 200;

/// Capped waterfilling level for multiplier `lambda`.
fn level(lambda: f64, g: f64, h: f64, noise: f64, p_max: f64) -> f64 {
    (1.0 / (lambda * g) - noise / h).clamp(0.0, p_max)
}

/// Capped waterfilling on `ĝᵀp = 1`, together with the multiplier λ
/// (zero when the constraint is inactive).
pub fn waterfill_with_multiplier(g_est: &[f64], h: &[f64], noise: &[f64], p_max: &[f64]) -> (Vec<f64>, f64) {
    let n = g_est.len();
    let full: f64 = g_est.iter().zip(p_max).map(|(g, m)| g.max(0.0) * m).sum();
    if full <= 1.0 {
        return (p_max.to_vec(), 0.0);
    }
    let mut p = vec![0.0; n];
    let mut target = 1.0;
    let mut active = Vec::with_capacity(n);
    for i in 0..n {
        if g_est[i] < NEGLIGIBLE_GAIN {
            p[i] = p_max[i];
            target -= g_est[i].max(0.0) * p_max[i];
        } else {
            active.push(i);
        }
    }
    let load = |lambda: f64| -> f64 {
        active.iter().map(|&i| g_est[i] * level(lambda, g_est[i], h[i], noise[i], p_max[i])).sum()
    };
    let mut lo = 1e-12;
    if load(lo) <= target {
        for &i in &active {
            p[i] = level(lo, g_est[i], h[i], noise[i], p_max[i]);
        }
        return (p, lo);
    }
    let mut hi = 1.0;
    while load(hi) >= target {
        hi *= 2.0;
    }
    for _ in 0..BISECTION_ITERS {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if load(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // lo sits on the feasible side of the crossing; pin the residual onto a
    // coordinate strictly inside its caps
    let lambda = lo;
    for &i in &active {
        p[i] = level(lambda, g_est[i], h[i], noise[i], p_max[i]);
    }
    let residual = target - active.iter().map(|&i| g_est[i] * p[i]).sum::<f64>();
    if let Some(&i) = active
        .iter()
        .find(|&&i| p[i] > 0.0 && p[i] < p_max[i])
    {
        p[i] = (p[i] + residual / g_est[i]).clamp(0.0, p_max[i]);
    }
    (p, lambda)
}

/// Throughput-maximizing probe on the current estimate.
pub fn exploit_waterfill(g_est: &[f64], h: &[f64], noise: &[f64], p_max: &[f64]) -> PowerVector {
    PowerVector { p: waterfill_with_multiplier(g_est, h, noise, p_max).0, p_max: p_max.to_vec() }
}

/// Uniform draw on `{p : ĝᵀp = 1, 0 ≤ p ≤ p_max}` by Hit-and-Run inside the
/// hyperplane, `steps` moves from the scaled-diagonal point.
pub fn explore_sample<R: Rng + ?Sized>(
    g_est: &[f64],
    p_max: &[f64],
    steps: usize,
    rng: &mut R,
) -> Result<PowerVector, ControlError> {
    let n = g_est.len();
    // work in q = p / p_max, constraint wᵀq = 1
    let w: Vec<f64> = g_est.iter().zip(p_max).map(|(g, m)| g.max(0.0) * m).collect();
    let total: f64 = w.iter().sum();
    if total < 1.0 || total == 0.0 {
        return Err(ControlError::EmptySlice);
    }
    let mut q = vec![1.0 / total; n];
    let w_norm = dot(&w, &w).sqrt();
    let w_hat: Vec<f64> = w.iter().map(|v| v / w_norm).collect();
    let mut dir = vec![0.0; n];
    if n > 1 && total > 1.0 {
        for _ in 0..steps {
            for d in dir.iter_mut() {
                *d = rng.sample(StandardNormal);
            }
            let along = dot(&dir, &w_hat);
            for (d, wh) in dir.iter_mut().zip(&w_hat) {
                *d -= along * wh;
            }
            let mut t_lo = f64::NEG_INFINITY;
            let mut t_hi = f64::INFINITY;
            for i in 0..n {
                let d = dir[i];
                if d > 0.0 {
                    t_hi = t_hi.min((1.0 - q[i]) / d);
                    t_lo = t_lo.max(-q[i] / d);
                } else if d < 0.0 {
                    t_hi = t_hi.min(-q[i] / d);
                    t_lo = t_lo.max((1.0 - q[i]) / d);
                }
            }
            if !(t_hi > t_lo) || !t_hi.is_finite() || !t_lo.is_finite() {
                continue;
            }
            let t = t_lo + rng.gen::<f64>() * (t_hi - t_lo);
            for (qi, d) in q.iter_mut().zip(&dir) {
                *qi = (*qi + t * d).clamp(0.0, 1.0);
            }
        }
    }
    let mut p: Vec<f64> = q.iter().zip(p_max).map(|(q, m)| q * m).collect();
    let load = dot(g_est, &p);
    if load > 0.0 {
        for (pi, m) in p.iter_mut().zip(p_max) {
            *pi = (*pi / load).min(*m);
        }
    }
    Ok(PowerVector { p, p_max: p_max.to_vec() })
}

/// Sum spectral efficiency `Σ log2(1 + h_i p_i / N_i)`, bit/s/Hz.
pub fn capacity(p: &[f64], h: &[f64], noise: &[f64]) -> f64 {
    p.iter()
        .zip(h.iter().zip(noise))
        .map(|(p, (h, n))| (1.0 + h * p / n).log2())
        .sum()
}
