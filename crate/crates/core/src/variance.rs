//! Limiting variance of the Kaplan–Meier RMST estimator under a mixture arm
//! with independent censoring.
//!
//! For an arm with mixture survival `S`, censoring survival `G` and
//! `w(t) = ∫_t^τ S(u) du`,
//!
//! ```text
//! σ² = p ∫₀^τ w(t)² f_r(t) / (S(t)² G(t)) dt + (1−p) ∫₀^τ w(t)² f_nr(t) / (S(t)² G(t)) dt
//! ```
//!
//! so that `√n (K̂(τ) − K(τ))` is asymptotically `N(0, σ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::law::SurvivalLaw;
use crate::mixture::MixtureArm;
use crate::quadrature::{integrate, QuadConfig};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub value: f64,
    pub est_abs_error: f64,
    pub nodes_used: usize,
}

pub fn limiting_variance(arm: &MixtureArm, censoring: &SurvivalLaw, tau: f64, tol: f64) -> Result<VarianceResult> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    if !(censoring.surv(tau) > 0.0) {
        return Err(domain(format!("censoring survival vanishes before tau = {tau}")));
    }

    let k_tau = arm.restricted_mean(tau);
    let p = arm.response_rate();
    let components = [(p, arm.responders()), (1.0 - p, arm.non_responders())];
    let active = components.iter().filter(|(w, _)| *w > 0.0).count().max(1);

    let mut result = VarianceResult {
        value: 0.0,
        est_abs_error: 0.0,
        nodes_used: 0,
    };
    for (weight, law) in components {
        if weight == 0.0 {
            continue;
        }
        let integrand = |t: f64| {
            let w = k_tau - arm.restricted_mean(t);
            let s = arm.surv(t);
            w * w * law.dens(t) / (s * s * censoring.surv(t))
        };
        let q = integrate(integrand, 0.0, tau, QuadConfig::absolute(tol / (weight * active as f64)))?;
        result.value += weight * q.value;
        result.est_abs_error += weight * q.abs_error;
        result.nodes_used += q.evaluations;
    }
    result.value = result.value.max(0.0);
    Ok(result)
}

/// `K(t)` on `grid` evenly spaced points of `[0, τ]`.
pub fn rmst_curve(arm: &MixtureArm, tau: f64, grid: usize) -> Result<Vec<(f64, f64)>> {
    if grid < 2 {
        return Err(domain(format!("grid needs at least 2 points, got {grid}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    let step = tau / (grid - 1) as f64;
    Ok((0..grid)
        .map(|i| {
            let t = if i == grid - 1 { tau } else { i as f64 * step };
            (t, arm.restricted_mean(t))
        })
        .collect())
}
