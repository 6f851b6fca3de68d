//! Total sample size for the one-sided RMST-difference test and its inverse,
//! the asymptotic power at a given size.
//!
//! ```text
//! n = (z_α + z_β)² / D(τ)² · (σ₀²/π + σ₁²/(1−π))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::law::SurvivalLaw;
use crate::mixture::{effect_size, EffectDecomposition, MixtureArm};
use crate::normal;
use crate::variance::{limiting_variance, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub tau: f64,
    /// One-sided significance level.
    pub alpha: f64,
    /// Type II error.
    pub beta: f64,
    /// Control allocation fraction `lim n⁰/n`.
    pub pi: f64,
    pub censoring_control: SurvivalLaw,
    pub censoring_treatment: SurvivalLaw,
    /// Interpret `alpha` as two-sided, i.e. test at `alpha/2`.
    pub two_sided: bool,
    /// Absolute tolerance for the variance quadrature.
    pub tolerance: f64,
}

impl DesignSpec {
    pub fn new(tau: f64, alpha: f64, beta: f64, pi: f64, censoring: SurvivalLaw) -> Result<Self> {
        let spec = Self {
            tau,
            alpha,
            beta,
            pi,
            censoring_control: censoring,
            censoring_treatment: censoring,
            two_sided: false,
            tolerance: DEFAULT_TOLERANCE,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_treatment_censoring(mut self, censoring: SurvivalLaw) -> Self {
        self.censoring_treatment = censoring;
        self
    }

    pub fn with_two_sided(mut self, two_sided: bool) -> Self {
        self.two_sided = two_sided;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(domain(format!("tau must be positive, got {}", self.tau)));
        }
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(self.alpha) || !unit(self.beta) || self.alpha + self.beta >= 1.0 {
            return Err(domain(format!(
                "need alpha, beta in (0, 1) with alpha + beta < 1, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        if !unit(self.pi) {
            return Err(domain(format!("allocation fraction must lie in (0, 1), got {}", self.pi)));
        }
        if !(self.tolerance > 0.0) {
            return Err(domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }

    /// Significance level actually used by the one-sided test.
    pub fn test_alpha(&self) -> f64 {
        if self.two_sided {
            self.alpha / 2.0
        } else {
            self.alpha
        }
    }

    /// Splits `n` subjects: `⌈π·n⌉` to control, the rest to treatment, each
    /// arm keeping at least one subject.
    pub fn allocate(&self, n: u64) -> (u64, u64) {
        let n0 = ((self.pi * n as f64) - 1e-9).ceil().clamp(1.0, (n.max(2) - 1) as f64) as u64;
        (n0, n.saturating_sub(n0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeResult {
    /// Unrounded formula value.
    pub n_total: f64,
    pub n_rounded: u64,
    pub n_control: u64,
    pub n_treatment: u64,
    pub d_tau: f64,
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
    /// Asymptotic power at `(n_control, n_treatment)`.
    pub power: f64,
    pub effect: EffectDecomposition,
}

struct Parts {
    effect: EffectDecomposition,
    sigma0_sq: f64,
    sigma1_sq: f64,
}

fn parts(control: &MixtureArm, treatment: &MixtureArm, spec: &DesignSpec) -> Result<Parts> {
    spec.validate()?;
    let effect = effect_size(control, treatment, spec.tau)?;
    if !(effect.d_tau > 0.0) {
        return Err(Error::InfeasibleDesign(format!(
            "no positive effect to detect: RMST difference is {:.6e}",
            effect.d_tau
        )));
    }
    let v0 = limiting_variance(control, &spec.censoring_control, spec.tau, spec.tolerance)?;
    let v1 = limiting_variance(treatment, &spec.censoring_treatment, spec.tau, spec.tolerance)?;
    Ok(Parts {
        effect,
        sigma0_sq: v0.value,
        sigma1_sq: v1.value,
    })
}

fn power_from_parts(p: &Parts, spec: &DesignSpec, n0: u64, n1: u64) -> f64 {
    let se = (p.sigma0_sq / n0 as f64 + p.sigma1_sq / n1 as f64).sqrt();
    normal::cdf(p.effect.d_tau / se - normal::upper_quantile(spec.test_alpha()))
}

/// Sample size for detecting the RMST difference between the two arms.
///
/// The unrounded size is reported as is. The rounded size starts at its
/// ceiling and grows until the allocated arms reach the target power, which
/// only matters when the control ceiling takes the slack from the treatment
/// arm.
pub fn sample_size(control: &MixtureArm, treatment: &MixtureArm, spec: &DesignSpec) -> Result<SampleSizeResult> {
    let p = parts(control, treatment, spec)?;
    let z = normal::upper_quantile(spec.test_alpha()) + normal::upper_quantile(spec.beta);
    let n_total =
        z * z / (p.effect.d_tau * p.effect.d_tau) * (p.sigma0_sq / spec.pi + p.sigma1_sq / (1.0 - spec.pi));
    if !n_total.is_finite() || n_total > 1e15 {
        return Err(Error::Numeric(format!("sample size is not representable: {n_total}")));
    }

    let target = 1.0 - spec.beta;
    let mut n = (n_total.ceil() as u64).max(2);
    let mut bumps = 0;
    let (n0, n1, power) = loop {
        let (n0, n1) = spec.allocate(n);
        let power = power_from_parts(&p, spec, n0, n1);
        if power >= target || bumps >= 64 {
            break (n0, n1, power);
        }
        n += 1;
        bumps += 1;
    };

    Ok(SampleSizeResult {
        n_total,
        n_rounded: n,
        n_control: n0,
        n_treatment: n1,
        d_tau: p.effect.d_tau,
        sigma0_sq: p.sigma0_sq,
        sigma1_sq: p.sigma1_sq,
        power,
        effect: p.effect,
    })
}

/// Asymptotic power of the one-sided test with `n` subjects split by
/// [`DesignSpec::allocate`].
pub fn power_at_n(control: &MixtureArm, treatment: &MixtureArm, spec: &DesignSpec, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("need at least 2 subjects, got {n}")));
    }
    let p = parts(control, treatment, spec)?;
    let (n0, n1) = spec.allocate(n);
    Ok(power_from_parts(&p, spec, n0, n1))
}
