//! Exponential and Weibull survival laws.
//!
//! All times (scales, horizons, censoring) share one unspecified unit.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{domain, Result};

/// Smallest time at which a density is evaluated; keeps the Weibull density
/// finite at the origin when the shape is below one.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Weibull,
}

/// `S(t) = exp{-(t/scale)^shape}`.
///
/// An exponential law with infinite scale is the "no censoring" sentinel,
/// `S ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalLaw {
    family: Family,
    scale: f64,
    shape: f64,
}

impl SurvivalLaw {
    pub fn exponential(scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(domain(format!("exponential scale must be positive, got {scale}")));
        }
        Ok(Self {
            family: Family::Exponential,
            scale,
            shape: 1.0,
        })
    }

    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("Weibull scale must be positive and finite, got {scale}")));
        }
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(domain(format!("Weibull shape must be positive and finite, got {shape}")));
        }
        Ok(Self {
            family: Family::Weibull,
            scale,
            shape,
        })
    }

    /// Exponential for `shape == 1`, Weibull otherwise.
    pub fn with_shape(scale: f64, shape: f64) -> Result<Self> {
        if shape == 1.0 {
            Self::exponential(scale)
        } else {
            Self::weibull(scale, shape)
        }
    }

    /// A law that never fails: `S(t) = 1` for all `t`.
    pub fn never() -> Self {
        Self {
            family: Family::Exponential,
            scale: f64::INFINITY,
            shape: 1.0,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn is_never(&self) -> bool {
        self.scale.is_infinite()
    }

    #[inline]
    fn cumulative_hazard(&self, t: f64) -> f64 {
        let x = t / self.scale;
        match self.family {
            Family::Exponential => x,
            Family::Weibull => x.powf(self.shape),
        }
    }

    /// `S(t)` for `t ≥ 0`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.surv(t))
    }

    /// Density `f(t) = -S'(t)` for `t ≥ 0`.
    pub fn density(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.dens(t))
    }

    /// Restricted mean `∫₀^τ S(t) dt`.
    pub fn rmst(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(domain(format!("restriction horizon must be positive, got {tau}")));
        }
        Ok(self.restricted_mean(tau))
    }

    /// Unrestricted mean, `scale · Γ(1 + 1/shape)`.
    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Exponential => self.scale,
            Family::Weibull => self.scale * gamma(1.0 + 1.0 / self.shape),
        }
    }

    /// Quantile function `scale · (−ln u)^{1/shape}` evaluated at survival
    /// probability `u ∈ (0, 1]`.
    pub fn time_at_survival(&self, u: f64) -> f64 {
        let e = -u.ln();
        match self.family {
            Family::Exponential => self.scale * e,
            Family::Weibull => self.scale * e.powf(1.0 / self.shape),
        }
    }

    #[inline]
    pub(crate) fn surv(&self, t: f64) -> f64 {
        if self.is_never() {
            return 1.0;
        }
        (-self.cumulative_hazard(t)).exp()
    }

    #[inline]
    pub(crate) fn dens(&self, t: f64) -> f64 {
        if self.is_never() {
            return 0.0;
        }
        match self.family {
            Family::Exponential => (-t / self.scale).exp() / self.scale,
            Family::Weibull => {
                let t = t.max(DENSITY_FLOOR);
                let x = t / self.scale;
                let h = x.powf(self.shape);
                self.shape / self.scale * h / x * (-h).exp()
            }
        }
    }

    /// `∫₀^t S(u) du` for any `t ≥ 0` (zero at the origin).
    pub(crate) fn restricted_mean(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if self.is_never() {
            return t;
        }
        match self.family {
            Family::Exponential => -self.scale * (-t / self.scale).exp_m1(),
            Family::Weibull => {
                // substitute v = (u/a)^b: a/b · Γ(1/b) · P(1/b, (t/a)^b)
                let k = 1.0 / self.shape;
                let x = self.cumulative_hazard(t);
                self.scale * k * gamma(k) * gamma_lr(k, x)
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(domain(format!("time must be non-negative, got {t}")))
    }
}
