//! The responder/non-responder mixture of one treatment arm and the
//! between-arm effect measures derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::law::SurvivalLaw;

/// One treatment arm: `S(t) = p·S_r(t) + (1−p)·S_nr(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureArm {
    p: f64,
    responders: SurvivalLaw,
    non_responders: SurvivalLaw,
}

impl MixtureArm {
    pub fn new(p: f64, responders: SurvivalLaw, non_responders: SurvivalLaw) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("response probability must lie in [0, 1], got {p}")));
        }
        if responders.is_never() || non_responders.is_never() {
            return Err(domain("component laws must have finite scale"));
        }
        Ok(Self {
            p,
            responders,
            non_responders,
        })
    }

    pub fn response_rate(&self) -> f64 {
        self.p
    }

    pub fn responders(&self) -> &SurvivalLaw {
        &self.responders
    }

    pub fn non_responders(&self) -> &SurvivalLaw {
        &self.non_responders
    }

    pub fn survival(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain(format!("time must be non-negative, got {t}")));
        }
        Ok(self.surv(t))
    }

    /// `K(τ) = p·K_r(τ) + (1−p)·K_nr(τ)`.
    pub fn rmst(&self, tau: f64) -> Result<f64> {
        Ok(self.p * self.responders.rmst(tau)? + (1.0 - self.p) * self.non_responders.rmst(tau)?)
    }

    #[inline]
    pub(crate) fn surv(&self, t: f64) -> f64 {
        self.p * self.responders.surv(t) + (1.0 - self.p) * self.non_responders.surv(t)
    }

    #[inline]
    pub(crate) fn dens(&self, t: f64) -> f64 {
        self.p * self.responders.dens(t) + (1.0 - self.p) * self.non_responders.dens(t)
    }

    /// `∫₀^t S(u) du`, zero at the origin.
    #[inline]
    pub(crate) fn restricted_mean(&self, t: f64) -> f64 {
        self.p * self.responders.restricted_mean(t)
            + (1.0 - self.p) * self.non_responders.restricted_mean(t)
    }
}

/// Design settings by which subgroup gains from the intervention, assuming the
/// response rate improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    /// Only the response rate differs.
    I,
    /// Non-responders gain, responders do not.
    II,
    /// Responders gain, non-responders do not.
    III,
    /// Both subgroups gain.
    IV,
    Other,
}

impl Setting {
    fn classify(delta_r: f64, delta_nr: f64, delta_p: f64, zero_tol: f64) -> Self {
        if !(delta_p > 0.0) {
            return Setting::Other;
        }
        let zero = |d: f64| d.abs() < zero_tol;
        match (zero(delta_r), zero(delta_nr)) {
            (true, true) => Setting::I,
            (true, false) if delta_nr > 0.0 => Setting::II,
            (false, true) if delta_r > 0.0 => Setting::III,
            (false, false) if delta_r > 0.0 && delta_nr > 0.0 => Setting::IV,
            _ => Setting::Other,
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Setting::I => "I",
            Setting::II => "II",
            Setting::III => "III",
            Setting::IV => "IV",
            Setting::Other => "other",
        };
        f.write_str(s)
    }
}

/// RMST difference `D(τ)` and its responder decomposition
/// `D = p¹·Δ_r + (1−p¹)·Δ_nr + δ_p·Δ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectDecomposition {
    /// Responders' RMST gain, `K_r¹ − K_r⁰`.
    pub delta_r: f64,
    /// Non-responders' RMST gain, `K_nr¹ − K_nr⁰`.
    pub delta_nr: f64,
    /// Responders' advantage over non-responders in the control arm.
    pub delta_0: f64,
    /// Response rate improvement `p¹ − p⁰`.
    pub delta_p: f64,
    pub p0: f64,
    pub d_tau: f64,
    pub setting: Setting,
}

impl EffectDecomposition {
    /// Builds the decomposition from anticipated subgroup effects rather than
    /// from survival laws. No horizon is involved, so a delta counts as zero
    /// only when it is exactly zero.
    pub fn from_anticipated(delta_r: f64, delta_nr: f64, delta_0: f64, delta_p: f64, p0: f64) -> Result<Self> {
        let p1 = p0 + delta_p;
        if !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) {
            return Err(domain(format!(
                "response rates must lie in [0, 1], got p0 = {p0}, p1 = {p1}"
            )));
        }
        Ok(Self {
            delta_r,
            delta_nr,
            delta_0,
            delta_p,
            p0,
            d_tau: p1 * delta_r + (1.0 - p1) * delta_nr + delta_p * delta_0,
            setting: Setting::classify(delta_r, delta_nr, delta_p, f64::MIN_POSITIVE),
        })
    }

    pub fn p1(&self) -> f64 {
        self.p0 + self.delta_p
    }
}

/// Relative tolerance within which the two forms of `D(τ)` must agree.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-10;

/// Difference in RMST between arms and its subgroup decomposition.
pub fn effect_size(control: &MixtureArm, treatment: &MixtureArm, tau: f64) -> Result<EffectDecomposition> {
    let kr0 = control.responders.rmst(tau)?;
    let knr0 = control.non_responders.rmst(tau)?;
    let kr1 = treatment.responders.rmst(tau)?;
    let knr1 = treatment.non_responders.rmst(tau)?;
    let (p0, p1) = (control.p, treatment.p);

    let delta_r = kr1 - kr0;
    let delta_nr = knr1 - knr0;
    let delta_0 = kr0 - knr0;
    let delta_p = p1 - p0;
    let d_tau = p1 * delta_r + (1.0 - p1) * delta_nr + delta_p * delta_0;

    let direct = (p1 * kr1 - p0 * kr0) + ((1.0 - p1) * knr1 - (1.0 - p0) * knr0);
    // both forms cancel terms of the size of the subgroup RMSTs
    let scale = kr0.max(knr0).max(kr1).max(knr1);
    if (direct - d_tau).abs() > DECOMPOSITION_TOLERANCE * scale {
        return Err(crate::Error::Numeric(format!(
            "RMST difference forms disagree: {direct} vs {d_tau}"
        )));
    }

    Ok(EffectDecomposition {
        delta_r,
        delta_nr,
        delta_0,
        delta_p,
        p0,
        d_tau,
        setting: Setting::classify(delta_r, delta_nr, delta_p, 1e-12 * tau),
    })
}

/// `HR(t) = h¹(t) / h⁰(t)` for the mixture hazards of the two arms.
pub fn hazard_ratio(control: &MixtureArm, treatment: &MixtureArm, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("hazard ratio needs t > 0, got {t}")));
    }
    let (s0, s1) = (control.surv(t), treatment.surv(t));
    if !(s0 > 0.0 && s1 > 0.0) {
        return Err(domain(format!("mixture survival vanishes at t = {t}")));
    }
    let (f0, f1) = (control.dens(t), treatment.dens(t));
    if !(f0 > 0.0) {
        return Err(domain(format!("control hazard is zero at t = {t}")));
    }
    Ok((s0 / s1) * (f1 / f0))
}

/// `S¹(t) − S⁰(t)`, via the regrouping
/// `p¹(S_r¹ − S_nr¹) − p⁰(S_r⁰ − S_nr⁰) + (S_nr¹ − S_nr⁰)`.
pub fn survival_difference(control: &MixtureArm, treatment: &MixtureArm, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    let (sr0, snr0) = (control.responders.surv(t), control.non_responders.surv(t));
    let (sr1, snr1) = (treatment.responders.surv(t), treatment.non_responders.surv(t));
    Ok(treatment.p * (sr1 - snr1) - control.p * (sr0 - snr0) + (snr1 - snr0))
}
