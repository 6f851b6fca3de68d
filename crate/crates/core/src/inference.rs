//! Kaplan–Meier estimation, the RMST-difference test and the log-rank test.
//!
//! Events precede censorings at tied times. The two-sample statistic is
//!
//! ```text
//! Z = (K̂¹(τ) − K̂⁰(τ)) / √(σ̂₀²/n⁰ + σ̂₁²/n¹)
//! ```
//!
//! where `σ̂²` substitutes the product-limit estimates of `S` and of the
//! censoring survival `G` into the limiting variance.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::normal;
use crate::trial_data::{Arm, SubjectRecord};

/// Distinct observed times with risk-set counts, sorted ascending.
#[derive(Debug, Clone, Copy)]
struct Tally {
    time: f64,
    at_risk: usize,
    events: usize,
    censored: usize,
}

fn tally<'a>(records: impl IntoIterator<Item = &'a SubjectRecord>) -> Vec<Tally> {
    let mut obs: Vec<(f64, bool)> = records.into_iter().map(|r| (r.time, r.event)).collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Tally> = Vec::new();
    let mut remaining = obs.len();
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let mut d = 0;
        let mut c = 0;
        while i < obs.len() && obs[i].0 == t {
            if obs[i].1 {
                d += 1;
            } else {
                c += 1;
            }
            i += 1;
        }
        out.push(Tally {
            time: t,
            at_risk: remaining,
            events: d,
            censored: c,
        });
        remaining -= d + c;
    }
    out
}

/// Right-continuous product-limit step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmCurve {
    /// Distinct event times.
    pub times: Vec<f64>,
    /// `Ŝ` just after each event time.
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
    /// Largest observed time, event or not.
    pub last_time: f64,
    pub n: usize,
}

impl KmCurve {
    /// `Ŝ(t)`.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }

    /// `Ŝ(t⁻)`.
    pub fn before(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x < t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }

    /// `∫₀^t Ŝ(u) du`.
    pub fn integral(&self, t: f64) -> f64 {
        let mut area = 0.0;
        let mut left = 0.0;
        let mut level = 1.0;
        for (&x, &s) in self.times.iter().zip(&self.survival) {
            if x >= t {
                break;
            }
            area += level * (x - left);
            left = x;
            level = s;
        }
        area + level * (t - left).max(0.0)
    }
}

fn curve_from(tallies: &[Tally], n: usize) -> KmCurve {
    let mut curve = KmCurve {
        times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
        last_time: tallies.last().map_or(0.0, |t| t.time),
        n,
    };
    let mut s = 1.0;
    for t in tallies.iter().filter(|t| t.events > 0) {
        s *= 1.0 - t.events as f64 / t.at_risk as f64;
        curve.times.push(t.time);
        curve.survival.push(s);
        curve.at_risk.push(t.at_risk);
        curve.events.push(t.events);
    }
    curve
}

/// Product-limit estimate from the records of one arm.
pub fn kaplan_meier(records: &[SubjectRecord]) -> Result<KmCurve> {
    if records.is_empty() {
        return Err(domain("Kaplan-Meier needs at least one record"));
    }
    Ok(curve_from(&tally(records), records.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmstEstimate {
    pub value: f64,
    /// The curve ended in a censoring before `τ` and was held at its last
    /// value up to `τ`.
    pub extrapolated: bool,
}

/// `K̂(τ) = ∫₀^τ Ŝ(t) dt` for the step function.
pub fn rmst_from_km(curve: &KmCurve, tau: f64) -> Result<RmstEstimate> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    let tail = curve.survival.last().copied().unwrap_or(1.0);
    Ok(RmstEstimate {
        value: curve.integral(tau),
        extrapolated: curve.last_time < tau && tail > 0.0,
    })
}

fn variance_from(tallies: &[Tally], tau: f64) -> f64 {
    // Ŝ(t⁻), Ŝ(t), Ĝ(t⁻) at every event time in [0, τ]
    let mut steps = Vec::new();
    let (mut s, mut g) = (1.0, 1.0);
    for t in tallies {
        if t.time > tau {
            break;
        }
        let y = t.at_risk as f64;
        let s_after = s * (1.0 - t.events as f64 / y);
        if t.events > 0 {
            steps.push((t.time, s, s_after, g, t.events as f64 / y));
        }
        let left_for_censoring = t.at_risk - t.events;
        if t.censored > 0 && left_for_censoring > 0 {
            g *= 1.0 - t.censored as f64 / left_for_censoring as f64;
        }
        s = s_after;
    }

    // w(t_j) = ∫_{t_j}^τ Ŝ, accumulated from the right
    let mut ws = vec![0.0; steps.len()];
    let mut right = tau;
    let mut acc = 0.0;
    for (j, &(time, _, s_after, _, _)) in steps.iter().enumerate().rev() {
        acc += s_after * (right - time);
        right = time;
        ws[j] = acc;
    }

    let mut sum = 0.0;
    for (j, &(_, s_before, s_after, g_before, hazard)) in steps.iter().enumerate() {
        if s_after == 0.0 {
            continue;
        }
        let mass = s_before * hazard;
        sum += ws[j] * ws[j] * mass / (s_before * s_after * g_before);
    }
    sum
}

/// Plug-in estimate of the limiting variance `σ²` for one arm.
pub fn rmst_variance_hat(records: &[SubjectRecord], tau: f64) -> Result<f64> {
    if records.is_empty() {
        return Err(domain("variance estimate needs at least one record"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    Ok(variance_from(&tally(records), tau))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmstTestResult {
    pub k_hat0: f64,
    pub k_hat1: f64,
    pub sigma_hat0_sq: f64,
    pub sigma_hat1_sq: f64,
    pub n0: usize,
    pub n1: usize,
    pub z: f64,
    pub p_one_sided: f64,
    pub rejected: bool,
    pub warnings: Vec<String>,
}

impl RmstTestResult {
    pub fn d_hat(&self) -> f64 {
        self.k_hat1 - self.k_hat0
    }
}

fn split(records: &[SubjectRecord]) -> (Vec<SubjectRecord>, Vec<SubjectRecord>) {
    records.iter().partition(|r| r.arm == Arm::Control)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// One-sided test of `D(τ) > 0`, treatment minus control.
pub fn rmst_test(records: &[SubjectRecord], tau: f64, alpha: f64) -> Result<RmstTestResult> {
    check_alpha(alpha)?;
    let (control, treatment) = split(records);
    if control.is_empty() || treatment.is_empty() {
        return Err(domain("both arms need at least one record"));
    }

    let mut warnings = Vec::new();
    let mut arm = |rs: &[SubjectRecord], name: &str| -> Result<(f64, f64)> {
        let tallies = tally(rs);
        let curve = curve_from(&tallies, rs.len());
        let k = rmst_from_km(&curve, tau)?;
        if k.extrapolated {
            warnings.push(format!(
                "{name} curve ends with a censoring at {} before tau = {tau}; held constant",
                curve.last_time
            ));
        }
        Ok((k.value, variance_from(&tallies, tau)))
    };
    let (k0, v0) = arm(&control, "control")?;
    let (k1, v1) = arm(&treatment, "treatment")?;

    let (n0, n1) = (control.len(), treatment.len());
    let se2 = v0 / n0 as f64 + v1 / n1 as f64;
    if !(se2 > 0.0) {
        return Err(Error::Degenerate(
            "estimated variance of the RMST difference is zero".into(),
        ));
    }
    let z = (k1 - k0) / se2.sqrt();
    Ok(RmstTestResult {
        k_hat0: k0,
        k_hat1: k1,
        sigma_hat0_sq: v0,
        sigma_hat1_sq: v1,
        n0,
        n1,
        z,
        p_one_sided: normal::upper_tail(z),
        rejected: z > normal::upper_quantile(alpha),
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRankResult {
    pub z: f64,
    pub p_one_sided: f64,
    pub rejected: bool,
    /// Observed and expected treatment-arm events.
    pub observed1: f64,
    pub expected1: f64,
    pub variance: f64,
}

/// One-sided log-rank test over all follow-up, positive `z` favouring
/// treatment.
pub fn log_rank_test(records: &[SubjectRecord], alpha: f64) -> Result<LogRankResult> {
    check_alpha(alpha)?;
    let (control, treatment) = split(records);
    if control.is_empty() || treatment.is_empty() {
        return Err(domain("both arms need at least one record"));
    }

    let mut obs: Vec<(f64, bool, bool)> = records.iter().map(|r| (r.time, r.event, r.arm == Arm::Treatment)).collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (mut y0, mut y1) = (control.len() as f64, treatment.len() as f64);
    let (mut o1, mut e1, mut v) = (0.0, 0.0, 0.0);
    let mut events_seen = false;
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let (mut d0, mut d1, mut c0, mut c1) = (0.0, 0.0, 0.0, 0.0);
        while i < obs.len() && obs[i].0 == t {
            match (obs[i].1, obs[i].2) {
                (true, false) => d0 += 1.0,
                (true, true) => d1 += 1.0,
                (false, false) => c0 += 1.0,
                (false, true) => c1 += 1.0,
            }
            i += 1;
        }
        let d = d0 + d1;
        if d > 0.0 {
            events_seen = true;
            let y = y0 + y1;
            o1 += d1;
            e1 += d * y1 / y;
            if y > 1.0 {
                v += d * (y1 / y) * (y0 / y) * (y - d) / (y - 1.0);
            }
        }
        y0 -= d0 + c0;
        y1 -= d1 + c1;
    }
    if !events_seen {
        return Err(Error::Degenerate("log-rank test needs at least one event".into()));
    }
    if !(v > 0.0) {
        return Err(Error::Degenerate("log-rank variance is zero".into()));
    }
    let z = (e1 - o1) / v.sqrt();
    Ok(LogRankResult {
        z,
        p_one_sided: normal::upper_tail(z),
        rejected: z > normal::upper_quantile(alpha),
        observed1: o1,
        expected1: e1,
        variance: v,
    })
}
