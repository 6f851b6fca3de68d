//! Recovering subgroup survival laws from design-stage summary statistics.
//!
//! Three summary sets are supported, each describing the control arm and the
//! improvement expected under the intervention for responders and
//! non-responders separately:
//!
//! - [`SummaryPayload::Means`]: control means and mean differences;
//! - [`SummaryPayload::Rates`]: control `τ`-survival rates and rate differences;
//! - [`SummaryPayload::RatesDeltas`]: control `τ`-survival rates and RMST gains.
//!
//! All four subgroup laws share one shape parameter. The third set is inverted
//! exactly by root-finding on the scale; a first-order expansion is kept as
//! [`Set3Method::Taylor`].

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{infeasible, Error, Result};
use crate::law::SurvivalLaw;
use crate::mixture::MixtureArm;
use crate::root::{solve_increasing, RootConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SummarySet {
    Means,
    Rates,
    RatesDeltas,
}

impl SummarySet {
    /// Maps the numeric selector `1`, `2`, `3`.
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Self::Means),
            2 => Some(Self::Rates),
            3 => Some(Self::RatesDeltas),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Means => 1,
            Self::Rates => 2,
            Self::RatesDeltas => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum SummaryPayload {
    Means {
        m0_r: f64,
        m0_nr: f64,
        diffm_r: f64,
        diffm_nr: f64,
    },
    Rates {
        s0_r: f64,
        s0_nr: f64,
        diffs_r: f64,
        diffs_nr: f64,
    },
    RatesDeltas {
        s0_r: f64,
        s0_nr: f64,
        delta_r: f64,
        delta_nr: f64,
    },
}

impl SummaryPayload {
    pub fn set(&self) -> SummarySet {
        match self {
            Self::Means { .. } => SummarySet::Means,
            Self::Rates { .. } => SummarySet::Rates,
            Self::RatesDeltas { .. } => SummarySet::RatesDeltas,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryInputs {
    pub p0: f64,
    pub delta_p: f64,
    pub tau: f64,
    /// Exponential censoring scale; `+∞` means no censoring.
    pub censor_scale: f64,
    /// Overrides the censoring scale in the treatment arm.
    pub censor_scale_treatment: Option<f64>,
    /// Common shape of the four subgroup laws.
    pub shape: f64,
    pub payload: SummaryPayload,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedDesign {
    pub control: MixtureArm,
    pub treatment: MixtureArm,
    pub censoring_control: SurvivalLaw,
    pub censoring_treatment: SurvivalLaw,
    pub tau: f64,
}

/// How the third summary set is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Set3Method {
    /// Exact inversion of the RMST in the scale.
    #[default]
    RootFinding,
    /// One linearisation step of the RMST in the rate `1/scale` around the
    /// control rate. Error grows with the square of the RMST gain.
    Taylor,
}

const SUBGROUPS: [&str; 4] = [
    "control responders",
    "control non-responders",
    "treatment responders",
    "treatment non-responders",
];

pub fn calibrate(input: &SummaryInputs) -> Result<CalibratedDesign> {
    calibrate_with(input, Set3Method::default())
}

pub fn calibrate_with(input: &SummaryInputs, method: Set3Method) -> Result<CalibratedDesign> {
    match input.payload.set() {
        SummarySet::Means => calibrate_from_means(input),
        SummarySet::Rates => calibrate_from_rates(input),
        SummarySet::RatesDeltas => calibrate_from_rates_and_deltas(input, method),
    }
}

pub fn calibrate_from_means(input: &SummaryInputs) -> Result<CalibratedDesign> {
    let SummaryPayload::Means {
        m0_r,
        m0_nr,
        diffm_r,
        diffm_nr,
    } = input.payload
    else {
        return Err(wrong_set(SummarySet::Means, input));
    };
    check_shared(input)?;
    let means = [m0_r, m0_nr, m0_r + diffm_r, m0_nr + diffm_nr];
    let gamma_factor = gamma(1.0 + 1.0 / input.shape);
    let mut laws = [SurvivalLaw::never(); 4];
    for (i, &m) in means.iter().enumerate() {
        if !(m > 0.0 && m.is_finite()) {
            return Err(infeasible(SUBGROUPS[i], format!("implied mean {m} is not positive")));
        }
        laws[i] = SurvivalLaw::with_shape(m / gamma_factor, input.shape)?;
    }
    assemble(input, laws)
}

pub fn calibrate_from_rates(input: &SummaryInputs) -> Result<CalibratedDesign> {
    let SummaryPayload::Rates {
        s0_r,
        s0_nr,
        diffs_r,
        diffs_nr,
    } = input.payload
    else {
        return Err(wrong_set(SummarySet::Rates, input));
    };
    check_shared(input)?;
    let rates = [s0_r, s0_nr, s0_r + diffs_r, s0_nr + diffs_nr];
    let mut laws = [SurvivalLaw::never(); 4];
    for (i, &s) in rates.iter().enumerate() {
        laws[i] = law_from_rate(s, input.tau, input.shape, SUBGROUPS[i])?;
    }
    assemble(input, laws)
}

pub fn calibrate_from_rates_and_deltas(input: &SummaryInputs, method: Set3Method) -> Result<CalibratedDesign> {
    let SummaryPayload::RatesDeltas {
        s0_r,
        s0_nr,
        delta_r,
        delta_nr,
    } = input.payload
    else {
        return Err(wrong_set(SummarySet::RatesDeltas, input));
    };
    check_shared(input)?;
    let control_r = law_from_rate(s0_r, input.tau, input.shape, SUBGROUPS[0])?;
    let control_nr = law_from_rate(s0_nr, input.tau, input.shape, SUBGROUPS[1])?;
    let treat_r = shift_rmst(&control_r, delta_r, input.tau, method, SUBGROUPS[2])?;
    let treat_nr = shift_rmst(&control_nr, delta_nr, input.tau, method, SUBGROUPS[3])?;
    assemble(input, [control_r, control_nr, treat_r, treat_nr])
}

/// Recomputes a summary set from calibrated laws.
pub fn summarize(design: &CalibratedDesign, set: SummarySet) -> SummaryInputs {
    let tau = design.tau;
    let (c, t) = (&design.control, &design.treatment);
    let payload = match set {
        SummarySet::Means => {
            let m0_r = c.responders().mean();
            let m0_nr = c.non_responders().mean();
            SummaryPayload::Means {
                m0_r,
                m0_nr,
                diffm_r: t.responders().mean() - m0_r,
                diffm_nr: t.non_responders().mean() - m0_nr,
            }
        }
        SummarySet::Rates => {
            let s0_r = c.responders().surv(tau);
            let s0_nr = c.non_responders().surv(tau);
            SummaryPayload::Rates {
                s0_r,
                s0_nr,
                diffs_r: t.responders().surv(tau) - s0_r,
                diffs_nr: t.non_responders().surv(tau) - s0_nr,
            }
        }
        SummarySet::RatesDeltas => SummaryPayload::RatesDeltas {
            s0_r: c.responders().surv(tau),
            s0_nr: c.non_responders().surv(tau),
            delta_r: t.responders().restricted_mean(tau) - c.responders().restricted_mean(tau),
            delta_nr: t.non_responders().restricted_mean(tau) - c.non_responders().restricted_mean(tau),
        },
    };
    let censor_scale = design.censoring_control.scale();
    let treat_scale = design.censoring_treatment.scale();
    SummaryInputs {
        p0: c.response_rate(),
        delta_p: t.response_rate() - c.response_rate(),
        tau,
        censor_scale,
        censor_scale_treatment: (treat_scale != censor_scale).then_some(treat_scale),
        shape: c.responders().shape(),
        payload,
    }
}

fn wrong_set(expected: SummarySet, input: &SummaryInputs) -> Error {
    Error::Config(format!(
        "expected summary set {}, got set {}",
        expected.index(),
        input.payload.set().index()
    ))
}

fn check_shared(input: &SummaryInputs) -> Result<()> {
    let p1 = input.p0 + input.delta_p;
    if !(0.0..=1.0).contains(&input.p0) {
        return Err(infeasible("control arm", format!("response rate p0 = {} outside [0, 1]", input.p0)));
    }
    if !(0.0..=1.0).contains(&p1) {
        return Err(infeasible(
            "treatment arm",
            format!("response rate p0 + delta_p = {p1} outside [0, 1]"),
        ));
    }
    if !(input.tau > 0.0 && input.tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be positive, got {}", input.tau)));
    }
    if !(input.shape > 0.0 && input.shape.is_finite()) {
        return Err(Error::Domain(format!("shape must be positive, got {}", input.shape)));
    }
    for (arm, scale) in [
        ("control censoring", Some(input.censor_scale)),
        ("treatment censoring", input.censor_scale_treatment),
    ] {
        if let Some(s) = scale {
            if !(s > 0.0) {
                return Err(infeasible(arm, format!("censoring scale {s} is not positive")));
            }
        }
    }
    Ok(())
}

fn censoring_law(scale: f64) -> Result<SurvivalLaw> {
    if scale.is_infinite() {
        Ok(SurvivalLaw::never())
    } else {
        SurvivalLaw::exponential(scale)
    }
}

fn assemble(input: &SummaryInputs, laws: [SurvivalLaw; 4]) -> Result<CalibratedDesign> {
    let [cr, cnr, tr, tnr] = laws;
    let censoring_control = censoring_law(input.censor_scale)?;
    let censoring_treatment = match input.censor_scale_treatment {
        Some(s) => censoring_law(s)?,
        None => censoring_control,
    };
    Ok(CalibratedDesign {
        control: MixtureArm::new(input.p0, cr, cnr)?,
        treatment: MixtureArm::new(input.p0 + input.delta_p, tr, tnr)?,
        censoring_control,
        censoring_treatment,
        tau: input.tau,
    })
}

fn law_from_rate(s: f64, tau: f64, shape: f64, subgroup: &str) -> Result<SurvivalLaw> {
    if !(s > 0.0 && s < 1.0) {
        return Err(infeasible(subgroup, format!("implied survival rate {s} at tau is outside (0, 1)")));
    }
    SurvivalLaw::with_shape(tau / (-s.ln()).powf(1.0 / shape), shape)
}

/// Scale of the law with the same shape whose RMST at `tau` exceeds that of
/// `base` by `delta`.
fn shift_rmst(base: &SurvivalLaw, delta: f64, tau: f64, method: Set3Method, subgroup: &str) -> Result<SurvivalLaw> {
    let shape = base.shape();
    let k0 = base.restricted_mean(tau);
    let target = k0 + delta;
    if !(target > 0.0 && target < tau) {
        return Err(infeasible(
            subgroup,
            format!("implied RMST {target} at tau = {tau} is outside (0, {tau})"),
        ));
    }
    if delta == 0.0 {
        return Ok(*base);
    }

    // dK/dλ = −(K(τ) − τ·S(τ))/λ for λ = 1/scale
    let lambda0 = 1.0 / base.scale();
    let slope0 = -(k0 - tau * base.surv(tau)) / lambda0;
    let lambda_taylor = lambda0 + delta / slope0;

    match method {
        Set3Method::Taylor => {
            if !(lambda_taylor > 0.0) {
                return Err(infeasible(
                    subgroup,
                    format!("first-order expansion gives non-positive rate {lambda_taylor}; use root-finding"),
                ));
            }
            SurvivalLaw::with_shape(1.0 / lambda_taylor, shape)
        }
        Set3Method::RootFinding => {
            let guess = if lambda_taylor > 0.0 {
                (1.0 / lambda_taylor).ln()
            } else {
                base.scale().ln()
            };
            let law_at = |x: f64| {
                let scale = x.exp();
                if shape == 1.0 {
                    SurvivalLaw::exponential(scale)
                } else {
                    SurvivalLaw::weibull(scale, shape)
                }
            };
            // in log-scale x, dK/dx = K(τ) − τ·S(τ) > 0
            let root = solve_increasing(
                |x| match law_at(x) {
                    Ok(law) => {
                        let k = law.restricted_mean(tau);
                        (k - target, k - tau * law.surv(tau))
                    }
                    // scale overflowed or underflowed: treat as the limiting RMST
                    Err(_) if x > 0.0 => (tau - target, 0.0),
                    Err(_) => (-target, 0.0),
                },
                guess,
                RootConfig {
                    f_tol: 1e-13 * tau,
                    ..RootConfig::default()
                },
            )
            .map_err(|e| Error::Numeric(format!("calibrating {subgroup} to RMST {target}: {e}")))?;
            if root.residual.abs() > 1e-10 {
                return Err(Error::Numeric(format!(
                    "calibrating {subgroup}: RMST residual {:e} after {} iterations",
                    root.residual, root.iterations
                )));
            }
            law_at(root.x)
        }
    }
}
