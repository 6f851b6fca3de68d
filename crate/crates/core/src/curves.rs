//! Point sets for plotting arm survival curves and the hazard ratio.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mixture::{hazard_ratio, MixtureArm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub s0: f64,
    pub s1: f64,
    pub s0_r: f64,
    pub s0_nr: f64,
    pub s1_r: f64,
    pub s1_nr: f64,
    /// Undefined at `t = 0`.
    pub hr: Option<f64>,
}

pub const HEADER: [&str; 8] = ["t", "S0", "S1", "S0_r", "S0_nr", "S1_r", "S1_nr", "HR"];

/// `grid` evenly spaced times on `[0, τ]`.
pub fn curve_points(control: &MixtureArm, treatment: &MixtureArm, tau: f64, grid: usize) -> Result<Vec<CurvePoint>> {
    if grid < 2 {
        return Err(domain(format!("grid needs at least 2 points, got {grid}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    let step = tau / (grid - 1) as f64;
    (0..grid)
        .map(|i| {
            let t = if i == grid - 1 { tau } else { i as f64 * step };
            Ok(CurvePoint {
                t,
                s0: control.surv(t),
                s1: treatment.surv(t),
                s0_r: control.responders().surv(t),
                s0_nr: control.non_responders().surv(t),
                s1_r: treatment.responders().surv(t),
                s1_nr: treatment.non_responders().surv(t),
                hr: if t > 0.0 { Some(hazard_ratio(control, treatment, t)?) } else { None },
            })
        })
        .collect()
}

pub fn write_curves_csv<W: Write>(writer: W, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(HEADER)?;
    for p in points {
        let mut row: Vec<String> = [p.t, p.s0, p.s1, p.s0_r, p.s0_nr, p.s1_r, p.s1_nr]
            .iter()
            .map(|v| format!("{v:?}"))
            .collect();
        row.push(p.hr.map_or(String::new(), |h| format!("{h:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
