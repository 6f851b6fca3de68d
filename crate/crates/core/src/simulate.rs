//! Monte Carlo trials under the mixture model and replicated studies.
//!
//! Replication `r` of a study seeded with `s` draws from ChaCha8 seeded with
//! `s` on stream `r`, so any replication can be regenerated on its own and the
//! study result does not depend on how replications are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::design::{sample_size, DesignSpec};
use crate::error::{domain, Error, Result};
use crate::inference::{log_rank_test, rmst_test};
use crate::law::SurvivalLaw;
use crate::mixture::{effect_size, MixtureArm, Setting};
use crate::trial_data::{Arm, SubjectRecord};

pub const RNG_ID: &str = "ChaCha8Rng/rand_chacha-0.9 seed_from_u64(seed) stream=replication";

/// Draws one subject: response status, event time from the matching
/// component, and an independent censoring time.
pub fn draw_subject<R: Rng + ?Sized>(arm: Arm, law: &MixtureArm, censoring: &SurvivalLaw, rng: &mut R) -> SubjectRecord {
    let responder = rng.random::<f64>() < law.response_rate();
    let component = if responder { law.responders() } else { law.non_responders() };
    let t = component.time_at_survival(1.0 - rng.random::<f64>());
    let u = 1.0 - rng.random::<f64>();
    let c = if censoring.is_never() {
        f64::INFINITY
    } else {
        censoring.time_at_survival(u)
    };
    SubjectRecord {
        arm,
        time: t.min(c),
        event: t <= c,
        responder: Some(responder),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Null,
    Alternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSize {
    Fixed(u64),
    /// Rounded design sample size for the scenario.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub control: MixtureArm,
    pub treatment: MixtureArm,
    /// Censoring law, shared by both arms.
    pub censoring: SurvivalLaw,
    pub tau: f64,
    pub n_total: SampleSize,
    pub pi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub replications: u64,
    pub seed: u64,
    pub hypothesis: Hypothesis,
}

impl Scenario {
    pub fn design_spec(&self) -> Result<DesignSpec> {
        DesignSpec::new(self.tau, self.alpha, self.beta, self.pi, self.censoring)
    }

    pub fn validate(&self) -> Result<()> {
        self.design_spec()?;
        if self.replications == 0 {
            return Err(domain("replications must be positive"));
        }
        if self.hypothesis == Hypothesis::Null && self.control != self.treatment {
            return Err(Error::Config("a null scenario needs identical arms".into()));
        }
        Ok(())
    }

    /// Same control arm, sample size and seed with the treatment arm
    /// replaced by the control arm.
    pub fn null_counterpart(&self, n_total: u64) -> Self {
        Self {
            treatment: self.control,
            n_total: SampleSize::Fixed(n_total),
            hypothesis: Hypothesis::Null,
            ..*self
        }
    }

    /// Resolves the sample size and its split between the arms.
    pub fn allocation(&self) -> Result<(u64, u64)> {
        let spec = self.design_spec()?;
        let n = match self.n_total {
            SampleSize::Fixed(n) => n,
            SampleSize::Auto => sample_size(&self.control, &self.treatment, &spec)?.n_rounded,
        };
        if n < 4 {
            return Err(domain(format!("need at least 4 subjects, got {n}")));
        }
        Ok(spec.allocate(n))
    }
}

/// Generator seeded for replication `r` of a study seeded with `seed`.
pub fn replication_rng(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

/// Dataset of replication `r`: control subjects first, then treatment.
pub fn replicate(s: &Scenario, n0: u64, n1: u64, r: u64) -> Vec<SubjectRecord> {
    let mut rng = replication_rng(s.seed, r);
    let mut out = Vec::with_capacity((n0 + n1) as usize);
    for _ in 0..n0 {
        out.push(draw_subject(Arm::Control, &s.control, &s.censoring, &mut rng));
    }
    for _ in 0..n1 {
        out.push(draw_subject(Arm::Treatment, &s.treatment, &s.censoring, &mut rng));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub estimate: f64,
    /// `√(p̂(1−p̂)/R)`.
    pub std_error: f64,
    pub count: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(count: u64, trials: u64) -> Self {
        let p = count as f64 / trials as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            count,
            trials,
        }
    }
}

/// Rejection rates are empirical power for an alternative scenario and the
/// empirical significance level for a null one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub hypothesis: Hypothesis,
    pub rejection_rmst: Proportion,
    pub rejection_logrank: Proportion,
    /// Replications where a test could not be computed, counted as
    /// non-rejections.
    pub degenerate_rmst: u64,
    pub degenerate_logrank: u64,
    pub mean_censoring_fraction: f64,
    pub n_used: u64,
    pub n_control: u64,
    pub n_treatment: u64,
    pub d_tau_theoretical: f64,
    pub replications: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tallies {
    rmst: u64,
    logrank: u64,
    degenerate_rmst: u64,
    degenerate_logrank: u64,
    censored: u64,
}

impl Tallies {
    fn merge(self, o: Self) -> Self {
        Self {
            rmst: self.rmst + o.rmst,
            logrank: self.logrank + o.logrank,
            degenerate_rmst: self.degenerate_rmst + o.degenerate_rmst,
            degenerate_logrank: self.degenerate_logrank + o.degenerate_logrank,
            censored: self.censored + o.censored,
        }
    }
}

pub fn run_study(s: &Scenario) -> Result<StudyResult> {
    s.validate()?;
    let (n0, n1) = s.allocation()?;
    let d_tau = effect_size(&s.control, &s.treatment, s.tau)?.d_tau;

    let totals = (0..s.replications)
        .into_par_iter()
        .map(|r| {
            let data = replicate(s, n0, n1, r);
            let mut t = Tallies {
                censored: data.iter().filter(|x| !x.event).count() as u64,
                ..Tallies::default()
            };
            match rmst_test(&data, s.tau, s.alpha) {
                Ok(res) => t.rmst += res.rejected as u64,
                Err(_) => t.degenerate_rmst += 1,
            }
            match log_rank_test(&data, s.alpha) {
                Ok(res) => t.logrank += res.rejected as u64,
                Err(_) => t.degenerate_logrank += 1,
            }
            t
        })
        .reduce(Tallies::default, Tallies::merge);

    let reps = s.replications;
    Ok(StudyResult {
        hypothesis: s.hypothesis,
        rejection_rmst: Proportion::new(totals.rmst, reps),
        rejection_logrank: Proportion::new(totals.logrank, reps),
        degenerate_rmst: totals.degenerate_rmst,
        degenerate_logrank: totals.degenerate_logrank,
        mean_censoring_fraction: totals.censored as f64 / (reps * (n0 + n1)) as f64,
        n_used: n0 + n1,
        n_control: n0,
        n_treatment: n1,
        d_tau_theoretical: d_tau,
        replications: reps,
        seed: s.seed,
    })
}

/// Parameter lists whose Cartesian product forms a scenario grid. Censoring
/// is exponential with scale `2·m_nr⁰`, twice the control non-responder mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub tau: f64,
    pub p0: Vec<f64>,
    pub shape: Vec<f64>,
    pub a_r0: Vec<f64>,
    pub a_nr0: Vec<f64>,
    /// Ignored for a null grid.
    #[serde(default)]
    pub a_r1: Vec<f64>,
    #[serde(default)]
    pub a_nr1: Vec<f64>,
    #[serde(default)]
    pub delta_p: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "half")]
    pub pi: f64,
    pub hypothesis: Hypothesis,
    /// Retained range of the design sample size (alternative grids).
    #[serde(default = "default_n_range")]
    pub n_range: (f64, f64),
    /// Sample size of every null scenario.
    #[serde(default)]
    pub null_n: Option<u64>,
    pub replications: u64,
    pub seed: u64,
}

fn half() -> f64 {
    0.5
}

fn default_n_range() -> (f64, f64) {
    (100.0, 5000.0)
}

impl GridSpec {
    pub fn reference_alternative() -> Self {
        Self {
            tau: 10.0,
            p0: vec![0.1, 0.3],
            shape: vec![1.0, 2.0],
            a_r0: vec![15.0, 18.0, 20.0, 22.0, 50.0],
            a_nr0: vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 15.0, 17.0, 29.0],
            a_r1: vec![22.0, 25.0, 50.0, 55.0, 62.0, 65.0],
            a_nr1: vec![5.0, 7.0, 8.0, 9.0, 10.0, 11.0, 13.0, 15.0, 17.0, 19.0, 20.0, 29.0, 35.0, 40.0],
            delta_p: vec![0.1, 0.3],
            alpha: 0.05,
            beta: 0.2,
            pi: 0.5,
            hypothesis: Hypothesis::Alternative,
            n_range: default_n_range(),
            null_n: None,
            replications: 1000,
            seed: 20_240_601,
        }
    }

    pub fn reference_null(n: u64) -> Self {
        Self {
            a_r1: Vec::new(),
            a_nr1: Vec::new(),
            delta_p: vec![0.0],
            hypothesis: Hypothesis::Null,
            null_n: Some(n),
            ..Self::reference_alternative()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p0: f64,
    pub shape: f64,
    pub a_r0: f64,
    pub a_nr0: f64,
    pub a_r1: f64,
    pub a_nr1: f64,
    pub delta_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridScenario {
    pub point: GridPoint,
    pub scenario: Scenario,
    pub d_tau: f64,
    pub delta_r: f64,
    pub delta_nr: f64,
    pub delta_0: f64,
    pub setting: Setting,
    /// Unrounded design sample size (alternative grids).
    pub n_design: Option<f64>,
}

/// Cartesian product of the grid lists, keeping the scenarios with
/// non-negative `Δ_r`, `Δ_nr`, `Δ_0` and, under the alternative, a design
/// sample size inside `n_range`.
pub fn build_scenario_grid(g: &GridSpec) -> Result<Vec<GridScenario>> {
    let null = g.hypothesis == Hypothesis::Null;
    if null && g.null_n.is_none() {
        return Err(Error::Config("a null grid needs null_n".into()));
    }
    let mut points = Vec::new();
    for &p0 in &g.p0 {
        for &shape in &g.shape {
            for &a_r0 in &g.a_r0 {
                for &a_nr0 in &g.a_nr0 {
                    if null {
                        points.push(GridPoint { p0, shape, a_r0, a_nr0, a_r1: a_r0, a_nr1: a_nr0, delta_p: 0.0 });
                        continue;
                    }
                    for &a_nr1 in &g.a_nr1 {
                        for &a_r1 in &g.a_r1 {
                            for &delta_p in &g.delta_p {
                                points.push(GridPoint { p0, shape, a_r0, a_nr0, a_r1, a_nr1, delta_p });
                            }
                        }
                    }
                }
            }
        }
    }

    let built: Vec<Option<GridScenario>> = points
        .par_iter()
        .map(|pt| grid_scenario(g, pt))
        .collect::<Result<_>>()?;
    let mut out: Vec<GridScenario> = built.into_iter().flatten().collect();
    for (k, gs) in out.iter_mut().enumerate() {
        gs.scenario.seed = g.seed.wrapping_add(k as u64);
    }
    if out.is_empty() {
        return Err(Error::Config("no scenario survives the grid filters".into()));
    }
    Ok(out)
}

fn grid_scenario(g: &GridSpec, pt: &GridPoint) -> Result<Option<GridScenario>> {
    let law = |a: f64| SurvivalLaw::with_shape(a, pt.shape);
    let control = MixtureArm::new(pt.p0, law(pt.a_r0)?, law(pt.a_nr0)?)?;
    let treatment = MixtureArm::new(pt.p0 + pt.delta_p, law(pt.a_r1)?, law(pt.a_nr1)?)?;
    let censoring = SurvivalLaw::exponential(2.0 * pt.a_nr0 * gamma(1.0 + 1.0 / pt.shape))?;
    let e = effect_size(&control, &treatment, g.tau)?;
    if e.delta_r < 0.0 || e.delta_nr < 0.0 || e.delta_0 < 0.0 {
        return Ok(None);
    }

    let null = g.hypothesis == Hypothesis::Null;
    let mut scenario = Scenario {
        control,
        treatment,
        censoring,
        tau: g.tau,
        n_total: SampleSize::Auto,
        pi: g.pi,
        alpha: g.alpha,
        beta: g.beta,
        replications: g.replications,
        seed: g.seed,
        hypothesis: g.hypothesis,
    };
    let n_design = if null {
        scenario.n_total = SampleSize::Fixed(g.null_n.unwrap_or_default());
        None
    } else {
        match sample_size(&control, &treatment, &scenario.design_spec()?) {
            Ok(r) if r.n_total >= g.n_range.0 && r.n_total <= g.n_range.1 => {
                scenario.n_total = SampleSize::Fixed(r.n_rounded);
                Some(r.n_total)
            }
            Ok(_) | Err(Error::InfeasibleDesign(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    };
    Ok(Some(GridScenario {
        point: *pt,
        scenario,
        d_tau: e.d_tau,
        delta_r: e.delta_r,
        delta_nr: e.delta_nr,
        delta_0: e.delta_0,
        setting: e.setting,
        n_design,
    }))
}
