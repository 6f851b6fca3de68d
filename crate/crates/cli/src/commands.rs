use std::path::Path;

use survmix_core::calibrate::{calibrate_with, summarize, CalibratedDesign, Set3Method, SummaryInputs};
use survmix_core::curves::{curve_points, write_curves_csv};
use survmix_core::inference::{kaplan_meier, KmCurve};
use survmix_core::simulate::{replicate, GridScenario, StudyResult, RNG_ID};
use survmix_core::trial_data::{read_csv_file, write_csv_file};
use survmix_core::{
    build_scenario_grid, effect_size, log_rank_test, rmst_test, run_study, sample_size, Arm, DesignSpec,
    EffectDecomposition, Error, GridSpec, Hypothesis, MixtureArm, SampleSize, Scenario, SummaryPayload, SummarySet,
    SurvivalLaw,
};

use crate::keys::Params;
use crate::report::{Report, Table, Unit, Value};
use crate::CliError;

const SCALE_KEYS: [&str; 4] = ["a0-r", "a0-nr", "a1-r", "a1-nr"];
const SUMMARY_KEYS: [&str; 10] = [
    "m0-r", "m0-nr", "diffm-r", "diffm-nr", "s0-r", "s0-nr", "diffs-r", "diffs-nr", "delta-r", "delta-nr",
];

fn set_keys(set: SummarySet) -> [&'static str; 4] {
    match set {
        SummarySet::Means => ["m0-r", "m0-nr", "diffm-r", "diffm-nr"],
        SummarySet::Rates => ["s0-r", "s0-nr", "diffs-r", "diffs-nr"],
        SummarySet::RatesDeltas => ["s0-r", "s0-nr", "delta-r", "delta-nr"],
    }
}

fn censor_scale(p: &Params, required: bool) -> Result<f64, CliError> {
    match p.real("ascale-cens") {
        Some(x) => Ok(x),
        None if required => Err(CliError::Usage(format!("{}: missing ascale-cens", p.sub))),
        None => Ok(f64::INFINITY),
    }
}

fn censoring_law(scale: f64) -> Result<SurvivalLaw, Error> {
    if scale == f64::INFINITY {
        Ok(SurvivalLaw::never())
    } else {
        SurvivalLaw::exponential(scale)
    }
}

fn set3_method(p: &Params) -> Result<Set3Method, CliError> {
    match p.text("set3-method").unwrap_or("root") {
        "root" => Ok(Set3Method::RootFinding),
        "taylor" => Ok(Set3Method::Taylor),
        other => Err(CliError::Usage(format!("set3-method must be root or taylor, got {other:?}"))),
    }
}

fn summary_inputs(p: &Params, censoring_required: bool) -> Result<SummaryInputs, CliError> {
    let idx = p.int("set-param").unwrap_or_default();
    let set = u8::try_from(idx)
        .ok()
        .and_then(SummarySet::from_index)
        .ok_or_else(|| CliError::Usage(format!("set-param must be 1, 2 or 3, got {idx}")))?;
    let keys = set_keys(set);
    let foreign: Vec<_> = p.present(&SUMMARY_KEYS).into_iter().filter(|k| !keys.contains(k)).collect();
    if !foreign.is_empty() {
        return Err(CliError::Usage(format!(
            "keys {} do not belong to summary set {idx}",
            foreign.join(", ")
        )));
    }
    let mut needed = vec!["p0", "delta-p", "tau"];
    needed.extend(keys);
    p.require(&needed, &format!("summary set {idx}"))?;
    let v: Vec<f64> = keys.iter().map(|k| p.real(k).unwrap_or_default()).collect();
    let payload = match set {
        SummarySet::Means => SummaryPayload::Means { m0_r: v[0], m0_nr: v[1], diffm_r: v[2], diffm_nr: v[3] },
        SummarySet::Rates => SummaryPayload::Rates { s0_r: v[0], s0_nr: v[1], diffs_r: v[2], diffs_nr: v[3] },
        SummarySet::RatesDeltas => {
            SummaryPayload::RatesDeltas { s0_r: v[0], s0_nr: v[1], delta_r: v[2], delta_nr: v[3] }
        }
    };
    Ok(SummaryInputs {
        p0: p.need_real("p0")?,
        delta_p: p.need_real("delta-p")?,
        tau: p.need_real("tau")?,
        censor_scale: censor_scale(p, censoring_required)?,
        censor_scale_treatment: p.real("ascale-cens-treatment"),
        shape: p.real_or("shape", 1.0),
        payload,
    })
}

/// Builds both arms either from a summary set or from the four scales.
fn design(p: &Params, censoring_required: bool) -> Result<CalibratedDesign, CliError> {
    let scales = p.present(&SCALE_KEYS);
    if p.has("set-param") {
        if !scales.is_empty() {
            return Err(CliError::Usage(format!(
                "set-param cannot be combined with scale keys ({})",
                scales.join(", ")
            )));
        }
        let inputs = summary_inputs(p, censoring_required)?;
        return Ok(calibrate_with(&inputs, set3_method(p)?)?);
    }
    if scales.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: give set-param with its summary keys, or the scales {}",
            p.sub,
            SCALE_KEYS.join(", ")
        )));
    }
    let summaries = p.present(&SUMMARY_KEYS);
    if !summaries.is_empty() {
        return Err(CliError::Usage(format!(
            "summary keys ({}) need set-param; they cannot be mixed with scales",
            summaries.join(", ")
        )));
    }
    let mut needed = vec!["p0", "delta-p", "tau"];
    needed.extend(SCALE_KEYS);
    p.require(&needed, "distribution inputs")?;
    let shape = p.real_or("shape", 1.0);
    let law = |k: &str| SurvivalLaw::with_shape(p.real(k).unwrap_or_default(), shape);
    let p0 = p.need_real("p0")?;
    let p1 = p0 + p.need_real("delta-p")?;
    let cens = censor_scale(p, censoring_required)?;
    Ok(CalibratedDesign {
        control: MixtureArm::new(p0, law("a0-r")?, law("a0-nr")?)?,
        treatment: MixtureArm::new(p1, law("a1-r")?, law("a1-nr")?)?,
        censoring_control: censoring_law(cens)?,
        censoring_treatment: censoring_law(p.real("ascale-cens-treatment").unwrap_or(cens))?,
        tau: p.need_real("tau")?,
    })
}

fn effect_rows(r: &mut Report, e: &EffectDecomposition) {
    r.num("RMST difference", e.d_tau, Unit::Time);
    r.num("RMST difference responders", e.delta_r, Unit::Time);
    r.num("RMST difference non-responders", e.delta_nr, Unit::Time);
    r.num("RMST difference responders vs non-responders (control)", e.delta_0, Unit::Time);
    r.num("Response difference", e.delta_p, Unit::Probability);
    r.num("Response rate control", e.p0, Unit::Probability);
    r.text("Setting", e.setting.to_string());
}

fn emit_curves(p: &Params, d: &CalibratedDesign, r: &mut Report) -> Result<(), CliError> {
    let Some(path) = p.text("curves") else { return Ok(()) };
    let grid = p.count_or("curves-grid", 201)? as usize;
    let points = curve_points(&d.control, &d.treatment, d.tau, grid)?;
    let file = std::fs::File::create(path).map_err(Error::from)?;
    write_curves_csv(std::io::BufWriter::new(file), &points)?;
    r.text("Curves file", path);
    Ok(())
}

pub fn effectsize(p: &Params) -> Result<Report, CliError> {
    let mut r = Report::new("effectsize", p.echo());
    let anticipated = ["delta-r", "delta-nr", "delta-0", "delta-p", "p0"];
    if p.has("delta-0") {
        let other = p.present(&["set-param", "a0-r", "a0-nr", "a1-r", "a1-nr", "shape", "curves"]);
        if !other.is_empty() {
            return Err(CliError::Usage(format!(
                "delta-0 selects anticipated effects; remove {}",
                other.join(", ")
            )));
        }
    }
    if p.has("delta-0") || (!p.has("set-param") && p.present(&SCALE_KEYS).is_empty()) {
        p.require(&anticipated, "anticipated effects (or give set-param / the four scales)")?;
        let v: Vec<f64> = anticipated.iter().map(|k| p.real(k).unwrap_or_default()).collect();
        let e = EffectDecomposition::from_anticipated(v[0], v[1], v[2], v[3], v[4])?;
        effect_rows(&mut r, &e);
        return Ok(r);
    }
    let d = design(p, false)?;
    let e = effect_size(&d.control, &d.treatment, d.tau)?;
    effect_rows(&mut r, &e);
    emit_curves(p, &d, &mut r)?;
    Ok(r)
}

fn design_spec(p: &Params, d: &CalibratedDesign) -> Result<DesignSpec, CliError> {
    Ok(DesignSpec::new(
        d.tau,
        p.real_or("alpha", 0.05),
        p.real_or("beta", 0.2),
        p.real_or("pi", 0.5),
        d.censoring_control,
    )?
    .with_treatment_censoring(d.censoring_treatment)
    .with_two_sided(p.flag("two-sided")))
}

pub fn samplesize(p: &Params) -> Result<Report, CliError> {
    let d = design(p, true)?;
    let spec = design_spec(p, &d)?;
    let s = sample_size(&d.control, &d.treatment, &spec)?;
    let mut r = Report::new("samplesize", p.echo());
    r.num("Sample size", s.n_total, Unit::Count);
    r.int("Sample size (rounded)", s.n_rounded, Unit::Count);
    r.int("Sample size control", s.n_control, Unit::Count);
    r.int("Sample size treatment", s.n_treatment, Unit::Count);
    effect_rows(&mut r, &s.effect);
    r.num("Variance control", s.sigma0_sq, Unit::TimeSquared);
    r.num("Variance treatment", s.sigma1_sq, Unit::TimeSquared);
    r.num("Power at rounded size", s.power, Unit::Probability);
    emit_curves(p, &d, &mut r)?;
    Ok(r)
}

pub fn calibrate(p: &Params) -> Result<Report, CliError> {
    let d = design(p, false)?;
    let mut r = Report::new("calibrate", p.echo());
    let arms = [("control", &d.control), ("treatment", &d.treatment)];
    for (name, arm) in arms {
        r.num(&format!("Scale {name} responders"), arm.responders().scale(), Unit::Time);
        r.num(&format!("Scale {name} non-responders"), arm.non_responders().scale(), Unit::Time);
    }
    r.num("Shape", d.control.responders().shape(), Unit::Dimensionless);
    for set in [SummarySet::Means, SummarySet::Rates, SummarySet::RatesDeltas] {
        let i = set.index();
        let rows: [(&str, f64, Unit); 4] = match summarize(&d, set).payload {
            SummaryPayload::Means { m0_r, m0_nr, diffm_r, diffm_nr } => [
                ("m0-r", m0_r, Unit::Time),
                ("m0-nr", m0_nr, Unit::Time),
                ("diffm-r", diffm_r, Unit::Time),
                ("diffm-nr", diffm_nr, Unit::Time),
            ],
            SummaryPayload::Rates { s0_r, s0_nr, diffs_r, diffs_nr } => [
                ("s0-r", s0_r, Unit::Probability),
                ("s0-nr", s0_nr, Unit::Probability),
                ("diffs-r", diffs_r, Unit::Probability),
                ("diffs-nr", diffs_nr, Unit::Probability),
            ],
            SummaryPayload::RatesDeltas { s0_r, s0_nr, delta_r, delta_nr } => [
                ("s0-r", s0_r, Unit::Probability),
                ("s0-nr", s0_nr, Unit::Probability),
                ("delta-r", delta_r, Unit::Time),
                ("delta-nr", delta_nr, Unit::Time),
            ],
        };
        for (k, v, u) in rows {
            r.num(&format!("Set {i} {k}"), v, u);
        }
    }
    emit_curves(p, &d, &mut r)?;
    Ok(r)
}

const STUDY_COLUMNS: [(&str, Unit); 10] = [
    ("n", Unit::Count),
    ("n_control", Unit::Count),
    ("n_treatment", Unit::Count),
    ("d_tau", Unit::Time),
    ("rmst_rejection", Unit::Probability),
    ("rmst_se", Unit::Probability),
    ("logrank_rejection", Unit::Probability),
    ("logrank_se", Unit::Probability),
    ("censoring_fraction", Unit::Probability),
    ("degenerate", Unit::Count),
];

fn study_cells(s: &StudyResult) -> Vec<Value> {
    vec![
        Value::Int(s.n_used),
        Value::Int(s.n_control),
        Value::Int(s.n_treatment),
        Value::Num(s.d_tau_theoretical),
        Value::Num(s.rejection_rmst.estimate),
        Value::Num(s.rejection_rmst.std_error),
        Value::Num(s.rejection_logrank.estimate),
        Value::Num(s.rejection_logrank.std_error),
        Value::Num(s.mean_censoring_fraction),
        Value::Int(s.degenerate_rmst.max(s.degenerate_logrank)),
    ]
}

fn hypothesis(p: &Params) -> Result<Hypothesis, CliError> {
    match p.text("hypothesis").unwrap_or("alternative") {
        "alternative" => Ok(Hypothesis::Alternative),
        "null" => Ok(Hypothesis::Null),
        other => Err(CliError::Usage(format!("hypothesis must be alternative or null, got {other:?}"))),
    }
}

fn test_alpha(p: &Params) -> f64 {
    let alpha = p.real_or("alpha", 0.05);
    if p.flag("two-sided") {
        alpha / 2.0
    } else {
        alpha
    }
}

pub fn simulate(p: &Params) -> Result<Report, CliError> {
    if p.has("grid") {
        return simulate_grid(p);
    }
    let d = design(p, true)?;
    if d.censoring_control != d.censoring_treatment {
        return Err(CliError::Usage("simulation uses one censoring law for both arms".into()));
    }
    let hyp = hypothesis(p)?;
    let n_total = match p.text("n").unwrap_or("auto") {
        "auto" => SampleSize::Auto,
        raw => SampleSize::Fixed(
            raw.parse()
                .map_err(|_| CliError::Usage(format!("n must be a positive integer or auto, got {raw:?}")))?,
        ),
    };
    let scenario = Scenario {
        control: d.control,
        treatment: if hyp == Hypothesis::Null { d.control } else { d.treatment },
        censoring: d.censoring_control,
        tau: d.tau,
        n_total,
        pi: p.real_or("pi", 0.5),
        alpha: test_alpha(p),
        beta: p.real_or("beta", 0.2),
        replications: p.count_or("replications", 1000)?,
        seed: p.count_or("seed", 1)?,
        hypothesis: hyp,
    };
    let s = run_study(&scenario)?;

    let mut r = Report::new("simulate", p.echo());
    r.rng = Some(RNG_ID);
    let label = match hyp {
        Hypothesis::Alternative => "Empirical power",
        Hypothesis::Null => "Empirical significance level",
    };
    r.int("Sample size", s.n_used, Unit::Count);
    r.int("Sample size control", s.n_control, Unit::Count);
    r.int("Sample size treatment", s.n_treatment, Unit::Count);
    r.num("RMST difference", s.d_tau_theoretical, Unit::Time);
    r.num(&format!("{label} RMST test"), s.rejection_rmst.estimate, Unit::Probability);
    r.num(&format!("{label} RMST test (standard error)"), s.rejection_rmst.std_error, Unit::Probability);
    r.num(&format!("{label} log-rank test"), s.rejection_logrank.estimate, Unit::Probability);
    r.num(&format!("{label} log-rank test (standard error)"), s.rejection_logrank.std_error, Unit::Probability);
    r.num("Mean censoring fraction", s.mean_censoring_fraction, Unit::Probability);
    r.int("Degenerate replications RMST test", s.degenerate_rmst, Unit::Count);
    r.int("Degenerate replications log-rank test", s.degenerate_logrank, Unit::Count);
    r.int("Replications", s.replications, Unit::Count);
    r.int("Seed", s.seed, Unit::Count);
    let mut table = Table::new(&STUDY_COLUMNS);
    table.rows.push(study_cells(&s));
    r.table = Some(table);

    if let Some(path) = p.text("emit-data") {
        let rep = p.count_or("emit-replication", 0)?;
        if rep >= s.replications {
            return Err(CliError::Usage(format!("emit-replication {rep} is not below replications {}", s.replications)));
        }
        let data = replicate(&scenario, s.n_control, s.n_treatment, rep);
        write_csv_file(Path::new(path), &data)?;
        r.text("Dataset file", path);
        r.int("Dataset replication", rep, Unit::Count);
    }
    Ok(r)
}

fn simulate_grid(p: &Params) -> Result<Report, CliError> {
    let mut single: Vec<&str> = crate::keys::ARMS.iter().map(|k| k.name).collect();
    single.extend(["n", "emit-data", "emit-replication", "hypothesis"]);
    let single = p.present(&single);
    if !single.is_empty() {
        return Err(CliError::Usage(format!(
            "grid replaces the single-scenario keys; remove {}",
            single.join(", ")
        )));
    }
    let path = p.text("grid").expect("checked by caller");
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read grid {path}: {e}")))?;
    let mut spec: GridSpec = toml::from_str(&text).map_err(|e| CliError::Usage(format!("grid file {path}: {e}")))?;
    if let Some(n) = p.int("replications") {
        spec.replications = n.max(0) as u64;
    }
    if let Some(s) = p.int("seed") {
        spec.seed = s as u64;
    }
    if p.has("alpha") || p.has("two-sided") {
        spec.alpha = test_alpha(p);
    }
    if let Some(b) = p.real("beta") {
        spec.beta = b;
    }
    if let Some(pi) = p.real("pi") {
        spec.pi = pi;
    }

    let grid = build_scenario_grid(&spec)?;
    let take = p.count_or("grid-sample", grid.len() as u64)?.clamp(1, grid.len() as u64) as usize;
    let chosen: Vec<&GridScenario> = (0..take).map(|i| &grid[i * grid.len() / take]).collect();

    let mut columns = vec![
        ("scenario", Unit::Count),
        ("p0", Unit::Probability),
        ("shape", Unit::Dimensionless),
        ("a_r0", Unit::Time),
        ("a_nr0", Unit::Time),
        ("a_r1", Unit::Time),
        ("a_nr1", Unit::Time),
        ("delta_p", Unit::Probability),
        ("setting", Unit::Label),
        ("n_design", Unit::Count),
    ];
    columns.extend(STUDY_COLUMNS);
    let mut table = Table::new(&columns);
    let mut rmst = Vec::new();
    let mut logrank = Vec::new();
    for (k, gs) in chosen.iter().enumerate() {
        let s = run_study(&gs.scenario)?;
        rmst.push(s.rejection_rmst.estimate);
        logrank.push(s.rejection_logrank.estimate);
        let pt = gs.point;
        let mut row = vec![
            Value::Int(k as u64),
            Value::Num(pt.p0),
            Value::Num(pt.shape),
            Value::Num(pt.a_r0),
            Value::Num(pt.a_nr0),
            Value::Num(pt.a_r1),
            Value::Num(pt.a_nr1),
            Value::Num(pt.delta_p),
            Value::Text(gs.setting.to_string()),
            gs.n_design.map_or(Value::Text(String::new()), Value::Num),
        ];
        row.extend(study_cells(&s));
        table.rows.push(row);
    }

    let mut r = Report::new("simulate", p.echo());
    r.rng = Some(RNG_ID);
    r.int("Retained scenarios", grid.len() as u64, Unit::Count);
    r.int("Simulated scenarios", chosen.len() as u64, Unit::Count);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut sorted = rmst.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[m] } else { 0.5 * (sorted[m - 1] + sorted[m]) };
    r.num("Median rejection rate RMST test", median, Unit::Probability);
    r.num("Mean rejection rate RMST test", mean(&rmst), Unit::Probability);
    r.num("Mean rejection rate log-rank test", mean(&logrank), Unit::Probability);
    r.table = Some(table);
    Ok(r)
}

fn km_rows(arm: Arm, km: &KmCurve, table: &mut Table) {
    let a = Value::Int(arm.index() as u64);
    table.rows.push(vec![a.clone(), Value::Num(0.0), Value::Num(1.0), Value::Int(km.n as u64), Value::Int(0)]);
    for j in 0..km.times.len() {
        table.rows.push(vec![
            a.clone(),
            Value::Num(km.times[j]),
            Value::Num(km.survival[j]),
            Value::Int(km.at_risk[j] as u64),
            Value::Int(km.events[j] as u64),
        ]);
    }
}

pub fn analyze(p: &Params) -> Result<Report, CliError> {
    p.require(&["data", "tau"], "analyze")?;
    let path = p.text("data").expect("required");
    let tau = p.need_real("tau")?;
    let alpha = test_alpha(p);
    let data = read_csv_file(Path::new(path))?;
    for arm in [Arm::Control, Arm::Treatment] {
        let n = data.iter().filter(|r| r.arm == arm).count();
        if n < 2 {
            return Err(Error::Degenerate(format!("{arm:?} arm has {n} subjects; at least 2 are needed")).into());
        }
    }
    let t = rmst_test(&data, tau, alpha)?;
    let lr = log_rank_test(&data, alpha)?;

    let mut r = Report::new("analyze", p.echo());
    r.int("Sample size control", t.n0 as u64, Unit::Count);
    r.int("Sample size treatment", t.n1 as u64, Unit::Count);
    r.num("RMST control", t.k_hat0, Unit::Time);
    r.num("RMST treatment", t.k_hat1, Unit::Time);
    r.num("RMST difference", t.d_hat(), Unit::Time);
    r.num("Variance control", t.sigma_hat0_sq, Unit::TimeSquared);
    r.num("Variance treatment", t.sigma_hat1_sq, Unit::TimeSquared);
    r.num("RMST test z", t.z, Unit::Dimensionless);
    r.num("RMST test one-sided p-value", t.p_one_sided, Unit::Probability);
    r.text("RMST test rejects", if t.rejected { "yes" } else { "no" });
    r.num("Log-rank z", lr.z, Unit::Dimensionless);
    r.num("Log-rank one-sided p-value", lr.p_one_sided, Unit::Probability);
    r.text("Log-rank rejects", if lr.rejected { "yes" } else { "no" });
    r.num("Observed events treatment", lr.observed1, Unit::Count);
    r.num("Expected events treatment", lr.expected1, Unit::Count);
    r.warnings = t.warnings;

    if let Some(km_path) = p.text("km") {
        let mut table = Table::new(&[
            ("arm", Unit::Label),
            ("time", Unit::Time),
            ("survival", Unit::Probability),
            ("at_risk", Unit::Count),
            ("events", Unit::Count),
        ]);
        for arm in [Arm::Control, Arm::Treatment] {
            let rows: Vec<_> = data.iter().filter(|x| x.arm == arm).copied().collect();
            km_rows(arm, &kaplan_meier(&rows)?, &mut table);
        }
        let mut km_report = Report::new("analyze", Default::default());
        km_report.table = Some(table);
        std::fs::write(km_path, km_report.render("csv")?).map_err(Error::from)?;
        r.text("Kaplan-Meier file", km_path);
    }
    Ok(r)
}
