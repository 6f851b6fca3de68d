//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its own PASS/FAIL line; exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use common::{noah, noah_spec};
use survmix_core::calibrate::SummarySet;
use survmix_core::quadrature::{integrate, QuadConfig};
use survmix_core::simulate::{draw_subject, replication_rng, GridScenario, RNG_ID};
use survmix_core::{
    build_scenario_grid, calibrate, effect_size, hazard_ratio, kaplan_meier, limiting_variance, power_at_n,
    rmst_from_km, rmst_test, run_study, sample_size, summarize, Arm, CalibratedDesign, GridSpec, Hypothesis,
    MixtureArm, SampleSize, Scenario, SubjectRecord, SummaryPayload, SurvivalLaw,
};

struct Check {
    passed: bool,
    lines: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            passed: true,
            lines: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "MISS" }));
    }

    fn info(&mut self, what: String) {
        self.lines.push(format!("     {what}"));
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn exp(a: f64) -> SurvivalLaw {
    SurvivalLaw::exponential(a).unwrap()
}

fn noah_scenario(n: u64, replications: u64, seed: u64) -> Scenario {
    let d = noah();
    Scenario {
        control: d.control,
        treatment: d.treatment,
        censoring: d.censoring_control,
        tau: 5.0,
        n_total: SampleSize::Fixed(n),
        pi: 0.5,
        alpha: 0.05,
        beta: 0.2,
        replications,
        seed,
        hypothesis: Hypothesis::Alternative,
    }
}

fn c1_effect_size() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let d = noah();
    let e = effect_size(&d.control, &d.treatment, 5.0).unwrap();
    let elapsed = start.elapsed();
    c.expect(within(e.d_tau, 0.43, 0.005), format!("RMST difference {:.5} (0.43 ± 0.005)", e.d_tau));
    c.expect(within(e.delta_r, 0.90, 0.005), format!("responders {:.5} (0.90 ± 0.005)", e.delta_r));
    c.expect(within(e.delta_nr, 0.0, 0.005), format!("non-responders {:.5} (0.00 ± 0.005)", e.delta_nr));
    c.expect(within(e.delta_p, 0.19, 0.005), format!("response difference {:.5} (0.19 ± 0.005)", e.delta_p));
    c.expect(elapsed < Duration::from_secs(1), format!("runtime {elapsed:?} (< 1 s)"));
    c
}

fn c2_sample_size() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let d = noah();
    let r = sample_size(&d.control, &d.treatment, &noah_spec()).unwrap();
    let elapsed = start.elapsed();
    c.expect(within(r.n_total, 465.98, 1.0), format!("sample size {:.2} (465.98 ± 1.0)", r.n_total));
    c.info(format!(
        "D = {:.5}, sigma0^2 = {:.5}, sigma1^2 = {:.5}, rounded {} ({} + {})",
        r.d_tau, r.sigma0_sq, r.sigma1_sq, r.n_rounded, r.n_control, r.n_treatment
    ));
    c.expect(elapsed < Duration::from_secs(5), format!("runtime {elapsed:?} (< 5 s)"));
    c
}

fn c3_noah_power() -> Check {
    let mut c = Check::new();
    let d = noah();
    let targets = [(466, 0.80, 0.76), (235, 0.41, 0.33)];
    for (n, rmst_target, lr_target) in targets {
        let r = run_study(&noah_scenario(n, 10_000, 20_160_000 + n)).unwrap();
        let asym = power_at_n(&d.control, &d.treatment, &noah_spec(), n).unwrap();
        c.expect(
            within(r.rejection_rmst.estimate, rmst_target, 0.02),
            format!(
                "n={n}: RMST power {:.4} ± {:.4} ({rmst_target} ± 0.02)",
                r.rejection_rmst.estimate, r.rejection_rmst.std_error
            ),
        );
        c.expect(
            within(r.rejection_logrank.estimate, lr_target, 0.02),
            format!(
                "n={n}: log-rank power {:.4} ± {:.4} ({lr_target} ± 0.02)",
                r.rejection_logrank.estimate, r.rejection_logrank.std_error
            ),
        );
        c.info(format!(
            "n={n}: asymptotic power {asym:.4}, censored {:.3}, degenerate {}/{}",
            r.mean_censoring_fraction, r.degenerate_rmst, r.degenerate_logrank
        ));
    }
    c
}

/// Every `len/k`-th element, `k` of them.
fn stride<T: Copy>(v: &[T], k: usize) -> Vec<T> {
    let k = k.min(v.len());
    (0..k).map(|i| v[i * v.len() / k]).collect()
}

fn alternative_grid() -> Vec<GridScenario> {
    build_scenario_grid(&GridSpec::reference_alternative()).unwrap()
}

fn c4_null_calibration(grid: &[GridScenario]) -> Check {
    let mut c = Check::new();
    // one null scenario per control arm, sized like its first alternative
    let mut by_control: BTreeMap<String, &GridScenario> = BTreeMap::new();
    for gs in grid {
        let p = gs.point;
        by_control.entry(format!("{:?}", (p.p0, p.shape, p.a_r0, p.a_nr0))).or_insert(gs);
    }
    let candidates: Vec<&GridScenario> = by_control.values().copied().collect();
    let chosen = stride(&candidates, 20);
    c.info(format!("{} control arms with a retained alternative, {} simulated", candidates.len(), chosen.len()));

    let mut pooled = [0u64; 2];
    let mut total = 0u64;
    for gs in &chosen {
        let SampleSize::Fixed(n) = gs.scenario.n_total else { unreachable!() };
        let null = gs.scenario.null_counterpart(n);
        let r = run_study(&null).unwrap();
        let (a, b) = (r.rejection_rmst.estimate, r.rejection_logrank.estimate);
        let p = gs.point;
        c.expect(
            (0.03..=0.07).contains(&a) && (0.03..=0.07).contains(&b),
            format!(
                "p0={} b={} a_r0={} a_nr0={} n={n}: RMST {a:.3}, log-rank {b:.3} ([0.03, 0.07])",
                p.p0, p.shape, p.a_r0, p.a_nr0
            ),
        );
        pooled[0] += r.rejection_rmst.count;
        pooled[1] += r.rejection_logrank.count;
        total += r.replications;
    }
    let (pa, pb) = (pooled[0] as f64 / total as f64, pooled[1] as f64 / total as f64);
    c.expect(
        (0.045..=0.055).contains(&pa) && (0.045..=0.055).contains(&pb),
        format!("pooled: RMST {pa:.4}, log-rank {pb:.4} ([0.045, 0.055])"),
    );
    c
}

fn c5_grid_power(grid: &[GridScenario]) -> Check {
    let mut c = Check::new();
    let mut d: Vec<f64> = grid.iter().map(|g| g.d_tau).collect();
    let mut n: Vec<f64> = grid.iter().map(|g| g.n_design.unwrap()).collect();
    let (dmed, nmed) = (median(&mut d), median(&mut n));
    let (dmin, dmax) = (d[0], d[d.len() - 1]);
    let (nmin, nmax) = (n[0], n[n.len() - 1]);
    c.info(format!("retained alternative scenarios: {}", grid.len()));
    c.info(format!("D range [{dmin:.3}, {dmax:.3}], median {dmed:.3} (published: [0.15, 1.82], median 0.60)"));
    c.info(format!("n range [{nmin:.1}, {nmax:.1}], median {nmed:.1} (published: [125, 4824], median 685)"));
    c.expect(dmin >= 0.15 && dmax <= 1.82, "retained D values inside [0.15, 1.82]".into());
    c.expect(nmin >= 125.0 && nmax <= 4824.0, "retained sample sizes inside [125, 4824]".into());

    let chosen = stride(grid, 40);
    let results: Vec<_> = chosen.iter().map(|gs| run_study(&gs.scenario).unwrap()).collect();
    let mut rmst: Vec<f64> = results.iter().map(|r| r.rejection_rmst.estimate).collect();
    let lr_mean = results.iter().map(|r| r.rejection_logrank.estimate).sum::<f64>() / results.len() as f64;
    let rmst_mean = rmst.iter().sum::<f64>() / rmst.len() as f64;
    let (lo, hi) = rmst.iter().fold((1.0f64, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let med = median(&mut rmst);
    c.info(format!("simulated {} scenarios, 1000 replications each; RMST power range [{lo:.3}, {hi:.3}]", chosen.len()));
    c.expect((0.78..=0.82).contains(&med), format!("median RMST power {med:.4} ([0.78, 0.82])"));
    c.expect(
        lr_mean <= rmst_mean,
        format!("mean log-rank power {lr_mean:.4} <= mean RMST power {rmst_mean:.4}"),
    );
    c
}

fn c6_variance_oracle() -> Check {
    let mut c = Check::new();
    let mut rng = replication_rng(6, 0);
    for k in 0..5 {
        let shape = if k % 2 == 0 { 1.0 } else { 2.0 };
        let p = rng.random_range(0.1..0.6);
        let a_r = rng.random_range(10.0..40.0);
        let a_nr = rng.random_range(3.0..12.0);
        let tau = rng.random_range(3.0..10.0);
        let law = |a| SurvivalLaw::with_shape(a, shape).unwrap();
        let arm = MixtureArm::new(p, law(a_r), law(a_nr)).unwrap();
        let cens = exp(2.0 * a_nr * gamma(1.0 + 1.0 / shape));
        let sigma2 = limiting_variance(&arm, &cens, tau, 1e-10).unwrap().value;

        let n = 2000;
        let k_hats: Vec<f64> = (0..500u64)
            .into_par_iter()
            .map(|r| {
                let mut g = replication_rng(600 + k, r);
                let data: Vec<SubjectRecord> = (0..n).map(|_| draw_subject(Arm::Control, &arm, &cens, &mut g)).collect();
                rmst_from_km(&kaplan_meier(&data).unwrap(), tau).unwrap().value
            })
            .collect();
        let mean = k_hats.iter().sum::<f64>() / k_hats.len() as f64;
        let var = k_hats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k_hats.len() - 1) as f64;
        let mc = n as f64 * var;
        let rel = mc / sigma2 - 1.0;
        c.expect(
            rel.abs() <= 0.10,
            format!(
                "b={shape} p={p:.3} a_r={a_r:.2} a_nr={a_nr:.2} tau={tau:.2}: limit {sigma2:.4}, Monte Carlo {mc:.4} ({:+.1}%)",
                100.0 * rel
            ),
        );
    }
    c
}

fn random_arm<R: Rng>(rng: &mut R, shape: f64) -> MixtureArm {
    let law = |a: f64| SurvivalLaw::with_shape(a, shape).unwrap();
    MixtureArm::new(rng.random_range(0.0..=1.0), law(rng.random_range(0.5..40.0)), law(rng.random_range(0.5..40.0)))
        .unwrap()
}

fn c7_analytic() -> Check {
    let mut c = Check::new();
    let mut rng = replication_rng(7, 0);

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let shape = rng.random_range(0.5..3.0);
        let (a, b) = (random_arm(&mut rng, shape), random_arm(&mut rng, shape));
        let tau = rng.random_range(0.5..20.0);
        let e = effect_size(&a, &b, tau).unwrap();
        let direct = b.rmst(tau).unwrap() - a.rmst(tau).unwrap();
        worst = worst.max((e.d_tau - direct).abs() / tau);
    }
    c.expect(worst <= 1e-10, format!("decomposed vs direct RMST difference: worst {worst:.2e} (1e-10)"));

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let law = SurvivalLaw::with_shape(rng.random_range(0.5..40.0), rng.random_range(0.5..3.0)).unwrap();
        let tau = rng.random_range(0.5..20.0);
        let q = integrate(|t| law.survival(t).unwrap(), 0.0, tau, QuadConfig::absolute(1e-12)).unwrap().value;
        worst = worst.max((law.rmst(tau).unwrap() - q).abs() / q);
    }
    c.expect(worst <= 1e-8, format!("closed-form RMST vs quadrature: worst {worst:.2e} (1e-8)"));

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let shape = rng.random_range(0.7..2.5);
        let (a, b) = (random_arm(&mut rng, shape), random_arm(&mut rng, shape));
        let t = rng.random_range(0.1..8.0);
        let h = 1e-5;
        let dlog = |m: &MixtureArm| -(m.survival(t + h).unwrap().ln() - m.survival(t - h).unwrap().ln()) / (2.0 * h);
        let hr = hazard_ratio(&a, &b, t).unwrap();
        worst = worst.max((hr - dlog(&b) / dlog(&a)).abs() / hr);
    }
    c.expect(worst <= 1e-4, format!("hazard ratio vs log-derivative: worst {worst:.2e} (1e-4)"));

    let mut worst = 0.0f64;
    let mut tried = 0;
    while tried < 300 {
        let shape = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.5..3.0) };
        let law = |a: f64| SurvivalLaw::with_shape(a, shape).unwrap();
        let p0 = rng.random_range(0.05..0.6);
        let a_r0 = rng.random_range(5.0..40.0);
        let a_nr0 = rng.random_range(2.0..20.0);
        let design = CalibratedDesign {
            control: MixtureArm::new(p0, law(a_r0), law(a_nr0)).unwrap(),
            treatment: MixtureArm::new(
                p0 + rng.random_range(0.0..0.3),
                law(a_r0 * rng.random_range(1.0..2.0)),
                law(a_nr0 * rng.random_range(1.0..2.0)),
            )
            .unwrap(),
            censoring_control: exp(20.0),
            censoring_treatment: exp(20.0),
            tau: rng.random_range(2.0..8.0),
        };
        tried += 1;
        for set in [SummarySet::Means, SummarySet::Rates, SummarySet::RatesDeltas] {
            let s = summarize(&design, set);
            let back = summarize(&calibrate(&s).unwrap(), set);
            worst = worst.max(payload_distance(&s.payload, &back.payload));
        }
    }
    c.expect(worst <= 1e-8, format!("calibrate/summarize round trips (300 designs x 3 sets): worst {worst:.2e} (1e-8)"));

    let rec = |time, event| SubjectRecord { arm: Arm::Control, time, event, responder: None };
    let km = kaplan_meier(&[rec(1.0, true), rec(2.0, false), rec(3.0, true)]).unwrap();
    let k = rmst_from_km(&km, 3.0).unwrap().value;
    let exact = km.at(0.5) == 1.0
        && within(km.at(1.0), 2.0 / 3.0, 1e-15)
        && km.at(3.0) == 0.0
        && within(k, 7.0 / 3.0, 1e-15);
    c.expect(exact, format!("three-subject Kaplan-Meier example: K(3) = {k}"));

    let mut worst = 0.0f64;
    for seed in 0..50 {
        let s = noah_scenario(120, 1, seed);
        let data = survmix_core::simulate::replicate(&s, 60, 60, 0);
        let factor = rng.random_range(0.1..50.0);
        let scaled: Vec<_> = data.iter().map(|r| SubjectRecord { time: r.time * factor, ..*r }).collect();
        let z = rmst_test(&data, 5.0, 0.05).unwrap().z;
        let zs = rmst_test(&scaled, 5.0 * factor, 0.05).unwrap().z;
        worst = worst.max((z - zs).abs() / z.abs().max(1.0));
    }
    c.expect(worst <= 1e-9, format!("time rescaling leaves z unchanged: worst {worst:.2e}"));
    c
}

fn payload_distance(a: &SummaryPayload, b: &SummaryPayload) -> f64 {
    let v = |p: &SummaryPayload| match *p {
        SummaryPayload::Means { m0_r, m0_nr, diffm_r, diffm_nr } => [m0_r, m0_nr, diffm_r, diffm_nr],
        SummaryPayload::Rates { s0_r, s0_nr, diffs_r, diffs_nr } => [s0_r, s0_nr, diffs_r, diffs_nr],
        SummaryPayload::RatesDeltas { s0_r, s0_nr, delta_r, delta_nr } => [s0_r, s0_nr, delta_r, delta_nr],
    };
    v(a).iter()
        .zip(v(b))
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn c8_hazard_ratio_band() -> Check {
    let mut c = Check::new();
    let d = noah();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 1..=1000 {
        let hr = hazard_ratio(&d.control, &d.treatment, 5.0 * i as f64 / 1000.0).unwrap();
        lo = lo.min(hr);
        hi = hi.max(hr);
    }
    c.expect(lo >= 0.44 && hi <= 0.66, format!("hazard ratio on (0, 5] spans [{lo:.4}, {hi:.4}] ([0.44, 0.66])"));
    c
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn main() {
    println!("acceptance suite (rng: {RNG_ID})");
    let grid = alternative_grid();
    let criteria: Vec<Criterion> = vec![
        ("1 NOAH effect size", Box::new(c1_effect_size)),
        ("2 NOAH sample size", Box::new(c2_sample_size)),
        ("3 NOAH power reproduction", Box::new(c3_noah_power)),
        ("4 null calibration", Box::new(|| c4_null_calibration(&grid))),
        ("5 grid power", Box::new(|| c5_grid_power(&grid))),
        ("6 variance oracle", Box::new(c6_variance_oracle)),
        ("7 analytic properties", Box::new(c7_analytic)),
        ("8 hazard ratio band", Box::new(c8_hazard_ratio_band)),
    ];

    let mut failed = Vec::new();
    for (name, run) in &criteria {
        let start = Instant::now();
        let check = run();
        let secs = start.elapsed().as_secs_f64();
        println!("{} criterion {name} ({secs:.2} s)", if check.passed { "PASS" } else { "FAIL" });
        for line in &check.lines {
            println!("    {line}");
        }
        if !check.passed {
            failed.push(*name);
        }
    }
    println!(
        "acceptance: {} passed, {} failed{}",
        criteria.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join("; ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
