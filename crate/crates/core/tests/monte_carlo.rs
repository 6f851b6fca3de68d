mod common;

use common::noah;
use rand::Rng;
use survmix_core::inference::rmst_variance_hat;
use survmix_core::simulate::{draw_subject, replication_rng};
use survmix_core::{
    kaplan_meier, limiting_variance, log_rank_test, rmst_from_km, rmst_test, Arm, MixtureArm, SubjectRecord,
    SurvivalLaw,
};

fn exp(a: f64) -> SurvivalLaw {
    SurvivalLaw::exponential(a).unwrap()
}

fn sample(arm: Arm, law: &MixtureArm, cens: &SurvivalLaw, n: usize, seed: u64, stream: u64) -> Vec<SubjectRecord> {
    let mut rng = replication_rng(seed, stream);
    (0..n).map(|_| draw_subject(arm, law, cens, &mut rng)).collect()
}

#[test]
fn km_of_large_sample_stays_in_dkw_band() {
    let law = MixtureArm::new(
        0.3,
        SurvivalLaw::weibull(20.0, 2.0).unwrap(),
        SurvivalLaw::weibull(7.0, 2.0).unwrap(),
    )
    .unwrap();
    let n = 20_000;
    let data = sample(Arm::Control, &law, &SurvivalLaw::never(), n, 11, 0);
    let km = kaplan_meier(&data).unwrap();
    let band = 3.0 * ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt();
    let mut worst = 0.0f64;
    for (&t, &s) in km.times.iter().zip(&km.survival) {
        worst = worst.max((s - law.survival(t).unwrap()).abs());
        worst = worst.max((km.before(t) - law.survival(t).unwrap()).abs());
    }
    assert!(worst < band, "{worst} >= {band}");
}

#[test]
fn rmst_estimate_is_consistent() {
    let d = noah();
    for (k, arm) in [d.control, d.treatment].iter().enumerate() {
        let n = 20_000;
        let data = sample(Arm::Control, arm, &exp(7.0), n, 5, k as u64);
        let km = kaplan_meier(&data).unwrap();
        let k_hat = rmst_from_km(&km, 5.0).unwrap().value;
        let se = (limiting_variance(arm, &exp(7.0), 5.0, 1e-10).unwrap().value / n as f64).sqrt();
        let truth = arm.rmst(5.0).unwrap();
        assert!((k_hat - truth).abs() < 3.0 * se, "{k_hat} vs {truth} (se {se})");
    }
}

#[test]
fn plug_in_variance_averages_to_the_limit() {
    let arm = noah().control;
    let sigma2 = limiting_variance(&arm, &exp(7.0), 5.0, 1e-10).unwrap().value;
    let n = 2000;
    let reps = 500;
    let mean: f64 = (0..reps)
        .map(|r| rmst_variance_hat(&sample(Arm::Control, &arm, &exp(7.0), n, 3, r), 5.0).unwrap())
        .sum::<f64>()
        / reps as f64;
    assert!((mean / sigma2 - 1.0).abs() < 0.10, "{mean} vs {sigma2}");
}

#[test]
fn uncensored_exponential_variance() {
    let a = 4.0;
    let tau = 6.0;
    let arm = MixtureArm::new(0.0, exp(1.0), exp(a)).unwrap();
    let e = (-tau / a).exp();
    let analytic = a * a * (1.0 - e) - 2.0 * a * tau * e + a * a * (e - e * e);
    let data = sample(Arm::Control, &arm, &SurvivalLaw::never(), 5000, 17, 0);
    let v = rmst_variance_hat(&data, tau).unwrap();
    assert!((v / analytic - 1.0).abs() < 0.10, "{v} vs {analytic}");
}

#[test]
fn label_permutation_is_calibrated() {
    // one pooled sample, arms assigned at random: the null holds exactly
    let law = MixtureArm::new(0.3, exp(20.0), exp(6.0)).unwrap();
    let pooled = sample(Arm::Control, &law, &exp(12.0), 300, 23, 0);
    let mut rng = replication_rng(29, 0);
    let mut rejected = [0usize; 2];
    let mut zs = Vec::new();
    let resamples = 1000;
    for _ in 0..resamples {
        let data: Vec<_> = pooled
            .iter()
            .map(|r| SubjectRecord { arm: if rng.random::<bool>() { Arm::Treatment } else { Arm::Control }, ..*r })
            .collect();
        let z = rmst_test(&data, 10.0, 0.05).unwrap();
        rejected[0] += z.rejected as usize;
        rejected[1] += log_rank_test(&data, 0.05).unwrap().rejected as usize;
        zs.push(z.z);
    }
    for r in rejected {
        let rate = r as f64 / resamples as f64;
        assert!((rate - 0.05).abs() < 0.025, "{rate}");
    }
    let mean = zs.iter().sum::<f64>() / zs.len() as f64;
    assert!(mean.abs() < 0.15, "{mean}");
}

#[test]
fn tests_agree_under_proportional_hazards() {
    // single exponential laws per arm, hazard ratio 0.5
    let control = MixtureArm::new(0.0, exp(1.0), exp(5.0)).unwrap();
    let treatment = MixtureArm::new(0.0, exp(1.0), exp(10.0)).unwrap();
    for seed in 0..100 {
        let mut data = sample(Arm::Control, &control, &exp(15.0), 200, seed, 0);
        data.extend(sample(Arm::Treatment, &treatment, &exp(15.0), 200, seed, 1));
        let a = rmst_test(&data, 8.0, 0.05).unwrap();
        let b = log_rank_test(&data, 0.05).unwrap();
        assert_eq!(a.z > 0.0, b.z > 0.0, "seed {seed}");
        assert!(a.rejected && b.rejected, "seed {seed}");
    }
}
