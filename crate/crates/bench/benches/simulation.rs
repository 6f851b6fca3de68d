use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use survmix_core::simulate::replicate;
use survmix_core::{
    calibrate, log_rank_test, rmst_test, run_study, Hypothesis, SampleSize, Scenario, SummaryInputs, SummaryPayload,
};

fn scenario(replications: u64) -> Scenario {
    let d = calibrate(&SummaryInputs {
        p0: 0.19,
        delta_p: 0.19,
        tau: 5.0,
        censor_scale: 7.0,
        censor_scale_treatment: None,
        shape: 1.0,
        payload: SummaryPayload::Rates { s0_r: 0.55, s0_nr: 0.41, diffs_r: 0.32, diffs_nr: 0.0 },
    })
    .unwrap();
    Scenario {
        control: d.control,
        treatment: d.treatment,
        censoring: d.censoring_control,
        tau: 5.0,
        n_total: SampleSize::Fixed(466),
        pi: 0.5,
        alpha: 0.05,
        beta: 0.2,
        replications,
        seed: 1,
        hypothesis: Hypothesis::Alternative,
    }
}

fn simulation(c: &mut Criterion) {
    let s = scenario(200);
    let data = replicate(&s, 233, 233, 0);
    c.bench_function("rmst_test_466", |b| b.iter(|| rmst_test(black_box(&data), 5.0, 0.05).unwrap()));
    c.bench_function("log_rank_test_466", |b| b.iter(|| log_rank_test(black_box(&data), 0.05).unwrap()));
    c.bench_function("replicate_466", |b| b.iter(|| replicate(black_box(&s), 233, 233, 7)));
    let mut g = c.benchmark_group("study");
    g.sample_size(10);
    g.bench_function("run_study_200_reps", |b| b.iter(|| run_study(black_box(&s)).unwrap()));
    g.finish();
}

criterion_group!(benches, simulation);
criterion_main!(benches);
