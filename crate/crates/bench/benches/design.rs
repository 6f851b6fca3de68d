use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use survmix_core::{
    calibrate, limiting_variance, sample_size, CalibratedDesign, DesignSpec, SummaryInputs, SummaryPayload,
};

fn noah() -> CalibratedDesign {
    calibrate(&SummaryInputs {
        p0: 0.19,
        delta_p: 0.19,
        tau: 5.0,
        censor_scale: 7.0,
        censor_scale_treatment: None,
        shape: 1.0,
        payload: SummaryPayload::Rates { s0_r: 0.55, s0_nr: 0.41, diffs_r: 0.32, diffs_nr: 0.0 },
    })
    .unwrap()
}

fn design(c: &mut Criterion) {
    let d = noah();
    let spec = DesignSpec::new(5.0, 0.05, 0.2, 0.5, d.censoring_control).unwrap();
    c.bench_function("limiting_variance", |b| {
        b.iter(|| limiting_variance(black_box(&d.control), &d.censoring_control, 5.0, 1e-10).unwrap())
    });
    c.bench_function("sample_size", |b| {
        b.iter(|| sample_size(black_box(&d.control), &d.treatment, &spec).unwrap())
    });
}

criterion_group!(benches, design);
criterion_main!(benches);
