//! Criterion benchmarks for `survmix-core`; see `benches/`.
