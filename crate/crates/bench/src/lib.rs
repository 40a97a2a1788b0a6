//! Criterion benchmarks for `urp-core`; see `benches/`.
