//! Criterion benchmarks for the hot paths of `semilinear-core`; see `benches/`.
