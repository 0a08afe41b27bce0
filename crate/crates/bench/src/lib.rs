//! Criterion benchmarks for `trikernel`; see `benches/pipeline.rs`.
