//! Criterion benchmarks for the packlab engines; see `benches/engines.rs`.
