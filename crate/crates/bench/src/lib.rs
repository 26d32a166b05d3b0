//! Criterion benchmarks for the walk engine live under `benches/`.
