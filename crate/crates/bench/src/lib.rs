//! Criterion benchmarks for the core solvers; see `benches/`.
