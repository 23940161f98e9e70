//! Criterion benchmarks for the solver primitives and full solves at the
//! reference problem size (M = 64, K = 20, T = 85, q = 6). Run with
//! `cargo bench -p jointcsit-bench`.
