//! Criterion benchmarks for `dunkl-core`; run with `cargo bench -p dunkl-bench`.
