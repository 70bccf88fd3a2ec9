//! Criterion benchmarks for the simulator. Run with `cargo bench -p visflock-bench`.
