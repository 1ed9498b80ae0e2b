//! Benchmark-only crate; the measurements live in `benches/pipeline.rs`.
//!
//! Run with `cargo bench -p psl-bench`.
