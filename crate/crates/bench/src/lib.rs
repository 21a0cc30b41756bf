//! Benchmark-only crate; the measurements live in `benches/reduction.rs`.
//! Run them with `cargo bench -p qirka-bench`.
