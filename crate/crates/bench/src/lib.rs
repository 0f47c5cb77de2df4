//! Benchmark-only crate; see `benches/switching.rs`.
