//! Benchmark crate; the targets live in `benches/`. Nothing is exported.
