//! Placeholder library target; the criterion benchmarks under `benches/`
//! exercise the simulation crate directly.
