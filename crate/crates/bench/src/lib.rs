//! Benchmarks for the emulator core; see `benches/`.
