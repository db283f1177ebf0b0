//! Benchmarks for nonlocal-lab kernels live in `benches/`.
