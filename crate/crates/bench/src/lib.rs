//! Criterion benchmarks for `layerpack`; see `benches/`.
