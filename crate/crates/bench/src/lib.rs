//! Shared fixtures for the benchmarks.

use cutoff_core::model::{Primitives, Setting};

pub fn benchmark_setting() -> Setting {
    Setting::benchmark(Primitives::new(1.0, 2.0, 1.0).expect("benchmark primitives are valid"))
}
