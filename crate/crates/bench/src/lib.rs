//! Benchmark fixtures shared by the bench targets.

use cvsheet_core::{random_trig, SolverConfig, TrigPoly};

/// Mean-zero data small enough to stay inside the margin.
pub fn fixture(max_mode: usize, seed: u64) -> TrigPoly {
    random_trig(seed, max_mode, 4.0, 0.02)
}

pub fn solver(max_mode: usize) -> SolverConfig {
    SolverConfig {
        max_mode,
        horizon: 0.05,
        ..Default::default()
    }
}
