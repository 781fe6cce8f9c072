use serde::Serialize;

use crate::evolution::export::fmt;
use crate::evolution::{SolverConfig, State};

use super::{shared_solver, solve_tagged, ExperimentConfig, HarnessError};

/// `H^s × H^{s−1}` distance at the horizon between resolutions `K` and the next level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionRow {
    #[serde(rename = "K")]
    pub max_mode: usize,
    #[serde(rename = "K_next")]
    pub next_mode: usize,
    pub distance: f64,
    /// Previous row's distance over this one.
    pub reduction: Option<f64>,
}

pub const RESOLUTION_CSV_HEADER: [&str; 4] = ["K", "K_next", "distance", "reduction"];

impl ResolutionRow {
    pub fn row(&self) -> Vec<String> {
        vec![
            self.max_mode.to_string(),
            self.next_mode.to_string(),
            fmt(self.distance),
            self.reduction.map(fmt).unwrap_or_default(),
        ]
    }
}

/// Repeats the base solve at each `K` with one shared step and compares
/// consecutive levels at the horizon.
pub fn run_resolution_study(
    cfg: &ExperimentConfig,
    k_list: &[usize],
) -> Result<Vec<ResolutionRow>, HarnessError> {
    cfg.validate()?;
    if k_list.len() < 2 || k_list.windows(2).any(|w| w[1] <= w[0]) || k_list[0] == 0 {
        return Err(HarnessError::Config(format!(
            "resolution study needs at least two increasing levels, got {k_list:?}"
        )));
    }
    let finest = *k_list.last().unwrap();
    let fine = SolverConfig {
        max_mode: finest,
        ..cfg.solver.clone()
    };
    let shared = shared_solver(&fine, &[cfg.base.build(finest)]);
    let s = cfg.s();

    let mut finals: Vec<State> = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let solver = SolverConfig {
            max_mode: k,
            ..shared.clone()
        };
        let traj = solve_tagged(&solver, &cfg.base.build(k), format!("resolution K = {k}"))?;
        let last = traj.last();
        finals.push(State::new(
            last.t,
            last.varphi.resized(finest),
            last.varphi_t.resized(finest),
        ));
    }
    let mut rows: Vec<ResolutionRow> = Vec::with_capacity(k_list.len() - 1);
    for i in 0..k_list.len() - 1 {
        let distance = finals[i].distance(&finals[i + 1], s);
        let reduction = rows.last().map(|r: &ResolutionRow| r.distance / distance);
        rows.push(ResolutionRow {
            max_mode: k_list[i],
            next_mode: k_list[i + 1],
            distance,
            reduction,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::BaseProfile;

    #[test]
    fn zero_data_have_zero_distances() {
        let mut cfg = ExperimentConfig::default();
        cfg.base.profile = BaseProfile::Zero;
        let rows = run_resolution_study(&cfg, &[4, 8, 16]).unwrap();
        assert!(rows.iter().all(|r| r.distance == 0.0));
    }

    #[test]
    fn smooth_data_converge_fast() {
        let mut cfg = ExperimentConfig::default();
        cfg.base.profile = BaseProfile::Geometric;
        cfg.base.ratio = 0.5;
        cfg.solver.horizon = 0.5;
        let rows = run_resolution_study(&cfg, &[8, 16, 32]).unwrap();
        assert!(rows[1].distance * 10.0 <= rows[0].distance, "{rows:?}");
    }

    #[test]
    fn rejects_unordered_levels() {
        assert!(run_resolution_study(&ExperimentConfig::default(), &[16, 8]).is_err());
        assert!(run_resolution_study(&ExperimentConfig::default(), &[16]).is_err());
    }
}
