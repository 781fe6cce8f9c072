//! Experiment drivers: continuous dependence, the regularisation triangle,
//! the frozen-background instability probe and resolution studies, plus the
//! configuration format and output files shared by the command-line tool.

mod config;
mod dependence;
mod illposed;
mod output;
mod resolution;
mod triangulation;

use crate::evolution::{solve_nonlinear, t0_default, EvolutionError, SolverConfig, Trajectory};
use crate::operators::margin;
use crate::spectral::TrigPoly;

pub use config::{BaseData, BaseProfile, ExperimentConfig, IllposedSpec, Perturbation};
pub use dependence::{
    continuous_dependence_study, run_continuous_dependence, DependenceRecord, DependenceStudy,
    DEPENDENCE_CSV_HEADER,
};
pub use illposed::{fit_growth_rate, run_illposed_probe, GrowthRate, ILLPOSED_CSV_HEADER};
pub use output::{config_hash, write_rows, Manifest};
pub use resolution::{run_resolution_study, ResolutionRow, RESOLUTION_CSV_HEADER};
pub use triangulation::{
    run_triangulation, triangulate, TriangleSample, TriangulationReport, TRIANGULATION_CSV_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: EvolutionError,
    },
    #[error(
        "no spectral cutoff K_eps <= {max_mode} reaches epsilon = {epsilon:e} (best {best:e})"
    )]
    CutoffInfeasible {
        epsilon: f64,
        max_mode: usize,
        best: f64,
    },
    #[error("trajectories are saved at different times")]
    Misaligned,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn tag(context: impl Into<String>) -> impl FnOnce(EvolutionError) -> HarnessError {
    let context = context.into();
    move |source| HarnessError::Solver { context, source }
}

/// Solver settings shared by a family of runs: a common horizon
/// `min(T, ½·min T0)`, every step saved, and one uniform step so that saved
/// times coincide. Without a configured step the CFL rule is applied to the
/// fastest initial wave speed with a 20% reserve.
pub fn shared_solver(cfg: &SolverConfig, data: &[(TrigPoly, TrigPoly)]) -> SolverConfig {
    let t0 = data
        .iter()
        .map(|(u, v)| t0_default(u, v, cfg.c1))
        .fold(f64::INFINITY, f64::min);
    let horizon = cfg.horizon.min(0.5 * t0);
    let fixed_dt = cfg.fixed_dt.or_else(|| {
        let speed = data
            .iter()
            .map(|(u, _)| margin(&u.resized(cfg.max_mode), cfg.mu, cfg.oversample).max_speed())
            .fold(0.0, f64::max);
        Some(0.8 * cfg.cfl * cfg.grid_spacing() / speed.max(1e-12))
    });
    SolverConfig {
        horizon,
        fixed_dt,
        save_stride: 1,
        ..cfg.clone()
    }
}

pub(crate) fn solve_tagged(
    cfg: &SolverConfig,
    data: &(TrigPoly, TrigPoly),
    context: impl Into<String>,
) -> Result<Trajectory, HarnessError> {
    solve_nonlinear(cfg, &data.0, &data.1).map_err(tag(context))
}

pub(crate) fn check_aligned(a: &Trajectory, b: &Trajectory) -> Result<(), HarnessError> {
    let same = a.states.len() == b.states.len()
        && a.states
            .iter()
            .zip(&b.states)
            .all(|(x, y)| (x.t - y.t).abs() <= 1e-12 * x.t.abs().max(1.0));
    if same {
        Ok(())
    } else {
        Err(HarnessError::Misaligned)
    }
}

/// Trapezoidal `∫ q dt` over the given nodes.
pub(crate) fn trapezoid(times: &[f64], q: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(q.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_horizon_respects_t0() {
        let cfg = SolverConfig {
            horizon: 10.0,
            ..Default::default()
        };
        let data = vec![
            (TrigPoly::cos_mode(1, 0.01, 8), TrigPoly::zeros(8)),
            (TrigPoly::cos_mode(1, 0.1, 8), TrigPoly::zeros(8)),
        ];
        let shared = shared_solver(&cfg, &data);
        assert!((shared.horizon - 0.5 / (0.1 * 2f64.sqrt())).abs() < 1e-12);
        assert!(shared.fixed_dt.unwrap() > 0.0);
        assert_eq!(shared.save_stride, 1);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let t = [0.0, 0.5, 2.0];
        let q: Vec<f64> = t.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&t, &q) - 8.0).abs() < 1e-15);
    }
}
