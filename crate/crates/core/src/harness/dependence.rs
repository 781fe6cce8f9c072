use serde::Serialize;

use crate::evolution::export::fmt;
use crate::evolution::{SolverConfig, State, Trajectory};

use super::{check_aligned, shared_solver, solve_tagged, ExperimentConfig, HarnessError};

/// Distances between the base run and the `n`-th perturbed run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceRecord {
    pub n: usize,
    pub k_n: usize,
    pub a_n: f64,
    /// `(‖Δφ⁽⁰⁾‖²_{H^s} + ‖Δφ⁽¹⁾‖²_{H^{s−1}})^{1/2}`.
    pub data_distance: f64,
    /// `sup_t (‖Δφ‖²_{H^s} + ‖Δφ_t‖²_{H^{s−1}})^{1/2}`.
    pub strong_distance: f64,
    /// Same with `H^{s−1} × H^{s−2}`.
    pub weak_distance: f64,
    /// `strong_distance / data_distance`, 0 when both vanish.
    pub lipschitz_ratio: f64,
    /// Weak distance below strong distance at every saved time.
    pub weak_below_strong: bool,
}

pub const DEPENDENCE_CSV_HEADER: [&str; 9] = [
    "n",
    "k_n",
    "a_n",
    "data_distance",
    "strong_distance",
    "weak_distance",
    "lipschitz_ratio",
    "weak_below_strong",
    "horizon",
];

impl DependenceRecord {
    pub fn row(&self, horizon: f64) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k_n.to_string(),
            fmt(self.a_n),
            fmt(self.data_distance),
            fmt(self.strong_distance),
            fmt(self.weak_distance),
            fmt(self.lipschitz_ratio),
            self.weak_below_strong.to_string(),
            fmt(horizon),
        ]
    }
}

/// Base run, perturbed runs and their distances.
#[derive(Debug, Clone)]
pub struct DependenceStudy {
    pub solver: SolverConfig,
    pub base: Trajectory,
    pub perturbed: Vec<(usize, Trajectory)>,
    pub records: Vec<DependenceRecord>,
}

impl DependenceStudy {
    pub fn horizon(&self) -> f64 {
        self.solver.horizon
    }

    pub fn trajectory(&self, n: usize) -> Option<&Trajectory> {
        self.perturbed.iter().find(|(m, _)| *m == n).map(|(_, t)| t)
    }
}

pub(crate) fn record(
    cfg: &ExperimentConfig,
    n: usize,
    base: &Trajectory,
    pert: &Trajectory,
) -> DependenceRecord {
    let s = cfg.s();
    let k = cfg.solver.max_mode;
    let data_distance = base.initial().distance(pert.initial(), s);
    let mut strong: f64 = 0.0;
    let mut weak: f64 = 0.0;
    let mut ordered = true;
    for (a, b) in base.states.iter().zip(&pert.states) {
        let ds = a.distance(b, s);
        let dw = a.distance(b, s - 1.0);
        ordered &= dw <= ds;
        strong = strong.max(ds);
        weak = weak.max(dw);
    }
    DependenceRecord {
        n,
        k_n: cfg.perturbation.mode(n, k),
        a_n: cfg.perturbation.amplitude(n),
        data_distance,
        strong_distance: strong,
        weak_distance: weak,
        lipschitz_ratio: if data_distance > 0.0 {
            strong / data_distance
        } else {
            0.0
        },
        weak_below_strong: ordered,
    }
}

/// Solves the base problem and every perturbed problem on a common horizon
/// and step.
pub fn continuous_dependence_study(
    cfg: &ExperimentConfig,
) -> Result<DependenceStudy, HarnessError> {
    cfg.validate()?;
    let base_data = cfg.base_data();
    let perturbed_data: Vec<_> = cfg
        .n_list
        .iter()
        .map(|&n| (n, cfg.perturbed_data(n)))
        .collect();
    let mut all = vec![base_data.clone()];
    all.extend(perturbed_data.iter().map(|(_, d)| d.clone()));
    let solver = shared_solver(&cfg.solver, &all);

    let base = solve_tagged(&solver, &base_data, "base run")?;
    let mut perturbed = Vec::with_capacity(perturbed_data.len());
    let mut records = Vec::with_capacity(perturbed_data.len());
    for (n, data) in perturbed_data {
        let traj = solve_tagged(&solver, &data, format!("perturbed run n = {n}"))?;
        check_aligned(&base, &traj)?;
        records.push(record(cfg, n, &base, &traj));
        perturbed.push((n, traj));
    }
    Ok(DependenceStudy {
        solver,
        base,
        perturbed,
        records,
    })
}

pub fn run_continuous_dependence(
    cfg: &ExperimentConfig,
) -> Result<Vec<DependenceRecord>, HarnessError> {
    Ok(continuous_dependence_study(cfg)?.records)
}

/// Pointwise `‖Δφ‖_{H^s} + ‖Δφ_t‖_{H^{s−1}}`.
pub(crate) fn strong_gap(a: &State, b: &State, s: f64) -> f64 {
    (&a.varphi - &b.varphi).sobolev_norm(s) + (&a.varphi_t - &b.varphi_t).sobolev_norm(s - 1.0)
}
