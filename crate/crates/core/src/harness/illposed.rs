use serde::Serialize;

use crate::evolution::export::fmt;
use crate::evolution::{solve_linear, FrozenBackground, LinearProblem, SolverConfig, ZeroSource};
use crate::spectral::TrigPoly;

use super::{tag, HarnessError};

/// Fitted exponential rate of one mode on a frozen background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRate {
    pub k: usize,
    pub rate: f64,
    /// `E(T)/E(0)` for `E = (‖ψ_t‖² + ‖ψ_x‖²)^{1/2}`.
    pub growth_factor: f64,
}

pub const ILLPOSED_CSV_HEADER: [&str; 3] = ["k", "rate", "growth_factor"];

impl GrowthRate {
    pub fn row(&self) -> Vec<String> {
        vec![self.k.to_string(), fmt(self.rate), fmt(self.growth_factor)]
    }
}

/// Least-squares slope of `ln q` against `t` over the second half of the
/// time range.
pub fn fit_growth_rate(times: &[f64], q: &[f64]) -> f64 {
    let end = times.last().copied().unwrap_or(0.0);
    let start = times.first().copied().unwrap_or(0.0);
    let mid = 0.5 * (start + end);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(q)
        .filter(|(t, v)| **t >= mid && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    sxy / sxx
}

/// Evolves `ψ⁰ = cos kx` (unit `L²` norm), `ψ¹ = 0` on the frozen background
/// `φ = a cos x` without enforcing the margin, for each `k`.
pub fn run_illposed_probe(
    mu: f64,
    a: f64,
    k_list: &[usize],
    t_short: f64,
) -> Result<Vec<GrowthRate>, HarnessError> {
    let kmax = k_list.iter().copied().max().unwrap_or(1);
    let max_mode = (4 * kmax).max(32);
    let cfg = SolverConfig {
        mu,
        delta: 0.5 * mu,
        max_mode,
        horizon: t_short,
        ..Default::default()
    };
    let background = FrozenBackground {
        varphi: TrigPoly::cos_mode(1, a, max_mode),
    };
    k_list
        .iter()
        .map(|&k| {
            if k == 0 || k > max_mode {
                return Err(HarnessError::Config(format!(
                    "mode {k} outside 1..={max_mode}"
                )));
            }
            let psi0 = TrigPoly::cos_mode(k, 2f64.sqrt(), max_mode);
            let mut prob =
                LinearProblem::new(&background, &ZeroSource, psi0, TrigPoly::zeros(max_mode));
            prob.enforce_margin = false;
            let traj = solve_linear(&cfg, &prob).map_err(tag(format!("probe k = {k}")))?;
            let e: Vec<f64> = traj
                .states
                .iter()
                .map(|st| {
                    (st.varphi_t.sobolev_norm_sq(0.0)
                        + st.varphi.derivative(1).sobolev_norm_sq(0.0))
                    .sqrt()
                })
                .collect();
            Ok(GrowthRate {
                k,
                rate: fit_growth_rate(&traj.times(), &e),
                growth_factor: e.last().unwrap() / e[0],
            })
        })
        .collect()
}
