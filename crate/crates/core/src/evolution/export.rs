use std::io::Write;

use serde::Serialize;

use super::{SolverConfig, Trajectory};

pub const TRAJECTORY_CSV_HEADER: [&str; 8] = [
    "t",
    "norm_Hs_phi",
    "norm_Hs1_phit",
    "margin_min",
    "energy_E",
    "apriori_ratio",
    "mean_phi",
    "dt",
];

/// One row per saved step. `energy_E` is empty for nonlinear runs.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_CSV_HEADER)?;
    for d in &traj.diagnostics {
        w.write_record([
            fmt(d.t),
            fmt(d.norm_hs),
            fmt(d.norm_hs1_t),
            fmt(d.margin_min),
            d.energy.map(fmt).unwrap_or_default(),
            fmt(d.apriori_ratio),
            fmt(d.mean),
            fmt(d.dt),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that round-trips, so output is reproducible bit for bit.
pub(crate) fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// JSON summary of a single run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: SolverConfig,
    pub final_time: f64,
    pub final_norm_hs: Option<f64>,
    pub final_norm_hs1_t: Option<f64>,
    pub min_margin: Option<f64>,
    pub max_apriori_ratio: Option<f64>,
    pub steps: usize,
    pub status: String,
    pub wall_time_s: f64,
}

impl RunSummary {
    pub fn from_result(
        config: &SolverConfig,
        result: &Result<Trajectory, super::EvolutionError>,
        wall_time_s: f64,
    ) -> Self {
        match result {
            Ok(traj) => {
                let last = traj.diagnostics.last();
                RunSummary {
                    config: config.clone(),
                    final_time: traj.end_time(),
                    final_norm_hs: last.map(|d| d.norm_hs),
                    final_norm_hs1_t: last.map(|d| d.norm_hs1_t),
                    min_margin: traj
                        .diagnostics
                        .iter()
                        .map(|d| d.margin_min)
                        .reduce(f64::min),
                    max_apriori_ratio: traj
                        .diagnostics
                        .iter()
                        .map(|d| d.apriori_ratio)
                        .reduce(f64::max),
                    steps: traj.steps_taken,
                    status: "ok".into(),
                    wall_time_s,
                }
            }
            Err(e) => RunSummary {
                config: config.clone(),
                final_time: f64::NAN,
                final_norm_hs: None,
                final_norm_hs1_t: None,
                min_margin: None,
                max_apriori_ratio: None,
                steps: 0,
                status: e.to_string(),
                wall_time_s,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::solve_nonlinear;
    use crate::spectral::TrigPoly;

    #[test]
    fn csv_is_reproducible() {
        let cfg = SolverConfig {
            max_mode: 8,
            horizon: 0.3,
            ..Default::default()
        };
        let run = || {
            let traj = solve_nonlinear(&cfg, &TrigPoly::cos_mode(1, 0.05, 8), &TrigPoly::zeros(8))
                .unwrap();
            let mut buf = Vec::new();
            write_trajectory_csv(&traj, &mut buf).unwrap();
            buf
        };
        let a = run();
        assert_eq!(a, run());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(
            "t,norm_Hs_phi,norm_Hs1_phit,margin_min,energy_E,apriori_ratio,mean_phi,dt\n"
        ));
    }
}
