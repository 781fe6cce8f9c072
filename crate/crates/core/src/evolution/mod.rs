//! Time integration of the nonlinear Cauchy problem and of the linear
//! variable-coefficient problem `ψ_tt − (μ − 2ϕ_x)ψ_xx = F`.
//!
//! Both solvers integrate the first-order system `(u, v)' = (v, a(t, u))`
//! with classical RK4. Accelerations are computed with exact products and
//! projected back onto `|k| ≤ K` once per stage.

mod energy;
pub(crate) mod export;
mod linear;
mod nonlinear;
mod stepper;

use serde::{Deserialize, Serialize};

use crate::operators::{FormTag, DEFAULT_OVERSAMPLE};
use crate::spectral::TrigPoly;

pub use energy::{
    energy_e, energy_identity_residual, higher_energy_identity_residual, weighted_gradient_energy,
    HigherIdentityResidual, IdentityResidual,
};
pub use export::{write_trajectory_csv, RunSummary, TRAJECTORY_CSV_HEADER};
pub use linear::{
    solve_linear, Background, ConstantSource, DerivedForcing, FnBackground, FnSource,
    FrozenBackground, LinearProblem, Source, ZeroSource,
};
pub use nonlinear::{check_data_admissible, data_size_h2, solve_nonlinear, t0_default};

/// Tolerance on `|mean|` below which data count as mean-zero.
pub const MEAN_ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("inadmissible initial data: {0}")]
    InadmissibleData(String),
    #[error("stability lost at t = {t}: margin {margin} < delta {delta}")]
    StabilityLost { t: f64, margin: f64, delta: f64 },
    #[error("non-finite coefficients at t = {t}")]
    NonFinite { t: f64 },
    #[error("background does not cover t = {t} (available [{start}, {end}])")]
    BackgroundGap { t: f64, start: f64, end: f64 },
    #[error("weighted gradient integral is negative ({value:e}); margin violated")]
    NegativeRadicand { value: f64 },
}

/// Equation and numerics parameters shared by both solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mu: f64,
    pub delta: f64,
    /// Spectral resolution `K`.
    pub max_mode: usize,
    pub cfl: f64,
    /// Uniform step overriding the CFL rule, rounded so that it divides the horizon.
    pub fixed_dt: Option<f64>,
    pub form: FormTag,
    pub horizon: f64,
    pub save_stride: usize,
    /// Constant in the default existence horizon `T0`.
    pub c1: f64,
    /// Sobolev index `s` of the recorded norms.
    pub sobolev_index: f64,
    pub oversample: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            delta: 0.1,
            max_mode: 32,
            cfl: 0.5,
            fixed_dt: None,
            form: FormTag::C,
            horizon: 1.0,
            save_stride: 1,
            c1: 1.0,
            sobolev_index: 3.0,
            oversample: DEFAULT_OVERSAMPLE,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |msg: String| Err(EvolutionError::InvalidConfig(msg));
        if !(self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.delta > 0.0 && self.delta < self.mu) {
            return bad(format!("delta must lie in (0, mu), got {}", self.delta));
        }
        if self.max_mode == 0 {
            return bad("max_mode must be at least 1".into());
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("fixed_dt must be positive, got {dt}"));
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.save_stride == 0 {
            return bad("save_stride must be at least 1".into());
        }
        if !(self.c1 > 0.0) {
            return bad(format!("C1 must be positive, got {}", self.c1));
        }
        if self.oversample < DEFAULT_OVERSAMPLE {
            return bad(format!("oversample must be at least {DEFAULT_OVERSAMPLE}"));
        }
        Ok(())
    }

    /// Grid spacing `2π/(2K+1)` entering the CFL rule.
    pub fn grid_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / (2 * self.max_mode + 1) as f64
    }
}

/// Phase point `(φ, φ_t)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub varphi: TrigPoly,
    pub varphi_t: TrigPoly,
}

impl State {
    pub fn new(t: f64, varphi: TrigPoly, varphi_t: TrigPoly) -> Self {
        Self {
            t,
            varphi,
            varphi_t,
        }
    }

    /// `‖φ‖²_{H^s} + ‖φ_t‖²_{H^{s−1}}`.
    pub fn energy_sq(&self, s: f64) -> f64 {
        self.varphi.sobolev_norm_sq(s) + self.varphi_t.sobolev_norm_sq(s - 1.0)
    }

    /// Same quantity for the difference of two states.
    pub fn distance(&self, other: &State, s: f64) -> f64 {
        let d = &self.varphi - &other.varphi;
        let dt = &self.varphi_t - &other.varphi_t;
        (d.sobolev_norm_sq(s) + dt.sobolev_norm_sq(s - 1.0)).sqrt()
    }
}

/// Per-saved-step record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub norm_hs: f64,
    pub norm_hs1_t: f64,
    pub margin_min: f64,
    /// Linear-problem energy `E(t)`; `None` for nonlinear runs or when the
    /// weighted integral is negative.
    pub energy: Option<f64>,
    pub apriori_ratio: f64,
    pub mean: f64,
    /// Step that produced this state (zero at `t = 0`).
    pub dt: f64,
}

/// Background state and forcing stored alongside a linear run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSnapshot {
    pub background: State,
    pub source: TrigPoly,
}

/// Time-ordered states plus diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub mu: f64,
    pub sobolev_index: f64,
    pub steps_taken: usize,
    /// Present for linear runs only, aligned with `states`.
    pub linear: Option<Vec<LinearSnapshot>>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn initial(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn start_time(&self) -> f64 {
        self.states[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.last().t
    }

    /// `sup_t` of `State::distance` over states saved at matching times.
    pub fn sup_distance(&self, other: &Trajectory, s: f64) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.distance(b, s))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_mean(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.varphi.mean().abs())
            .fold(0.0, f64::max)
    }
}
