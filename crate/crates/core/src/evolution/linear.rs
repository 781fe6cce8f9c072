use num_complex::Complex64;

use crate::operators::{margin, phi_of, quadratic_q, Margin};
use crate::spectral::TrigPoly;

use super::energy::energy_e;
use super::nonlinear::require_mean_zero;
use super::stepper::{rk4_step, StepPlan};
use super::{EvolutionError, LinearSnapshot, SolverConfig, State, StepDiagnostics, Trajectory};

/// Supplies the coefficient field `φ(t)` (and `φ_t(t)`) of the linear problem.
pub trait Background {
    fn state_at(&self, t: f64) -> Result<State, EvolutionError>;
}

/// Supplies the forcing `F(t)`.
pub trait Source {
    fn at(&self, t: f64) -> Result<TrigPoly, EvolutionError>;
}

/// Time-independent background.
#[derive(Debug, Clone)]
pub struct FrozenBackground {
    pub varphi: TrigPoly,
}

impl Background for FrozenBackground {
    fn state_at(&self, t: f64) -> Result<State, EvolutionError> {
        let k = self.varphi.max_mode();
        Ok(State::new(t, self.varphi.clone(), TrigPoly::zeros(k)))
    }
}

/// Closed-form background `t ↦ (φ(t), φ_t(t))`.
pub struct FnBackground<F>(pub F);

impl<F> Background for FnBackground<F>
where
    F: Fn(f64) -> (TrigPoly, TrigPoly),
{
    fn state_at(&self, t: f64) -> Result<State, EvolutionError> {
        let (u, v) = (self.0)(t);
        Ok(State::new(t, u, v))
    }
}

/// Cubic Hermite interpolation between saved states, using the stored
/// `φ_t` as nodal slopes.
impl Background for Trajectory {
    fn state_at(&self, t: f64) -> Result<State, EvolutionError> {
        let (start, end) = (self.start_time(), self.end_time());
        let slack = 1e-12 * end.abs().max(1.0);
        if t < start - slack || t > end + slack {
            return Err(EvolutionError::BackgroundGap { t, start, end });
        }
        let t = t.clamp(start, end);
        let idx = self.states.partition_point(|s| s.t <= t);
        if idx == 0 {
            return Ok(self.states[0].clone());
        }
        if idx >= self.states.len() {
            let last = self.last();
            return Ok(State::new(t, last.varphi.clone(), last.varphi_t.clone()));
        }
        let (a, b) = (&self.states[idx - 1], &self.states[idx]);
        if t == a.t {
            return Ok(a.clone());
        }
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let varphi = a
            .varphi
            .scaled(h00)
            .add_scaled(h * h10, &a.varphi_t)
            .add_scaled(h01, &b.varphi)
            .add_scaled(h * h11, &b.varphi_t);
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        let varphi_t = a
            .varphi
            .scaled(d00)
            .add_scaled(d10, &a.varphi_t)
            .add_scaled(d01, &b.varphi)
            .add_scaled(d11, &b.varphi_t);
        Ok(State::new(t, varphi, varphi_t))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSource;

impl Source for ZeroSource {
    fn at(&self, _t: f64) -> Result<TrigPoly, EvolutionError> {
        Ok(TrigPoly::zeros(1))
    }
}

#[derive(Debug, Clone)]
pub struct ConstantSource(pub TrigPoly);

impl Source for ConstantSource {
    fn at(&self, _t: f64) -> Result<TrigPoly, EvolutionError> {
        Ok(self.0.clone())
    }
}

pub struct FnSource<F>(pub F);

impl<F> Source for FnSource<F>
where
    F: Fn(f64) -> TrigPoly,
{
    fn at(&self, t: f64) -> Result<TrigPoly, EvolutionError> {
        Ok((self.0)(t))
    }
}

/// The forcing obtained by differentiating the nonlinear equation once in
/// space, `F = −Q[φ]_x − 2ϕ_xx φ_xx`, evaluated on a background, optionally
/// followed by a sharp spectral cutoff.
pub struct DerivedForcing<'a> {
    pub background: &'a dyn Background,
    pub cutoff: Option<usize>,
}

impl DerivedForcing<'_> {
    /// `−Q[φ]_x − 2ϕ_xx φ_xx` for a single state, degree `2K`.
    pub fn of(varphi: &TrigPoly) -> TrigPoly {
        let q_x = quadratic_q(varphi).derivative(1);
        let coupling = phi_of(varphi)
            .derivative(2)
            .multiply(&varphi.derivative(2), None);
        q_x.scaled(-1.0).add_scaled(-2.0, &coupling)
    }
}

impl Source for DerivedForcing<'_> {
    fn at(&self, t: f64) -> Result<TrigPoly, EvolutionError> {
        let bg = self.background.state_at(t)?;
        let f = Self::of(&bg.varphi);
        Ok(match self.cutoff {
            Some(c) => f.lowpass(c),
            None => f,
        })
    }
}

/// Cauchy problem `ψ_tt − (μ − 2ϕ_x)ψ_xx = F`, `(ψ, ψ_t)(0) = (ψ⁰, ψ¹)`.
pub struct LinearProblem<'a> {
    pub background: &'a dyn Background,
    pub source: &'a dyn Source,
    pub psi0: TrigPoly,
    pub psi1: TrigPoly,
    /// Step nodes to follow instead of the configured step rule (they must
    /// start at 0); typically the saved times of a background trajectory.
    pub time_nodes: Option<Vec<f64>>,
    /// When false the margin floor is not enforced (ill-posedness probes).
    pub enforce_margin: bool,
}

impl<'a> LinearProblem<'a> {
    pub fn new(
        background: &'a dyn Background,
        source: &'a dyn Source,
        psi0: TrigPoly,
        psi1: TrigPoly,
    ) -> Self {
        Self {
            background,
            source,
            psi0,
            psi1,
            time_nodes: None,
            enforce_margin: true,
        }
    }
}

struct Coefficients {
    t: f64,
    background: State,
    phi_x: TrigPoly,
    source: TrigPoly,
}

impl Coefficients {
    fn at(prob: &LinearProblem<'_>, t: f64) -> Result<Self, EvolutionError> {
        let background = prob.background.state_at(t)?;
        let phi_x = phi_of(&background.varphi).derivative(1);
        let source = prob.source.at(t)?;
        Ok(Self {
            t,
            background,
            phi_x,
            source,
        })
    }
}

/// Integrates the linear problem with the mean mode of the right-hand side
/// removed at every evaluation, so `ψ` stays mean-zero.
pub fn solve_linear(
    cfg: &SolverConfig,
    prob: &LinearProblem<'_>,
) -> Result<Trajectory, EvolutionError> {
    cfg.validate()?;
    require_mean_zero("psi0", &prob.psi0)?;
    require_mean_zero("psi1", &prob.psi1)?;
    let k = cfg.max_mode;
    let s = cfg.sobolev_index;
    let mu = cfg.mu;

    let plan = match &prob.time_nodes {
        Some(nodes) => {
            if nodes.first() != Some(&0.0) || nodes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(EvolutionError::InvalidConfig(
                    "time nodes must start at 0 and increase strictly".into(),
                ));
            }
            StepPlan::Nodes(nodes.clone())
        }
        None => StepPlan::new(cfg.cfl, cfg.grid_spacing(), cfg.fixed_dt, cfg.horizon),
    };

    let check = |coef: &Coefficients| -> Result<Margin, EvolutionError> {
        let m = margin(&coef.background.varphi, mu, cfg.oversample);
        if prob.enforce_margin && m.min_value < cfg.delta {
            return Err(EvolutionError::StabilityLost {
                t: coef.t,
                margin: m.min_value,
                delta: cfg.delta,
            });
        }
        Ok(m)
    };

    let coef0 = Coefficients::at(prob, 0.0)?;
    let mut m = check(&coef0)?;

    let mut state = State::new(0.0, prob.psi0.resized(k), prob.psi1.resized(k));
    let initial_energy = state.energy_sq(s);
    let diag = |state: &State, coef: &Coefficients, margin_min: f64, dt: f64| {
        let psi_x = state.varphi.derivative(1);
        StepDiagnostics {
            t: state.t,
            norm_hs: state.varphi.sobolev_norm(s),
            norm_hs1_t: state.varphi_t.sobolev_norm(s - 1.0),
            margin_min,
            energy: energy_e(&state.varphi_t, &psi_x, &coef.phi_x, mu).ok(),
            apriori_ratio: if initial_energy > 0.0 {
                state.energy_sq(s) / initial_energy
            } else {
                1.0
            },
            mean: state.varphi.mean(),
            dt,
        }
    };
    let snapshot = |coef: &Coefficients| LinearSnapshot {
        background: coef.background.clone(),
        source: coef.source.clone(),
    };
    let past_horizon =
        |t: f64| matches!(plan, StepPlan::Nodes(_)) && t > cfg.horizon * (1.0 + 1e-12);

    let mut traj = Trajectory {
        states: vec![state.clone()],
        diagnostics: vec![diag(&state, &coef0, m.min_value, 0.0)],
        mu,
        sobolev_index: s,
        steps_taken: 0,
        linear: Some(vec![snapshot(&coef0)]),
    };

    // Coefficients at the most recent evaluation time; RK4 asks for the
    // midpoint twice and the end point is reused by the next step.
    let mut cache = Some(coef0);
    let mut index = 1;
    while let Some(t_next) = plan.next_time(index, state.t, m.max_speed()) {
        if past_horizon(t_next) {
            break;
        }
        let dt = t_next - state.t;
        let mut rhs = |t: f64, u: &TrigPoly| -> Result<TrigPoly, EvolutionError> {
            if cache.as_ref().map_or(true, |c| c.t != t) {
                cache = Some(Coefficients::at(prob, t)?);
            }
            let c = cache.as_ref().expect("filled above");
            let u_xx = u.derivative(2);
            let coupling = c.phi_x.multiply(&u_xx, Some(k));
            let mut out = u_xx
                .scaled(mu)
                .add_scaled(-2.0, &coupling)
                .add_scaled(1.0, &c.source)
                .resized(k);
            out.set_coeff(0, Complex64::new(0.0, 0.0));
            Ok(out)
        };
        let (u, v) = rk4_step(state.t, &state.varphi, &state.varphi_t, dt, &mut rhs)?;
        if !(u.is_finite() && v.is_finite()) {
            return Err(EvolutionError::NonFinite { t: t_next });
        }
        state = State::new(t_next, u, v);
        let coef = match cache.take() {
            Some(c) if c.t == t_next => c,
            _ => Coefficients::at(prob, t_next)?,
        };
        m = check(&coef)?;
        traj.steps_taken = index;
        let is_last = plan
            .next_time(index + 1, state.t, m.max_speed())
            .map_or(true, past_horizon);
        if index % cfg.save_stride == 0 || is_last {
            traj.diagnostics.push(diag(&state, &coef, m.min_value, dt));
            traj.states.push(state.clone());
            if let Some(aux) = traj.linear.as_mut() {
                aux.push(snapshot(&coef));
            }
        }
        cache = Some(coef);
        index += 1;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mu: f64, dt: f64, horizon: f64) -> SolverConfig {
        SolverConfig {
            mu,
            delta: 0.05,
            max_mode: 8,
            fixed_dt: Some(dt),
            horizon,
            ..Default::default()
        }
    }

    fn max_error<F: Fn(f64) -> TrigPoly>(traj: &Trajectory, exact: F) -> f64 {
        traj.states
            .iter()
            .map(|s| (&s.varphi - &exact(s.t)).l2_norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_coefficient_cosine() {
        let bg = FrozenBackground {
            varphi: TrigPoly::zeros(8),
        };
        let prob = LinearProblem::new(
            &bg,
            &ZeroSource,
            TrigPoly::cos_mode(1, 1.0, 8),
            TrigPoly::zeros(8),
        );
        let dt = 0.05;
        let traj = solve_linear(&cfg(1.0, dt, 1.0), &prob).unwrap();
        let err = max_error(&traj, |t| TrigPoly::cos_mode(1, t.cos(), 8));
        assert!(err <= 10.0 * dt.powi(4), "{err}");
    }

    #[test]
    fn constant_coefficient_sine_speed_two() {
        let bg = FrozenBackground {
            varphi: TrigPoly::zeros(8),
        };
        let prob = LinearProblem::new(
            &bg,
            &ZeroSource,
            TrigPoly::sin_mode(1, 1.0, 8),
            TrigPoly::zeros(8),
        );
        let dt = 0.05;
        let traj = solve_linear(&cfg(4.0, dt, 1.0), &prob).unwrap();
        let err = max_error(&traj, |t| TrigPoly::sin_mode(1, (2.0 * t).cos(), 8));
        assert!(err <= 10.0 * dt.powi(4), "{err}");
    }

    #[test]
    fn forced_mode() {
        let bg = FrozenBackground {
            varphi: TrigPoly::zeros(8),
        };
        let src = ConstantSource(TrigPoly::cos_mode(1, 1.0, 8));
        let prob = LinearProblem::new(&bg, &src, TrigPoly::zeros(8), TrigPoly::zeros(8));
        let dt = 0.05;
        let traj = solve_linear(&cfg(1.0, dt, 1.0), &prob).unwrap();
        let err = max_error(&traj, |t| TrigPoly::cos_mode(1, 1.0 - t.cos(), 8));
        assert!(err <= 10.0 * dt.powi(4), "{err}");
    }

    #[test]
    fn mean_mode_stays_pinned() {
        let bg = FrozenBackground {
            varphi: TrigPoly::cos_mode(1, 0.2, 8),
        };
        let src = ConstantSource(
            TrigPoly::constant(3.0, 8).add_scaled(1.0, &TrigPoly::cos_mode(2, 1.0, 8)),
        );
        let prob = LinearProblem::new(&bg, &src, TrigPoly::sin_mode(1, 1.0, 8), TrigPoly::zeros(8));
        let traj = solve_linear(&cfg(1.0, 0.05, 1.0), &prob).unwrap();
        assert!(traj
            .states
            .iter()
            .all(|s| s.varphi.mean() == 0.0 && s.varphi_t.mean() == 0.0));
    }

    #[test]
    fn frozen_background_below_floor_is_rejected() {
        let bg = FrozenBackground {
            varphi: TrigPoly::cos_mode(1, 1.0, 8),
        };
        let prob = LinearProblem::new(
            &bg,
            &ZeroSource,
            TrigPoly::cos_mode(3, 1.0, 8),
            TrigPoly::zeros(8),
        );
        let err = solve_linear(&cfg(1.0, 0.05, 1.0), &prob).unwrap_err();
        assert!(matches!(err, EvolutionError::StabilityLost { t, .. } if t == 0.0));
    }

    #[test]
    fn trajectory_background_gap() {
        let z = TrigPoly::zeros(4);
        let traj = Trajectory {
            states: vec![
                State::new(0.0, z.clone(), z.clone()),
                State::new(0.5, z.clone(), z.clone()),
            ],
            diagnostics: vec![],
            mu: 1.0,
            sobolev_index: 3.0,
            steps_taken: 1,
            linear: None,
        };
        assert!(traj.state_at(0.25).is_ok());
        let err = traj.state_at(0.75).unwrap_err();
        assert!(matches!(err, EvolutionError::BackgroundGap { .. }));
        let prob = LinearProblem::new(&traj, &ZeroSource, TrigPoly::cos_mode(1, 1.0, 4), z.clone());
        let err = solve_linear(&cfg(1.0, 0.1, 1.0), &prob).unwrap_err();
        assert!(matches!(err, EvolutionError::BackgroundGap { .. }));
    }

    #[test]
    fn hermite_interpolation_is_exact_for_cubics() {
        // φ(t) = (1 + t + t² + t³)·cos x sampled at two nodes.
        let p = |t: f64| 1.0 + t + t * t + t * t * t;
        let dp = |t: f64| 1.0 + 2.0 * t + 3.0 * t * t;
        let mk = |t: f64| {
            State::new(
                t,
                TrigPoly::cos_mode(1, p(t), 2),
                TrigPoly::cos_mode(1, dp(t), 2),
            )
        };
        let traj = Trajectory {
            states: vec![mk(0.0), mk(0.4), mk(1.0)],
            diagnostics: vec![],
            mu: 1.0,
            sobolev_index: 3.0,
            steps_taken: 2,
            linear: None,
        };
        for t in [0.0, 0.1, 0.4, 0.55, 0.9, 1.0] {
            let st = traj.state_at(t).unwrap();
            assert!((st.varphi.coeffs()[1].re - 0.5 * p(t)).abs() < 1e-14);
            assert!((st.varphi_t.coeffs()[1].re - 0.5 * dp(t)).abs() < 1e-13);
        }
    }
}
