use crate::operators::{acceleration, margin};
use crate::spectral::TrigPoly;

use super::stepper::{rk4_step, StepPlan};
use super::{
    EvolutionError, SolverConfig, State, StepDiagnostics, Trajectory, MEAN_ZERO_TOLERANCE,
};

/// `‖φ⁽⁰⁾_x‖²_{H²} + ‖φ⁽¹⁾‖²_{H²}`, the size that controls the existence time.
pub fn data_size_h2(varphi0: &TrigPoly, varphi1: &TrigPoly) -> f64 {
    varphi0.derivative(1).sobolev_norm_sq(2.0) + varphi1.sobolev_norm_sq(2.0)
}

/// Default existence horizon `T0 = C1·(‖φ⁽⁰⁾_x‖²_{H²} + ‖φ⁽¹⁾‖²_{H²})^{-1/2}`;
/// infinite for zero data.
pub fn t0_default(varphi0: &TrigPoly, varphi1: &TrigPoly, c1: f64) -> f64 {
    let size = data_size_h2(varphi0, varphi1);
    if size == 0.0 {
        f64::INFINITY
    } else {
        c1 / size.sqrt()
    }
}

/// Smallness condition on the data: `‖φ⁽⁰⁾_x‖²_{H²} + ‖φ⁽¹⁾‖²_{H²} < R²`.
pub fn check_data_admissible(varphi0: &TrigPoly, varphi1: &TrigPoly, r: f64) -> bool {
    data_size_h2(varphi0, varphi1) < r * r
}

pub(super) fn require_mean_zero(name: &str, f: &TrigPoly) -> Result<(), EvolutionError> {
    let tol = MEAN_ZERO_TOLERANCE * f.l2_norm().max(1.0);
    if f.mean().abs() > tol {
        return Err(EvolutionError::InadmissibleData(format!(
            "{name} has mean {} (must be zero)",
            f.mean()
        )));
    }
    Ok(())
}

fn apriori_ratio(state: &State, s: f64, initial: f64) -> f64 {
    if initial == 0.0 {
        if state.energy_sq(s) == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        state.energy_sq(s) / initial
    }
}

/// Integrates `φ_tt = acceleration(φ, μ, form)` from `(φ⁽⁰⁾, φ⁽¹⁾)` up to the
/// configured horizon.
pub fn solve_nonlinear(
    cfg: &SolverConfig,
    varphi0: &TrigPoly,
    varphi1: &TrigPoly,
) -> Result<Trajectory, EvolutionError> {
    cfg.validate()?;
    require_mean_zero("varphi0", varphi0)?;
    require_mean_zero("varphi1", varphi1)?;
    let k = cfg.max_mode;
    let s = cfg.sobolev_index;
    let u0 = varphi0.resized(k);
    let v0 = varphi1.resized(k);

    let mut m = margin(&u0, cfg.mu, cfg.oversample);
    if m.min_value < cfg.delta {
        return Err(EvolutionError::InadmissibleData(format!(
            "initial margin {} at x = {} is below delta = {}",
            m.min_value, m.argmin_x, cfg.delta
        )));
    }

    let mut state = State::new(0.0, u0, v0);
    let initial_energy = state.energy_sq(s);
    let diag = |state: &State, margin_min: f64, dt: f64| StepDiagnostics {
        t: state.t,
        norm_hs: state.varphi.sobolev_norm(s),
        norm_hs1_t: state.varphi_t.sobolev_norm(s - 1.0),
        margin_min,
        energy: None,
        apriori_ratio: apriori_ratio(state, s, initial_energy),
        mean: state.varphi.mean(),
        dt,
    };

    let mut traj = Trajectory {
        states: vec![state.clone()],
        diagnostics: vec![diag(&state, m.min_value, 0.0)],
        mu: cfg.mu,
        sobolev_index: s,
        steps_taken: 0,
        linear: None,
    };

    let plan = StepPlan::new(cfg.cfl, cfg.grid_spacing(), cfg.fixed_dt, cfg.horizon);
    let rhs = |_t: f64, u: &TrigPoly| Ok(acceleration(u, cfg.mu, cfg.form).resized(k));

    let mut index = 1;
    while let Some(t_next) = plan.next_time(index, state.t, m.max_speed()) {
        let dt = t_next - state.t;
        let (u, v) = rk4_step(state.t, &state.varphi, &state.varphi_t, dt, rhs)?;
        if !(u.is_finite() && v.is_finite()) {
            return Err(EvolutionError::NonFinite { t: t_next });
        }
        state = State::new(t_next, u, v);
        m = margin(&state.varphi, cfg.mu, cfg.oversample);
        if !m.min_value.is_finite() {
            return Err(EvolutionError::NonFinite { t: t_next });
        }
        if m.min_value < cfg.delta {
            return Err(EvolutionError::StabilityLost {
                t: t_next,
                margin: m.min_value,
                delta: cfg.delta,
            });
        }
        traj.steps_taken = index;
        let is_last = plan.next_time(index + 1, state.t, m.max_speed()).is_none();
        if index % cfg.save_stride == 0 || is_last {
            traj.diagnostics.push(diag(&state, m.min_value, dt));
            traj.states.push(state.clone());
        }
        index += 1;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::FormTag;

    #[test]
    fn t0_examples() {
        let c = TrigPoly::cos_mode(1, 1.0, 4);
        let z = TrigPoly::zeros(4);
        assert!((t0_default(&c, &z, 1.0) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(t0_default(&z, &z, 1.0), f64::INFINITY);
        let d = crate::spectral::random_trig(3, 6, 2.0, 0.2);
        let t1 = t0_default(&c, &d, 1.0);
        let t2 = t0_default(&c.scaled(2.0), &d.scaled(2.0), 1.0);
        assert!((t2 - 0.5 * t1).abs() < 1e-15);
    }

    #[test]
    fn admissibility_examples() {
        let z = TrigPoly::zeros(3);
        assert!(check_data_admissible(&z, &z, 0.5));
        assert!(!check_data_admissible(
            &TrigPoly::cos_mode(1, 1.0, 3),
            &z,
            1.0
        ));
        assert!(check_data_admissible(
            &TrigPoly::cos_mode(1, 0.1, 3),
            &z,
            1.0
        ));
    }

    #[test]
    fn zero_data_stay_zero() {
        let cfg = SolverConfig {
            max_mode: 8,
            horizon: 0.5,
            ..Default::default()
        };
        let z = TrigPoly::zeros(8);
        let traj = solve_nonlinear(&cfg, &z, &z).unwrap();
        assert!(traj
            .states
            .iter()
            .all(|s| s.varphi.is_zero() && s.varphi_t.is_zero()));
        assert_eq!(traj.end_time(), 0.5);
    }

    #[test]
    fn rejects_negative_margin_and_nonzero_mean() {
        let cfg = SolverConfig {
            max_mode: 8,
            ..Default::default()
        };
        let z = TrigPoly::zeros(8);
        let err = solve_nonlinear(&cfg, &TrigPoly::cos_mode(1, 1.0, 8), &z).unwrap_err();
        assert!(matches!(err, EvolutionError::InadmissibleData(_)));
        let err = solve_nonlinear(&cfg, &TrigPoly::constant(0.1, 8), &z).unwrap_err();
        assert!(matches!(err, EvolutionError::InadmissibleData(_)));
    }

    #[test]
    fn small_data_follow_linear_wave() {
        let eps = 1e-2;
        let cfg = SolverConfig {
            max_mode: 16,
            horizon: 2.0,
            form: FormTag::A,
            ..Default::default()
        };
        let z = TrigPoly::zeros(16);
        let traj = solve_nonlinear(&cfg, &TrigPoly::cos_mode(1, eps, 16), &z).unwrap();
        for st in &traj.states {
            let lin = TrigPoly::cos_mode(1, eps * st.t.cos(), 16);
            assert!((&st.varphi - &lin).l2_norm() <= 5.0 * eps * eps);
        }
    }

    #[test]
    fn save_stride_keeps_final_state() {
        let cfg = SolverConfig {
            max_mode: 8,
            horizon: 1.0,
            fixed_dt: Some(0.1),
            save_stride: 3,
            ..Default::default()
        };
        let z = TrigPoly::zeros(8);
        let traj = solve_nonlinear(&cfg, &TrigPoly::cos_mode(2, 0.01, 8), &z).unwrap();
        let times = traj.times();
        assert_eq!(traj.steps_taken, 10);
        assert_eq!(times.len(), 5); // 0, 0.3, 0.6, 0.9, 1.0
        assert_eq!(*times.last().unwrap(), 1.0);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }
}
