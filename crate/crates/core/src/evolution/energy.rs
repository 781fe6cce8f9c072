use crate::operators::{commutator_bessel, commutator_bessel_direct, phi_of};
use crate::spectral::TrigPoly;

use super::{EvolutionError, Trajectory};

/// `∫(μ − 2ϕ_x)|ψ_x|² dx` (normalised integral).
pub fn weighted_gradient_energy(psi_x: &TrigPoly, phi_x: &TrigPoly, mu: f64) -> f64 {
    mu * psi_x.sobolev_norm_sq(0.0) - 2.0 * phi_x.multiply(psi_x, None).inner_l2(psi_x)
}

/// `E = (‖ψ_t‖² + ∫(μ − 2ϕ_x)|ψ_x|²)^{1/2}`.
pub fn energy_e(
    psi_t: &TrigPoly,
    psi_x: &TrigPoly,
    phi_x: &TrigPoly,
    mu: f64,
) -> Result<f64, EvolutionError> {
    let weighted = weighted_gradient_energy(psi_x, phi_x, mu);
    if weighted < 0.0 {
        return Err(EvolutionError::NegativeRadicand { value: weighted });
    }
    Ok((psi_t.sobolev_norm_sq(0.0) + weighted).sqrt())
}

/// Residual of the basic energy identity at one interior saved time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub t: f64,
    /// `|d/dt(½ energy) − right-hand side|`.
    pub residual: f64,
    /// Centered difference of the half energy.
    pub lhs: f64,
    pub rhs: f64,
}

/// Residual of the order-`r` identity, with its four right-hand terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HigherIdentityResidual {
    pub t: f64,
    pub residual: f64,
    pub lhs: f64,
    /// `I₁ … I₄`.
    pub terms: [f64; 4],
    /// Relative mismatch between the convolution and operator-difference
    /// evaluations of the commutator in `I₃`.
    pub commutator_mismatch: f64,
}

/// Second-order derivative at interior node `i` on a non-uniform grid.
fn centered_derivative(t: &[f64], q: &[f64], i: usize) -> f64 {
    let h1 = t[i] - t[i - 1];
    let h2 = t[i + 1] - t[i];
    -h2 / (h1 * (h1 + h2)) * q[i - 1]
        + (h2 - h1) / (h1 * h2) * q[i]
        + h1 / (h2 * (h1 + h2)) * q[i + 1]
}

fn snapshots(traj: &Trajectory) -> Result<&[super::LinearSnapshot], EvolutionError> {
    match &traj.linear {
        Some(s) if s.len() == traj.states.len() => Ok(s),
        _ => Err(EvolutionError::InvalidConfig(
            "energy identities need a linear trajectory with stored background and forcing".into(),
        )),
    }
}

/// Checks `½ d/dt(‖ψ_t‖² + ∫(μ−2ϕ_x)|ψ_x|²) = 2∫ϕ_xxψ_tψ_x − ∫ϕ_xt|ψ_x|² + ∫Fψ_t`
/// at each interior saved time, differencing the stored quadratic form.
pub fn energy_identity_residual(
    traj: &Trajectory,
) -> Result<Vec<IdentityResidual>, EvolutionError> {
    let aux = snapshots(traj)?;
    let mu = traj.mu;
    let times = traj.times();
    let mut half_energy = Vec::with_capacity(times.len());
    let mut rhs = Vec::with_capacity(times.len());
    for (state, snap) in traj.states.iter().zip(aux) {
        let psi_t = &state.varphi_t;
        let psi_x = state.varphi.derivative(1);
        let phi = phi_of(&snap.background.varphi);
        let phi_x = phi.derivative(1);
        let phi_xx = phi.derivative(2);
        let phi_xt = phi_of(&snap.background.varphi_t).derivative(1);

        half_energy.push(
            0.5 * (psi_t.sobolev_norm_sq(0.0) + weighted_gradient_energy(&psi_x, &phi_x, mu)),
        );
        let transport = 2.0 * phi_xx.multiply(psi_t, None).inner_l2(&psi_x);
        let stretching = -phi_xt.multiply(&psi_x, None).inner_l2(&psi_x);
        let forcing = snap.source.inner_l2(psi_t);
        rhs.push(transport + stretching + forcing);
    }
    Ok((1..times.len().saturating_sub(1))
        .map(|i| {
            let lhs = centered_derivative(&times, &half_energy, i);
            IdentityResidual {
                t: times[i],
                residual: (lhs - rhs[i]).abs(),
                lhs,
                rhs: rhs[i],
            }
        })
        .collect())
}

/// Order-`r` version: `½ d/dt(‖ψ_t‖²_{H^{r−1}} + ∫(μ−2ϕ_x)|⟨∂ₓ⟩^{r−1}ψ_x|²) = I₁+I₂+I₃+I₄`.
pub fn higher_energy_identity_residual(
    traj: &Trajectory,
    r: f64,
) -> Result<Vec<HigherIdentityResidual>, EvolutionError> {
    if !(r >= 2.0) {
        return Err(EvolutionError::InvalidConfig(format!(
            "identity order r must be at least 2, got {r}"
        )));
    }
    let aux = snapshots(traj)?;
    let mu = traj.mu;
    let order = r - 1.0;
    let times = traj.times();
    let mut half_energy = Vec::with_capacity(times.len());
    let mut terms = Vec::with_capacity(times.len());
    let mut mismatch = Vec::with_capacity(times.len());
    for (state, snap) in traj.states.iter().zip(aux) {
        let psi_x = state.varphi.derivative(1);
        let psi_xx = state.varphi.derivative(2);
        let lift_t = state.varphi_t.bessel(order);
        let lift_x = psi_x.bessel(order);
        let phi = phi_of(&snap.background.varphi);
        let phi_x = phi.derivative(1);
        let phi_xx = phi.derivative(2);
        let phi_xt = phi_of(&snap.background.varphi_t).derivative(1);

        half_energy.push(
            0.5 * (lift_t.sobolev_norm_sq(0.0) + weighted_gradient_energy(&lift_x, &phi_x, mu)),
        );

        let comm = commutator_bessel(order, &phi_x, &psi_xx);
        let comm_direct = commutator_bessel_direct(order, &phi_x, &psi_xx);
        let scale = comm_direct.l2_norm();
        mismatch.push(if scale > 0.0 {
            (&comm - &comm_direct).l2_norm() / scale
        } else {
            comm.l2_norm()
        });

        let i1 = 2.0 * phi_xx.multiply(&lift_t, None).inner_l2(&lift_x);
        let i2 = -phi_xt.multiply(&lift_x, None).inner_l2(&lift_x);
        let i3 = -2.0 * comm.inner_l2(&lift_t);
        let i4 = snap.source.bessel(order).inner_l2(&lift_t);
        terms.push([i1, i2, i3, i4]);
    }
    Ok((1..times.len().saturating_sub(1))
        .map(|i| {
            let lhs = centered_derivative(&times, &half_energy, i);
            let total: f64 = terms[i].iter().sum();
            HigherIdentityResidual {
                t: times[i],
                residual: (lhs - total).abs(),
                lhs,
                terms: terms[i],
                commutator_mismatch: mismatch[i],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{
        solve_linear, FrozenBackground, LinearProblem, SolverConfig, ZeroSource,
    };
    use crate::spectral::{analyze, SampleGrid};

    #[test]
    fn energy_examples() {
        let psi = TrigPoly::cos_mode(1, 1.0, 4);
        let z = TrigPoly::zeros(4);
        let e = energy_e(&TrigPoly::sin_mode(1, 1.0, 4), &psi.derivative(1), &z, 1.0).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
        assert_eq!(energy_e(&z, &z, &z, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_radicand() {
        // μ − 2ϕ_x = 1 − 4cos x, gradient concentrated near x = 0.
        let phi_x = TrigPoly::cos_mode(1, 2.0, 8);
        let psi_x = &TrigPoly::cos_mode(1, 1.0, 8) + &TrigPoly::cos_mode(2, 1.0, 8);
        let err = energy_e(&TrigPoly::zeros(8), &psi_x, &phi_x, 0.5).unwrap_err();
        assert!(matches!(err, EvolutionError::NegativeRadicand { .. }));
    }

    #[test]
    fn gradient_bound_nearly_sharp_at_the_argmin() {
        // varphi = a cos x gives ϕ_x = a cos x; the margin μ − 2a = δ sits at x = 0.
        let (mu, delta) = (1.0, 0.1);
        let a = 0.5 * (mu - delta);
        let k = 256;
        let phi_x = TrigPoly::cos_mode(1, a, k);
        // ψ_x = derivative of a narrow Gaussian centred at 0 (odd, so mean-zero).
        let sigma: f64 = 0.03;
        let grid = SampleGrid::from_fn(4 * k + 4, |x| {
            let y = if x > std::f64::consts::PI {
                x - 2.0 * std::f64::consts::PI
            } else {
                x
            };
            -y / (sigma * sigma) * (-y * y / (2.0 * sigma * sigma)).exp()
        });
        let psi_x = analyze(&grid, k).unwrap().project_mean_zero();
        let e = energy_e(&TrigPoly::zeros(k), &psi_x, &phi_x, mu).unwrap();
        let bound = e / delta.sqrt();
        let grad = psi_x.l2_norm();
        assert!(grad <= bound);
        assert!(grad >= 0.98 * bound, "ratio {}", grad / bound);
    }

    #[test]
    fn zero_solution_has_zero_residual() {
        let bg = FrozenBackground {
            varphi: TrigPoly::cos_mode(1, 0.2, 6),
        };
        let prob = LinearProblem::new(&bg, &ZeroSource, TrigPoly::zeros(6), TrigPoly::zeros(6));
        let cfg = SolverConfig {
            max_mode: 6,
            fixed_dt: Some(0.05),
            horizon: 0.5,
            ..Default::default()
        };
        let traj = solve_linear(&cfg, &prob).unwrap();
        let res = energy_identity_residual(&traj).unwrap();
        assert_eq!(res.len(), traj.states.len() - 2);
        assert!(res.iter().all(|r| r.residual == 0.0));
        let res = higher_energy_identity_residual(&traj, 2.5).unwrap();
        assert!(res.iter().all(|r| r.residual == 0.0));
    }

    #[test]
    fn nonlinear_trajectory_is_rejected() {
        let z = TrigPoly::zeros(2);
        let traj = Trajectory {
            states: vec![crate::evolution::State::new(0.0, z.clone(), z)],
            diagnostics: vec![],
            mu: 1.0,
            sobolev_index: 3.0,
            steps_taken: 0,
            linear: None,
        };
        assert!(energy_identity_residual(&traj).is_err());
        assert!(higher_energy_identity_residual(&traj, 1.5).is_err());
    }
}
