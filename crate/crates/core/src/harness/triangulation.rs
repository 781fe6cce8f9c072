use serde::Serialize;

use crate::evolution::export::fmt;
use crate::evolution::{
    solve_linear, DerivedForcing, LinearProblem, SolverConfig, State, Trajectory,
};
use crate::operators::phi_of;
use crate::spectral::TrigPoly;

use super::dependence::strong_gap;
use super::{
    check_aligned, shared_solver, solve_tagged, tag, trapezoid, ExperimentConfig, HarnessError,
};

/// Per-time quantities of the triangle with vertices `φ`, `Ψ^ε` and `φ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleSample {
    pub t: f64,
    /// `‖Ψ^ε − φₓ‖_{H^{s−1}} + ‖(Ψ^ε − φₓ)_t‖_{H^{s−2}}`.
    pub leg1: f64,
    /// Same against `φ_{n,x}`.
    pub leg2: f64,
    /// `‖φ − φ_n‖_{H^s} + ‖(φ − φ_n)_t‖_{H^{s−1}}`.
    pub strong: f64,
}

/// Outcome of the regularisation argument for one `(n, ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangulationReport {
    pub n: usize,
    pub epsilon: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Smallest cutoff meeting the regularisation budget.
    pub cutoff: usize,
    /// Data, velocity and forcing parts of the regularisation error.
    pub regularisation_error: [f64; 3],
    /// `sup_t (‖Ψ^ε‖²_{H^s} + ‖Ψ^ε_t‖²_{H^{s−1}})`.
    pub psi_sup_sq: f64,
    /// The a priori right-hand side for `Ψ^ε` with unit constants.
    pub m_epsilon: f64,
    pub leg1: f64,
    pub leg1_over_epsilon: f64,
    pub leg2: f64,
    /// `‖G^{n,ε}‖_{L²(I; H^{s−2})}`.
    pub g_norm: f64,
    /// Smallest constant making the squared leg-2 bound hold at every time.
    pub leg2_constant: f64,
    /// `sup_t(leg1 + leg2)`.
    pub triangulated_distance: f64,
    /// `sup_t ‖φ − φ_n‖_{H^s} + ‖(φ − φ_n)_t‖_{H^{s−1}}`.
    pub strong_distance: f64,
    /// `ε²`, `‖Δφ⁽¹⁾‖²_{H^{s−1}} + ‖Δφ⁽⁰⁾‖²_{H^s}` and `M(ε)‖φ_n − φ‖²_{C(I;H^{s−1})}`.
    pub bound_components: [f64; 3],
    /// `sup_t(‖Δφ‖²_{H^s} + ‖Δφ_t‖²_{H^{s−1}})` over the component sum.
    pub final_constant: f64,
    /// Largest `strong / (√2·(leg1 + leg2))` over time.
    pub triangle_worst: f64,
    pub triangle_ok: bool,
    pub samples: Vec<TriangleSample>,
}

pub const TRIANGULATION_CSV_HEADER: [&str; 18] = [
    "n",
    "epsilon",
    "horizon",
    "cutoff",
    "reg_data",
    "reg_velocity",
    "reg_forcing",
    "m_epsilon",
    "leg1",
    "leg1_over_epsilon",
    "leg2",
    "g_norm",
    "leg2_constant",
    "triangulated_distance",
    "strong_distance",
    "final_constant",
    "triangle_worst",
    "triangle_ok",
];

impl TriangulationReport {
    pub fn row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt(self.epsilon),
            fmt(self.horizon),
            self.cutoff.to_string(),
            fmt(self.regularisation_error[0]),
            fmt(self.regularisation_error[1]),
            fmt(self.regularisation_error[2]),
            fmt(self.m_epsilon),
            fmt(self.leg1),
            fmt(self.leg1_over_epsilon),
            fmt(self.leg2),
            fmt(self.g_norm),
            fmt(self.leg2_constant),
            fmt(self.triangulated_distance),
            fmt(self.strong_distance),
            fmt(self.final_constant),
            fmt(self.triangle_worst),
            self.triangle_ok.to_string(),
        ]
    }
}

/// `‖a − b‖_{H^{s−1}} + ‖a_t − b_t‖_{H^{s−2}}` between `Ψ` and a spatial derivative.
fn leg(psi: &State, varphi: &State, s: f64) -> f64 {
    (&psi.varphi - &varphi.varphi.derivative(1)).sobolev_norm(s - 1.0)
        + (&psi.varphi_t - &varphi.varphi_t.derivative(1)).sobolev_norm(s - 2.0)
}

fn leg_sq(psi: &State, varphi: &State, s: f64) -> f64 {
    (&psi.varphi - &varphi.varphi.derivative(1)).sobolev_norm_sq(s - 1.0)
        + (&psi.varphi_t - &varphi.varphi_t.derivative(1)).sobolev_norm_sq(s - 2.0)
}

/// Smallest cutoff `K_ε ≤ K` for which the regularised data and forcing are
/// within `ε`, with the three error parts.
fn choose_cutoff(
    base: &Trajectory,
    forcing: &[TrigPoly],
    s: f64,
    epsilon: f64,
    max_mode: usize,
) -> Result<(usize, [f64; 3]), HarnessError> {
    let times = base.times();
    let psi0 = base.initial().varphi.derivative(1);
    let psi1 = base.initial().varphi_t.derivative(1);
    let error = |c: usize| {
        let e0 = (&psi0.lowpass(c) - &psi0).sobolev_norm(s - 1.0);
        let e1 = (&psi1.lowpass(c) - &psi1).sobolev_norm(s - 2.0);
        let sq: Vec<f64> = forcing
            .iter()
            .map(|f| (&f.lowpass(c) - f).sobolev_norm_sq(s - 2.0))
            .collect();
        [e0, e1, trapezoid(&times, &sq).sqrt()]
    };
    let mut best = f64::INFINITY;
    for c in 1..=max_mode {
        let e = error(c);
        let total = e.iter().sum::<f64>();
        if total <= epsilon {
            return Ok((c, e));
        }
        if total.is_finite() {
            best = best.min(total);
        }
    }
    Err(HarnessError::CutoffInfeasible {
        epsilon,
        max_mode,
        best,
    })
}

/// Runs the triangle argument on existing base and perturbed trajectories
/// saved at the same times.
pub fn triangulate(
    cfg: &ExperimentConfig,
    solver: &SolverConfig,
    base: &Trajectory,
    pert: &Trajectory,
    n: usize,
    epsilon: f64,
) -> Result<TriangulationReport, HarnessError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(HarnessError::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    check_aligned(base, pert)?;
    let s = cfg.s();
    let k = solver.max_mode;
    let times = base.times();
    let horizon = *times.last().expect("trajectory is non-empty");

    // Forcing along the base trajectory, as seen by the K-mode solver.
    let forcing: Vec<TrigPoly> = base
        .states
        .iter()
        .map(|st| DerivedForcing::of(&st.varphi).lowpass(k))
        .collect();
    let (cutoff, regularisation_error) = choose_cutoff(base, &forcing, s, epsilon, k)?;

    // Regularised linear problem on the base background.
    let psi0 = base.initial().varphi.derivative(1).lowpass(cutoff);
    let psi1 = base.initial().varphi_t.derivative(1).lowpass(cutoff);
    let source = DerivedForcing {
        background: base,
        cutoff: Some(cutoff),
    };
    let mut prob = LinearProblem::new(base, &source, psi0.clone(), psi1.clone());
    prob.time_nodes = Some(times.clone());
    let lin_cfg = SolverConfig {
        sobolev_index: s,
        save_stride: 1,
        ..solver.clone()
    };
    let psi = solve_linear(&lin_cfg, &prob)
        .map_err(tag(format!("regularised problem eps = {epsilon:e}")))?;
    check_aligned(base, &psi)?;

    let mu = solver.mu;
    let growth = base
        .states
        .iter()
        .map(|st| 1.0 + st.varphi_t.sobolev_norm(2.0) + st.varphi.sobolev_norm(s))
        .fold(0.0, f64::max);
    let f_eps_sq: Vec<f64> = forcing
        .iter()
        .map(|f| f.lowpass(cutoff).sobolev_norm_sq(s - 1.0))
        .collect();
    let m_epsilon = (horizon * growth).exp()
        * (psi1.sobolev_norm_sq(s - 1.0)
            + (mu + 2.0 * base.initial().varphi.sobolev_norm(2.0)) * psi0.sobolev_norm_sq(s)
            + trapezoid(&times, &f_eps_sq));
    let psi_sup_sq = psi
        .states
        .iter()
        .map(|st| st.energy_sq(s))
        .fold(0.0, f64::max);

    // G^{n,ε} = F^ε − F^n + 2(ϕ_{n,x} − ϕ_x)Ψ^ε_xx.
    let g_sq: Vec<f64> = forcing
        .iter()
        .zip(&base.states)
        .zip(&pert.states)
        .zip(&psi.states)
        .map(|(((f, b), p), ps)| {
            let fn_ = DerivedForcing::of(&p.varphi).lowpass(k);
            let dphi_x = (&phi_of(&p.varphi) - &phi_of(&b.varphi)).derivative(1);
            let g = (&f.lowpass(cutoff) - &fn_)
                .add_scaled(2.0, &dphi_x.multiply(&ps.varphi.derivative(2), None));
            g.sobolev_norm_sq(s - 2.0)
        })
        .collect();
    let g_norm = trapezoid(&times, &g_sq).sqrt();

    let d0 = &base.initial().varphi - &pert.initial().varphi;
    let d1 = &base.initial().varphi_t - &pert.initial().varphi_t;
    let data_sq = d0.sobolev_norm_sq(s) + d1.sobolev_norm_sq(s - 1.0);
    let weak_sq = base
        .states
        .iter()
        .zip(&pert.states)
        .map(|(a, b)| (&a.varphi - &b.varphi).sobolev_norm_sq(s - 1.0))
        .fold(0.0, f64::max);
    let gap_sq: Vec<f64> = base
        .states
        .iter()
        .zip(&pert.states)
        .map(|(a, b)| (&a.varphi - &b.varphi).sobolev_norm_sq(s))
        .collect();

    let mut samples = Vec::with_capacity(times.len());
    let mut leg2_constant: f64 = 0.0;
    for i in 0..times.len() {
        let (b, p, ps) = (&base.states[i], &pert.states[i], &psi.states[i]);
        samples.push(TriangleSample {
            t: times[i],
            leg1: leg(ps, b, s),
            leg2: leg(ps, p, s),
            strong: strong_gap(b, p, s),
        });
        let running = trapezoid(&times[..=i], &gap_sq[..=i]);
        let rhs = epsilon * epsilon + data_sq + running + horizon * m_epsilon * weak_sq;
        leg2_constant = leg2_constant.max(leg_sq(ps, p, s) / rhs);
    }

    let sup = |f: fn(&TriangleSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let leg1 = sup(|x| x.leg1);
    let leg2 = sup(|x| x.leg2);
    let strong_distance = sup(|x| x.strong);
    let triangulated_distance = sup(|x| x.leg1 + x.leg2);
    let triangle_worst = samples
        .iter()
        .map(|x| {
            let bound = 2f64.sqrt() * (x.leg1 + x.leg2);
            if bound > 0.0 {
                x.strong / bound
            } else if x.strong > 1e-14 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let strong_sq = base
        .states
        .iter()
        .zip(&pert.states)
        .map(|(a, b)| a.distance(b, s).powi(2))
        .fold(0.0, f64::max);
    let bound_components = [epsilon * epsilon, data_sq, m_epsilon * weak_sq];

    Ok(TriangulationReport {
        n,
        epsilon,
        horizon,
        dt: solver.fixed_dt.unwrap_or(f64::NAN),
        cutoff,
        regularisation_error,
        psi_sup_sq,
        m_epsilon,
        leg1,
        leg1_over_epsilon: leg1 / epsilon,
        leg2,
        g_norm,
        leg2_constant,
        triangulated_distance,
        strong_distance,
        bound_components,
        final_constant: strong_sq / bound_components.iter().sum::<f64>(),
        triangle_worst,
        triangle_ok: triangle_worst <= 1.0 + 1e-10,
        samples,
    })
}

/// Fresh base and perturbed solves on a common horizon, then [`triangulate`].
pub fn run_triangulation(
    cfg: &ExperimentConfig,
    n: usize,
    epsilon: f64,
) -> Result<TriangulationReport, HarnessError> {
    cfg.validate()?;
    let base_data = cfg.base_data();
    let pert_data = cfg.perturbed_data(n);
    let solver = shared_solver(&cfg.solver, &[base_data.clone(), pert_data.clone()]);
    let base = solve_tagged(&solver, &base_data, "base run")?;
    let pert = solve_tagged(&solver, &pert_data, format!("perturbed run n = {n}"))?;
    triangulate(cfg, &solver, &base, &pert, n, epsilon)
}
