use crate::spectral::TrigPoly;

use super::EvolutionError;

/// One classical RK4 step for `(u, v)' = (v, accel(t, u))`.
pub(super) fn rk4_step<F>(
    t: f64,
    u: &TrigPoly,
    v: &TrigPoly,
    dt: f64,
    mut accel: F,
) -> Result<(TrigPoly, TrigPoly), EvolutionError>
where
    F: FnMut(f64, &TrigPoly) -> Result<TrigPoly, EvolutionError>,
{
    let half = 0.5 * dt;
    let a1 = accel(t, u)?;

    let u2 = u.add_scaled(half, v);
    let v2 = v.add_scaled(half, &a1);
    let a2 = accel(t + half, &u2)?;

    let u3 = u.add_scaled(half, &v2);
    let v3 = v.add_scaled(half, &a2);
    let a3 = accel(t + half, &u3)?;

    let u4 = u.add_scaled(dt, &v3);
    let v4 = v.add_scaled(dt, &a3);
    let a4 = accel(t + dt, &u4)?;

    let w = dt / 6.0;
    let u_next = u
        .add_scaled(w, v)
        .add_scaled(2.0 * w, &v2)
        .add_scaled(2.0 * w, &v3)
        .add_scaled(w, &v4);
    let v_next = v
        .add_scaled(w, &a1)
        .add_scaled(2.0 * w, &a2)
        .add_scaled(2.0 * w, &a3)
        .add_scaled(w, &a4);
    Ok((u_next, v_next))
}

/// How the next step length is chosen.
#[derive(Debug, Clone)]
pub(super) enum StepPlan {
    /// `dt = cfl·Δx / c_max`, clipped to land on the horizon.
    Cfl { cfl: f64, dx: f64, horizon: f64 },
    /// Uniform steps `horizon / n`.
    Uniform { dt: f64, steps: usize },
    /// Explicit time nodes, starting at 0.
    Nodes(Vec<f64>),
}

impl StepPlan {
    pub(super) fn new(cfl: f64, dx: f64, fixed_dt: Option<f64>, horizon: f64) -> Self {
        match fixed_dt {
            Some(dt) => {
                let steps = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
                StepPlan::Uniform {
                    dt: horizon / steps as f64,
                    steps,
                }
            }
            None => StepPlan::Cfl { cfl, dx, horizon },
        }
    }

    /// Time after step `index` (1-based) given the current time and the
    /// current maximal wave speed, or `None` when the run is complete.
    pub(super) fn next_time(&self, index: usize, t: f64, speed: f64) -> Option<f64> {
        match self {
            StepPlan::Cfl { cfl, dx, horizon } => {
                let remaining = horizon - t;
                if remaining <= 1e-12 * horizon.max(1.0) {
                    return None;
                }
                let dt = cfl * dx / speed.max(1e-12);
                // Avoid leaving a sliver step at the end.
                if dt >= remaining * (1.0 - 1e-9) || remaining - dt < 1e-3 * dt {
                    Some(*horizon)
                } else {
                    Some(t + dt)
                }
            }
            StepPlan::Uniform { dt, steps } => {
                if index > *steps {
                    None
                } else if index == *steps {
                    Some(*dt * *steps as f64)
                } else {
                    Some(*dt * index as f64)
                }
            }
            StepPlan::Nodes(nodes) => nodes.get(index).copied(),
        }
    }
}
