//! Randomised LHS/RHS ratio checks for the norm and commutator inequalities
//! used by the energy estimates.

mod campaign;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::operators::{
    commutator_bessel, commutator_bessel_direct, commutator_hilbert, quadratic_q,
};
use crate::spectral::TrigPoly;

pub use campaign::{
    run_campaign, write_samples_csv, Campaign, CampaignOutcome, LevelStats, ParamGrid, RatioReport,
    Verdict,
};

/// Left-hand sides at or below this are treated as zero when the right-hand
/// factor vanishes.
pub const DEGENERATE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    #[error("input must have zero mean: {0}")]
    MeanNonZero(String),
    #[error("campaign needs at least one sample and one resolution level")]
    EmptyCampaign,
}

/// The inequalities the lab knows how to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    Hilbert,
    Poincare,
    Interpolation,
    CommL2,
    CommP,
    CommBesselI,
    CommBesselIi,
    CommBesselIii,
    Q,
    QDiff,
    QDiffS,
}

impl Inequality {
    pub const ALL: [Inequality; 11] = [
        Inequality::Hilbert,
        Inequality::Poincare,
        Inequality::Interpolation,
        Inequality::CommL2,
        Inequality::CommP,
        Inequality::CommBesselI,
        Inequality::CommBesselIi,
        Inequality::CommBesselIii,
        Inequality::Q,
        Inequality::QDiff,
        Inequality::QDiffS,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Inequality::Hilbert => "hilbert",
            Inequality::Poincare => "poincare",
            Inequality::Interpolation => "interpolation",
            Inequality::CommL2 => "comm_l2",
            Inequality::CommP => "comm_p",
            Inequality::CommBesselI => "comm_bessel_i",
            Inequality::CommBesselIi => "comm_bessel_ii",
            Inequality::CommBesselIii => "comm_bessel_iii",
            Inequality::Q => "q",
            Inequality::QDiff => "q_diff",
            Inequality::QDiffS => "q_diff_s",
        }
    }

    /// Inequalities whose constant is exactly 1.
    pub fn is_hard(self) -> bool {
        matches!(
            self,
            Inequality::Hilbert | Inequality::Poincare | Inequality::Interpolation
        )
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Inequality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Inequality::ALL
            .into_iter()
            .find(|i| i.id() == key)
            .ok_or_else(|| {
                let known: Vec<_> = Inequality::ALL.iter().map(|i| i.id()).collect();
                format!(
                    "unknown inequality `{s}` (expected one of {})",
                    known.join(", ")
                )
            })
    }
}

/// Which right-hand side of the Bessel-commutator lemma is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BesselVariant {
    I,
    Ii,
    Iii,
}

/// One evaluation of an inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSample {
    pub seed: u64,
    #[serde(rename = "K")]
    pub max_mode: usize,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs_factor: f64,
    /// `lhs / rhs_factor`; 0 for an admissible degenerate sample and
    /// infinite for a degenerate sample with nonzero left-hand side.
    pub ratio: f64,
    pub degenerate: bool,
}

impl RatioSample {
    pub fn new(max_mode: usize, params: &[(&str, f64)], lhs: f64, rhs_factor: f64) -> Self {
        let degenerate = rhs_factor == 0.0;
        let ratio = if !degenerate {
            lhs / rhs_factor
        } else if lhs <= DEGENERATE_TOLERANCE {
            0.0
        } else {
            f64::INFINITY
        };
        RatioSample {
            seed: 0,
            max_mode,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs_factor,
            ratio,
            degenerate,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// A zero right-hand side with a left-hand side above the tolerance.
    pub fn violates_degenerate(&self) -> bool {
        self.degenerate && self.lhs > DEGENERATE_TOLERANCE
    }
}

fn require_mean_zero(name: &str, f: &TrigPoly) -> Result<(), LabError> {
    if f.mean().abs() > 1e-12 * f.l2_norm().max(1.0) {
        return Err(LabError::MeanNonZero(format!(
            "{name} has mean {}",
            f.mean()
        )));
    }
    Ok(())
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), LabError> {
    if cond {
        Ok(())
    } else {
        Err(LabError::ParameterDomain(msg()))
    }
}

/// `‖H f‖_{H^s} ≤ ‖f‖_{H^s}`, with equality for mean-zero `f`.
pub fn ratio_hilbert(f: &TrigPoly, s: f64) -> RatioSample {
    RatioSample::new(
        f.max_mode(),
        &[("s", s)],
        f.hilbert().sobolev_norm(s),
        f.sobolev_norm(s),
    )
}

/// `‖f‖_{H^s} ≤ √2‖f_x‖_{H^{s−1}}` for mean-zero `f`.
pub fn ratio_poincare(f: &TrigPoly, s: f64) -> Result<RatioSample, LabError> {
    require(s >= 1.0, || format!("poincare needs s >= 1, got {s}"))?;
    require_mean_zero("f", f)?;
    let rhs = 2f64.sqrt() * f.derivative(1).sobolev_norm(s - 1.0);
    Ok(RatioSample::new(
        f.max_mode(),
        &[("s", s)],
        f.sobolev_norm(s),
        rhs,
    ))
}

/// `‖f‖_{H^{s−1}} ≤ ‖f‖_{H^s}^{1−θ}‖f‖_{H¹}^θ` with `θ = 1/(s−1)`.
pub fn ratio_interpolation(f: &TrigPoly, s: f64) -> Result<RatioSample, LabError> {
    require(s > 2.0, || format!("interpolation needs s > 2, got {s}"))?;
    require_mean_zero("f", f)?;
    let theta = 1.0 / (s - 1.0);
    let rhs = f.sobolev_norm(s).powf(1.0 - theta) * f.sobolev_norm(1.0).powf(theta);
    Ok(RatioSample::new(
        f.max_mode(),
        &[("s", s)],
        f.sobolev_norm(s - 1.0),
        rhs,
    ))
}

/// `‖[H; v]f‖ ≤ C‖v‖_{H^τ}‖f‖`, `τ > 1/2`.
pub fn ratio_comm_l2(tau: f64, v: &TrigPoly, f: &TrigPoly) -> Result<RatioSample, LabError> {
    require(tau > 0.5, || format!("comm_l2 needs tau > 1/2, got {tau}"))?;
    let lhs = commutator_hilbert(v, f).l2_norm();
    let rhs = v.sobolev_norm(tau) * f.l2_norm();
    Ok(RatioSample::new(
        v.max_mode().max(f.max_mode()),
        &[("tau", tau)],
        lhs,
        rhs,
    ))
}

/// `‖[H; v]∂ₓᵖf‖_{H^τ} ≤ C‖∂ₓᵖv‖_{H^τ}‖f‖_{H¹}`.
pub fn ratio_comm_p(tau: f64, p: u32, v: &TrigPoly, f: &TrigPoly) -> Result<RatioSample, LabError> {
    require(tau >= 0.0, || format!("comm_p needs tau >= 0, got {tau}"))?;
    let lhs = commutator_hilbert(v, &f.derivative(p)).sobolev_norm(tau);
    let rhs = v.derivative(p).sobolev_norm(tau) * f.sobolev_norm(1.0);
    Ok(RatioSample::new(
        v.max_mode().max(f.max_mode()),
        &[("tau", tau), ("p", p as f64)],
        lhs,
        rhs,
    ))
}

/// `‖[⟨∂ₓ⟩^τ; v]f‖` against the three right-hand sides of the Bessel
/// commutator lemma. Variant iii ignores `sigma` and uses the `1/2` endpoint.
pub fn ratio_comm_bessel(
    variant: BesselVariant,
    tau: f64,
    sigma: f64,
    v: &TrigPoly,
    f: &TrigPoly,
) -> Result<RatioSample, LabError> {
    require(tau >= 1.0, || {
        format!("comm_bessel needs tau >= 1, got {tau}")
    })?;
    if variant != BesselVariant::Iii {
        require(sigma > 0.5, || {
            format!("comm_bessel variants i/ii need sigma > 1/2, got {sigma}")
        })?;
    }
    let sigma = if variant == BesselVariant::Iii {
        0.5
    } else {
        sigma
    };
    let lhs = commutator_bessel(tau, v, f).l2_norm();
    let tail = v.derivative(1).sobolev_norm(1.0) * f.sobolev_norm(tau - 1.0);
    let head = match variant {
        BesselVariant::I => v.sobolev_norm(tau) * f.sobolev_norm(sigma),
        BesselVariant::Ii => v.sobolev_norm(tau + sigma) * f.l2_norm(),
        BesselVariant::Iii => v.sobolev_norm(tau + 0.5) * f.sobolev_norm(0.5),
    };
    Ok(RatioSample::new(
        v.max_mode().max(f.max_mode()),
        &[("tau", tau), ("sigma", sigma)],
        lhs,
        head + tail,
    ))
}

/// Relative gap between the convolution and operator-difference evaluations
/// of `[⟨∂ₓ⟩^τ; v]f`.
pub fn commutator_cross_check(tau: f64, v: &TrigPoly, f: &TrigPoly) -> f64 {
    let a = commutator_bessel(tau, v, f);
    let b = commutator_bessel_direct(tau, v, f);
    let scale = b.l2_norm();
    let gap = (&a - &b).l2_norm();
    if scale > 0.0 {
        gap / scale
    } else {
        gap
    }
}

/// `‖Q[φ]‖_{H^{s−1}} ≤ C‖φₓ‖_{H²}‖φₓ‖_{H^{s−1}}`.
pub fn ratio_q(s: f64, varphi: &TrigPoly) -> Result<RatioSample, LabError> {
    require(s >= 1.0, || format!("q needs s >= 1, got {s}"))?;
    require_mean_zero("varphi", varphi)?;
    let vx = varphi.derivative(1);
    let lhs = quadratic_q(varphi).sobolev_norm(s - 1.0);
    let rhs = vx.sobolev_norm(2.0) * vx.sobolev_norm(s - 1.0);
    Ok(RatioSample::new(varphi.max_mode(), &[("s", s)], lhs, rhs))
}

fn q_difference(varphi: &TrigPoly, tvarphi: &TrigPoly) -> (TrigPoly, TrigPoly) {
    let k = varphi.max_mode().max(tvarphi.max_mode());
    let a = varphi.resized(k);
    let b = tvarphi.resized(k);
    let dq = &quadratic_q(&a) - &quadratic_q(&b);
    (dq, &a - &b)
}

/// `‖Q[φ] − Q[φ̃]‖ ≤ C(‖φ‖_{H³} + ‖φ̃‖_{H³})‖(φ − φ̃)ₓ‖`.
pub fn ratio_q_diff(varphi: &TrigPoly, tvarphi: &TrigPoly) -> Result<RatioSample, LabError> {
    require_mean_zero("varphi", varphi)?;
    require_mean_zero("tvarphi", tvarphi)?;
    let (dq, d) = q_difference(varphi, tvarphi);
    let rhs = (varphi.sobolev_norm(3.0) + tvarphi.sobolev_norm(3.0)) * d.derivative(1).l2_norm();
    Ok(RatioSample::new(d.max_mode(), &[], dq.l2_norm(), rhs))
}

/// `‖Q[φ] − Q[φ̃]‖_{H^{s−1}} ≤ C(‖φ‖_{H^s} + ‖φ̃‖_{H^s})‖φ − φ̃‖_{H^s}`, `s ≥ 3`.
pub fn ratio_q_diff_s(
    s: f64,
    varphi: &TrigPoly,
    tvarphi: &TrigPoly,
) -> Result<RatioSample, LabError> {
    require(s >= 3.0, || format!("q_diff_s needs s >= 3, got {s}"))?;
    require_mean_zero("varphi", varphi)?;
    require_mean_zero("tvarphi", tvarphi)?;
    let (dq, d) = q_difference(varphi, tvarphi);
    let rhs = (varphi.sobolev_norm(s) + tvarphi.sobolev_norm(s)) * d.sobolev_norm(s);
    Ok(RatioSample::new(
        d.max_mode(),
        &[("s", s)],
        dq.sobolev_norm(s - 1.0),
        rhs,
    ))
}
