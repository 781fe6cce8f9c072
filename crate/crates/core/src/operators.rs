//! Equation-specific nonlocal operators.
//!
//! Throughout, `varphi` is the unknown and `ϕ = H[varphi]` its Hilbert
//! transform. All products are exact coefficient convolutions, so every
//! output carries the degree sum of its factors and nothing is truncated
//! silently.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{bracket_pow, synthesize, TrigPoly};

/// Which of the three equivalent spatial forms of the equation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormTag {
    /// `μφ_xx + (½H[ϕ²]_xx + ϕφ_xx)_x`
    A,
    /// `μφ_xx + ([H;ϕ]ϕ_xx + H[ϕ_x²])_x`
    B,
    /// `(μ − 2ϕ_x)φ_xx − Q[φ]`
    C,
}

impl FormTag {
    pub const ALL: [FormTag; 3] = [FormTag::A, FormTag::B, FormTag::C];
}

impl fmt::Display for FormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FormTag::A => "A",
            FormTag::B => "B",
            FormTag::C => "C",
        };
        f.write_str(s)
    }
}

impl FromStr for FormTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(FormTag::A),
            "B" | "b" => Ok(FormTag::B),
            "C" | "c" => Ok(FormTag::C),
            other => Err(format!("unknown form `{other}` (expected A, B or C)")),
        }
    }
}

/// Minimum of the hyperbolicity coefficient `μ − 2ϕ_x` on an oversampled grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    pub min_value: f64,
    pub argmin_x: f64,
    /// Largest value of `μ − 2ϕ_x` on the same grid; sets the wave speed.
    pub max_value: f64,
    pub grid_oversample: usize,
}

impl Margin {
    /// `sqrt(max(μ − 2ϕ_x))`, the fastest local wave speed (zero when the
    /// coefficient is nowhere positive).
    pub fn max_speed(&self) -> f64 {
        self.max_value.max(0.0).sqrt()
    }
}

pub const DEFAULT_OVERSAMPLE: usize = 4;

/// `ϕ = H[varphi]`.
pub fn phi_of(varphi: &TrigPoly) -> TrigPoly {
    varphi.hilbert()
}

/// Evaluates `μ − 2∂ₓH[varphi]` on `oversample·(2K+1)` nodes.
pub fn margin(varphi: &TrigPoly, mu: f64, oversample: usize) -> Margin {
    let oversample = oversample.max(DEFAULT_OVERSAMPLE);
    let phi_x = phi_of(varphi).derivative(1);
    let size = oversample * (2 * varphi.max_mode() + 1);
    let grid = synthesize(&phi_x, size).expect("grid is oversampled by construction");

    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let mut argmin = 0;
    for (j, v) in grid.values.iter().enumerate() {
        let c = mu - 2.0 * v;
        if c < min_value {
            min_value = c;
            argmin = j;
        }
        max_value = max_value.max(c);
    }
    Margin {
        min_value,
        argmin_x: grid.node(argmin),
        max_value,
        grid_oversample: oversample,
    }
}

/// `[H; v] f = H[v f] − v H[f]`.
pub fn commutator_hilbert(v: &TrigPoly, f: &TrigPoly) -> TrigPoly {
    let vf = v.multiply(f, None).hilbert();
    let v_hf = v.multiply(&f.hilbert(), None);
    &vf - &v_hf
}

/// `[⟨∂ₓ⟩^τ; v] f` from the convolution formula
/// `Σ_ℓ (⟨k⟩^τ − ⟨ℓ⟩^τ) v̂(k−ℓ) f̂(ℓ)`.
pub fn commutator_bessel(tau: f64, v: &TrigPoly, f: &TrigPoly) -> TrigPoly {
    let kv = v.max_mode() as i64;
    let kf = f.max_mode() as i64;
    let vs = v.full_spectrum();
    let fs = f.full_spectrum();
    let weights: Vec<f64> = (-kf..=kf).map(|l| bracket_pow(l as f64, tau)).collect();

    let out_k = (kv + kf) as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); out_k + 1];
    for (k, slot) in coeffs.iter_mut().enumerate() {
        let k = k as i64;
        let wk = bracket_pow(k as f64, tau);
        let lo = (-kf).max(k - kv);
        let hi = kf.min(k + kv);
        let mut acc = Complex64::new(0.0, 0.0);
        for l in lo..=hi {
            let w = wk - weights[(l + kf) as usize];
            acc += vs[(k - l + kv) as usize] * fs[(l + kf) as usize] * w;
        }
        *slot = acc;
    }
    coeffs[0].im = 0.0;
    TrigPoly::from_coeffs(coeffs).expect("finite inputs give finite output")
}

/// `[⟨∂ₓ⟩^τ; v] f` as the operator difference `⟨∂ₓ⟩^τ(v f) − v ⟨∂ₓ⟩^τ f`.
pub fn commutator_bessel_direct(tau: f64, v: &TrigPoly, f: &TrigPoly) -> TrigPoly {
    let lhs = v.multiply(f, None).bessel(tau);
    let rhs = v.multiply(&f.bessel(tau), None);
    &lhs - &rhs
}

/// `Q[φ] = −3[H; ϕ_x]ϕ_xx − [H; ϕ]ϕ_xxx`, degree `2K`.
pub fn quadratic_q(varphi: &TrigPoly) -> TrigPoly {
    let phi = phi_of(varphi);
    let phi_x = phi.derivative(1);
    let phi_xx = phi.derivative(2);
    let phi_xxx = phi.derivative(3);
    let first = commutator_hilbert(&phi_x, &phi_xx);
    let second = commutator_hilbert(&phi, &phi_xxx);
    first.scaled(-3.0).add_scaled(-1.0, &second)
}

/// Right-hand side of `φ_tt = …` in the selected form, degree `2K`.
pub fn acceleration(varphi: &TrigPoly, mu: f64, form: FormTag) -> TrigPoly {
    let varphi_xx = varphi.derivative(2);
    let phi = phi_of(varphi);
    let linear = varphi_xx.scaled(mu);
    match form {
        FormTag::A => {
            let half_h_sq = phi.multiply(&phi, None).hilbert().derivative(2).scaled(0.5);
            let transport = phi.multiply(&varphi_xx, None);
            let inner = &half_h_sq + &transport;
            linear.add_scaled(1.0, &inner.derivative(1))
        }
        FormTag::B => {
            let phi_x = phi.derivative(1);
            let comm = commutator_hilbert(&phi, &phi.derivative(2));
            let h_sq = phi_x.multiply(&phi_x, None).hilbert();
            let inner = &comm + &h_sq;
            linear.add_scaled(1.0, &inner.derivative(1))
        }
        FormTag::C => {
            let phi_x = phi.derivative(1);
            let coupling = phi_x.multiply(&varphi_xx, None);
            linear
                .add_scaled(-2.0, &coupling)
                .add_scaled(-1.0, &quadratic_q(varphi))
        }
    }
}

/// Largest absolute nodal value of `f` on a grid fine enough to represent it.
pub fn max_nodal_abs(f: &TrigPoly) -> f64 {
    let size = 2 * (2 * f.max_mode() + 1);
    synthesize(f, size)
        .expect("grid sized from degree")
        .max_abs()
}
