//! Truncated Fourier series on the torus `T = R / 2πZ`.
//!
//! A [`TrigPoly`] stores the coefficients `c_k`, `k = 0..=K`, of a real
//! trigonometric polynomial `f(x) = Σ_{|k|≤K} c_k e^{ikx}`. Negative modes are
//! implied by Hermitian symmetry `c_{-k} = conj(c_k)`, so every value of the
//! type represents a real function by construction.
//!
//! Coefficients follow the normalisation `c_k = (1/2π) ∫ f e^{-ikx} dx`, and
//! every physical-space integral in this crate is the normalised mean
//! `(1/2π) ∫_T · dx`. With that convention Parseval reads `∫ f² = Σ |c_k|²`
//! and a pointwise product is a plain (prefactor-free) coefficient
//! convolution.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Relative size of the imaginary residue tolerated by [`synthesize`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error(
        "grid of {samples} samples cannot resolve modes up to {max_mode} (need at least {needed})"
    )]
    ResolutionTooLow {
        samples: usize,
        max_mode: usize,
        needed: usize,
    },
    #[error("synthesised samples carry an imaginary residue of {residue:e}")]
    SymmetryViolation { residue: f64 },
    #[error("non-finite Fourier coefficient at mode {mode}")]
    NonFinite { mode: usize },
    #[error("mode-0 coefficient must be real, got imaginary part {imag:e}")]
    ComplexMean { imag: f64 },
    #[error("maximal mode must be at least 1")]
    EmptySpectrum,
}

/// The Japanese bracket `⟨k⟩ = (1 + k²)^{1/2}`.
#[inline]
pub fn bracket(k: f64) -> f64 {
    (1.0 + k * k).sqrt()
}

/// `⟨k⟩^s`, the symbol of the Bessel potential `⟨∂ₓ⟩^s`.
#[inline]
pub fn bracket_pow(k: f64, s: f64) -> f64 {
    (1.0 + k * k).powf(0.5 * s)
}

/// Real trigonometric polynomial stored by its non-negative Fourier modes.
#[derive(Clone, PartialEq)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrigPoly")
            .field("max_mode", &self.max_mode())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl TrigPoly {
    /// The zero polynomial with modes `-max_mode..=max_mode`.
    ///
    /// Panics if `max_mode == 0`.
    pub fn zeros(max_mode: usize) -> Self {
        assert!(
            max_mode >= 1,
            "TrigPoly needs at least one non-constant mode"
        );
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); max_mode + 1],
        }
    }

    /// Builds a polynomial from the coefficients of modes `0..=K`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() < 2 {
            return Err(SpectralError::EmptySpectrum);
        }
        if let Some(mode) = coeffs
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(SpectralError::NonFinite { mode });
        }
        if coeffs[0].im != 0.0 {
            return Err(SpectralError::ComplexMean { imag: coeffs[0].im });
        }
        Ok(Self { coeffs })
    }

    pub fn constant(value: f64, max_mode: usize) -> Self {
        let mut p = Self::zeros(max_mode);
        p.coeffs[0] = Complex64::new(value, 0.0);
        p
    }

    /// `amplitude · cos(k x)`.
    pub fn cos_mode(k: usize, amplitude: f64, max_mode: usize) -> Self {
        let mut p = Self::zeros(max_mode.max(k).max(1));
        if k == 0 {
            p.coeffs[0] = Complex64::new(amplitude, 0.0);
        } else {
            p.coeffs[k] = Complex64::new(0.5 * amplitude, 0.0);
        }
        p
    }

    /// `amplitude · sin(k x)`, `k ≥ 1`.
    pub fn sin_mode(k: usize, amplitude: f64, max_mode: usize) -> Self {
        assert!(k >= 1, "sin(0·x) vanishes identically");
        let mut p = Self::zeros(max_mode.max(k));
        // sin kx = (e^{ikx} - e^{-ikx}) / 2i
        p.coeffs[k] = Complex64::new(0.0, -0.5 * amplitude);
        p
    }

    #[inline]
    pub fn max_mode(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients of modes `0..=K`.
    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of any mode; zero outside `-K..=K`.
    #[inline]
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            None => Complex64::new(0.0, 0.0),
            Some(c) if k < 0 => c.conj(),
            Some(c) => *c,
        }
    }

    /// Overwrites mode `k ≥ 0` (and implicitly `-k`).
    pub fn set_coeff(&mut self, k: usize, value: Complex64) {
        if k == 0 {
            self.coeffs[0] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[k] = value;
        }
    }

    /// Spatial mean, i.e. `c_0`.
    #[inline]
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[0].re == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Galerkin projection onto `|k| ≤ max_mode`, or zero padding when
    /// `max_mode` exceeds the current degree.
    pub fn resized(&self, max_mode: usize) -> Self {
        assert!(max_mode >= 1);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(max_mode + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    /// Sharp spectral cutoff: modes with `|k| > cutoff` are zeroed, the
    /// degree is kept.
    pub fn lowpass(&self, cutoff: usize) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut().skip(cutoff + 1) {
            *c = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Applies the Fourier multiplier `symbol(k)`; the symbol must satisfy
    /// `symbol(-k) = conj(symbol(k))` for the result to stay real.
    pub fn apply_multiplier<F>(&self, mut symbol: F) -> Self
    where
        F: FnMut(i64) -> Complex64,
    {
        let mut coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * symbol(k as i64))
            .collect();
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    /// `∂ₓ^m f`, multiplier `(ik)^m`.
    pub fn derivative(&self, m: u32) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let mut out = self.apply_multiplier(|k| (i * k as f64).powu(m));
        if m >= 1 {
            out.coeffs[0] = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Periodic Hilbert transform, multiplier `-i·sgn(k)`, so `H[cos] = sin`.
    pub fn hilbert(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(self.coeffs[1..].iter().map(|c| Complex64::new(c.im, -c.re)));
        Self { coeffs }
    }

    /// Bessel potential `⟨∂ₓ⟩^s`, multiplier `⟨k⟩^s`.
    pub fn bessel(&self, s: f64) -> Self {
        self.apply_multiplier(|k| Complex64::new(bracket_pow(k as f64, s), 0.0))
    }

    /// Exact product by coefficient convolution. The result has degree
    /// `K_f + K_g`, or `truncate_to` when given (Galerkin projection).
    pub fn multiply(&self, other: &Self, truncate_to: Option<usize>) -> Self {
        let kf = self.max_mode();
        let kg = other.max_mode();
        let full = kf + kg;
        let out_k = truncate_to.map_or(full, |t| t.max(1));
        let f = self.full_spectrum();
        let g = other.full_spectrum();
        let (kf, kg) = (kf as i64, kg as i64);

        let mut coeffs = vec![Complex64::new(0.0, 0.0); out_k + 1];
        for (k, slot) in coeffs.iter_mut().enumerate().take(full.min(out_k) + 1) {
            let k = k as i64;
            // Σ_ℓ f(k-ℓ) g(ℓ) over -K_g ≤ ℓ ≤ K_g and |k-ℓ| ≤ K_f.
            let lo = (-kg).max(k - kf);
            let hi = kg.min(k + kf);
            let mut acc = Complex64::new(0.0, 0.0);
            for l in lo..=hi {
                acc += f[(k - l + kf) as usize] * g[(l + kg) as usize];
            }
            *slot = acc;
        }
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    /// Coefficients of modes `-K..=K` in order.
    pub fn full_spectrum(&self) -> Vec<Complex64> {
        let k = self.max_mode();
        let mut out = Vec::with_capacity(2 * k + 1);
        out.extend(self.coeffs[1..].iter().rev().map(|c| c.conj()));
        out.extend_from_slice(&self.coeffs);
        out
    }

    /// `(Σ_k ⟨k⟩^{2s} |c_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| (1.0 + (k * k) as f64).powf(s) * c.norm_sqr())
            .sum();
        self.coeffs[0].norm_sqr() + 2.0 * tail
    }

    /// L² norm `‖f‖`.
    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// `Σ_k f̂(k) conj(ĝ(k)) = (1/2π) ∫ f g dx`.
    pub fn inner_l2(&self, other: &Self) -> f64 {
        let tail: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .skip(1)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        self.coeffs[0].re * other.coeffs[0].re + 2.0 * tail
    }

    pub fn project_mean_zero(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// Largest coefficient modulus of `self - other` over all modes.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let k = self.max_mode().max(other.max_mode()) as i64;
        (0..=k)
            .map(|m| (self.coeff(m) - other.coeff(m)).norm())
            .fold(0.0, f64::max)
    }

    /// `self + a·other` with the larger of the two degrees.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        let k = self.max_mode().max(other.max_mode());
        let mut out = self.resized(k);
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * a;
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// Point evaluation by direct summation.
    pub fn eval(&self, x: f64) -> f64 {
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| (c * Complex64::from_polar(1.0, k as f64 * x)).re)
            .sum();
        self.coeffs[0].re + 2.0 * tail
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self.add_scaled(-1.0, rhs)
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        &self + &rhs
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        &self - &rhs
    }
}

impl AddAssign<&TrigPoly> for TrigPoly {
    fn add_assign(&mut self, rhs: &TrigPoly) {
        *self = self.add_scaled(1.0, rhs);
    }
}

impl SubAssign<&TrigPoly> for TrigPoly {
    fn sub_assign(&mut self, rhs: &TrigPoly) {
        *self = self.add_scaled(-1.0, rhs);
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scaled(rhs)
    }
}

impl Mul<f64> for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scaled(rhs)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scaled(-1.0)
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scaled(-1.0)
    }
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    #[serde(rename = "K")]
    max_mode: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TrigPolyRepr {
            max_mode: self.max_mode(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = TrigPolyRepr::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.max_mode + 1 {
            return Err(D::Error::custom(format!(
                "expected {} coefficient pairs for K = {}, found {}",
                repr.max_mode + 1,
                repr.max_mode,
                repr.coeffs.len()
            )));
        }
        let coeffs = repr
            .coeffs
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        TrigPoly::from_coeffs(coeffs).map_err(D::Error::custom)
    }
}

/// Real samples at the equispaced nodes `x_j = 2πj/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub values: Vec<f64>,
}

impl SampleGrid {
    pub fn from_fn<F: Fn(f64) -> f64>(size: usize, f: F) -> Self {
        Self {
            values: (0..size).map(|j| f(node(j, size))).collect(),
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn node(&self, j: usize) -> f64 {
        node(j, self.size())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
fn node(j: usize, size: usize) -> f64 {
    2.0 * PI * j as f64 / size as f64
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let plan = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Discrete Fourier coefficients of real samples, modes `0..=max_mode`.
pub fn analyze(samples: &SampleGrid, max_mode: usize) -> Result<TrigPoly, SpectralError> {
    let m = samples.size();
    let needed = 2 * max_mode + 1;
    if m < needed {
        return Err(SpectralError::ResolutionTooLow {
            samples: m,
            max_mode,
            needed,
        });
    }
    if max_mode == 0 {
        return Err(SpectralError::EmptySpectrum);
    }
    let mut buf: Vec<Complex64> = samples
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / m as f64;
    let mut coeffs: Vec<Complex64> = buf[..=max_mode].iter().map(|c| c * scale).collect();
    coeffs[0].im = 0.0;
    TrigPoly::from_coeffs(coeffs)
}

/// Values of `f` on `size` equispaced nodes.
pub fn synthesize(f: &TrigPoly, size: usize) -> Result<SampleGrid, SpectralError> {
    let k = f.max_mode();
    let needed = 2 * k + 1;
    if size < needed {
        return Err(SpectralError::ResolutionTooLow {
            samples: size,
            max_mode: k,
            needed,
        });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (mode, c) in f.coeffs.iter().enumerate() {
        buf[mode] = *c;
        if mode > 0 {
            buf[size - mode] = c.conj();
        }
    }
    fft_in_place(&mut buf, true);
    let scale = buf.iter().fold(1.0_f64, |m, c| m.max(c.re.abs()));
    let residue = buf.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    if residue > SYMMETRY_TOLERANCE * scale {
        return Err(SpectralError::SymmetryViolation { residue });
    }
    Ok(SampleGrid {
        values: buf.into_iter().map(|c| c.re).collect(),
    })
}

/// Seeded random mean-zero polynomial with `c_k = amplitude·⟨k⟩^{-s-1}·u_k`,
/// `u_k` having independent uniform(-1, 1) real and imaginary parts.
pub fn random_trig(seed: u64, max_mode: usize, decay: f64, amplitude: f64) -> TrigPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = TrigPoly::zeros(max_mode);
    for k in 1..=max_mode {
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        let weight = amplitude * bracket_pow(k as f64, -decay - 1.0);
        p.coeffs[k] = Complex64::new(re, im) * weight;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-14;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn analyze_cosine_and_constant() {
        let grid = SampleGrid::from_fn(8, f64::cos);
        let f = analyze(&grid, 2).unwrap();
        assert!((f.coeff(1) - Complex64::new(0.5, 0.0)).norm() < TOL);
        assert!((f.coeff(-1) - Complex64::new(0.5, 0.0)).norm() < TOL);
        assert!(f.coeff(0).norm() < TOL && f.coeff(2).norm() < TOL);

        let one = analyze(&SampleGrid::from_fn(8, |_| 1.0), 2).unwrap();
        assert!(close(one.mean(), 1.0, TOL));
        assert!(one.coeff(1).norm() < TOL && one.coeff(2).norm() < TOL);
    }

    #[test]
    fn analyze_rejects_coarse_grid() {
        let grid = SampleGrid::from_fn(4, f64::cos);
        assert_eq!(
            analyze(&grid, 2),
            Err(SpectralError::ResolutionTooLow {
                samples: 4,
                max_mode: 2,
                needed: 5
            })
        );
    }

    #[test]
    fn synthesize_quarter_nodes() {
        let g = synthesize(&TrigPoly::cos_mode(1, 1.0, 1), 4).unwrap();
        let expected = [1.0, 0.0, -1.0, 0.0];
        for (v, e) in g.values.iter().zip(expected) {
            assert!((v - e).abs() < TOL);
        }
        let zero = synthesize(&TrigPoly::zeros(3), 16).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));

        let mut s = TrigPoly::zeros(1);
        s.set_coeff(1, Complex64::new(1.0, 0.0) / Complex64::new(0.0, 2.0));
        let g = synthesize(&s, 12).unwrap();
        for (j, v) in g.values.iter().enumerate() {
            assert!((v - g.node(j).sin()).abs() < TOL);
        }
        assert!(synthesize(&s, 2).is_err());
    }

    #[test]
    fn round_trip() {
        let f = random_trig(7, 16, 0.5, 1.0).add_scaled(1.0, &TrigPoly::constant(0.3, 16));
        let back = analyze(&synthesize(&f, 64).unwrap(), 16).unwrap();
        assert!(back.max_coeff_diff(&f) <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn derivative_examples() {
        let d = TrigPoly::cos_mode(1, 1.0, 2).derivative(1);
        assert!(d.max_coeff_diff(&TrigPoly::sin_mode(1, -1.0, 2)) < TOL);
        let d2 = TrigPoly::sin_mode(2, 1.0, 2).derivative(2);
        assert!(d2.max_coeff_diff(&TrigPoly::sin_mode(2, -4.0, 2)) < TOL);
        assert!(TrigPoly::constant(1.0, 1).derivative(1).is_zero());
    }

    #[test]
    fn hilbert_examples() {
        for k in 1..5 {
            let h = TrigPoly::cos_mode(k, 1.0, 5).hilbert();
            assert!(h.max_coeff_diff(&TrigPoly::sin_mode(k, 1.0, 5)) < TOL);
            let h = TrigPoly::sin_mode(k, 1.0, 5).hilbert();
            assert!(h.max_coeff_diff(&TrigPoly::cos_mode(k, -1.0, 5)) < TOL);
        }
        assert!(TrigPoly::constant(1.0, 2).hilbert().is_zero());
    }

    #[test]
    fn bessel_examples() {
        let b = TrigPoly::cos_mode(1, 1.0, 1).bessel(2.0);
        assert!(b.max_coeff_diff(&TrigPoly::cos_mode(1, 2.0, 1)) < TOL);
        let c = TrigPoly::constant(1.0, 3).bessel(-4.2);
        assert!(c.max_coeff_diff(&TrigPoly::constant(1.0, 3)) < TOL);
        let f = random_trig(3, 32, 0.0, 1.0);
        let back = f.bessel(1.5).bessel(-1.5);
        assert!(back.max_coeff_diff(&f) <= 1e-13 * f.l2_norm());
    }

    #[test]
    fn multiply_examples() {
        let c = TrigPoly::cos_mode(1, 1.0, 1);
        let s = TrigPoly::sin_mode(1, 1.0, 1);
        let cc = c.multiply(&c, None);
        assert_eq!(cc.max_mode(), 2);
        let expected = TrigPoly::constant(0.5, 2).add_scaled(1.0, &TrigPoly::cos_mode(2, 0.5, 2));
        assert!(cc.max_coeff_diff(&expected) < TOL);
        assert!(c.multiply(&TrigPoly::zeros(3), None).is_zero());
        let sc = s.multiply(&c, None);
        assert!(sc.max_coeff_diff(&TrigPoly::sin_mode(2, 0.5, 2)) < TOL);
        let truncated = c.multiply(&c, Some(1));
        assert_eq!(truncated.max_mode(), 1);
        assert!(close(truncated.mean(), 0.5, TOL) && truncated.coeff(1).norm() < TOL);
    }

    #[test]
    fn norm_examples() {
        let s = TrigPoly::sin_mode(1, 1.0, 1);
        let c = TrigPoly::cos_mode(1, 1.0, 1);
        assert!(close(s.sobolev_norm_sq(0.0), 0.5, TOL));
        assert!(close(c.sobolev_norm_sq(1.0), 1.0, TOL));
        assert!(close(s.sobolev_norm_sq(2.0), 2.0, TOL));
    }

    #[test]
    fn inner_product_examples() {
        let c = TrigPoly::cos_mode(1, 1.0, 2);
        let s = TrigPoly::sin_mode(1, 1.0, 2);
        assert!(close(c.inner_l2(&c), 0.5, TOL));
        assert!(c.inner_l2(&s).abs() < TOL);
        assert!(
            TrigPoly::constant(1.0, 2)
                .inner_l2(&TrigPoly::cos_mode(2, 1.0, 2))
                .abs()
                < TOL
        );
    }

    #[test]
    fn mean_projection() {
        let f = TrigPoly::constant(1.0, 1).add_scaled(1.0, &TrigPoly::cos_mode(1, 1.0, 1));
        assert_eq!(f.project_mean_zero(), TrigPoly::cos_mode(1, 1.0, 1));
        let g = random_trig(1, 4, 1.0, 1.0);
        assert_eq!(g.project_mean_zero(), g);
        assert!(TrigPoly::constant(5.0, 1).project_mean_zero().is_zero());
    }

    #[test]
    fn random_trig_is_deterministic_and_bounded() {
        assert_eq!(random_trig(42, 8, 1.0, 1.0), random_trig(42, 8, 1.0, 1.0));
        assert_ne!(random_trig(42, 8, 1.0, 1.0), random_trig(43, 8, 1.0, 1.0));
        assert!(random_trig(5, 8, 1.0, 0.0).is_zero());
        assert!(random_trig(5, 8, 1.0, 1.0).is_mean_zero());
        // ‖f‖²_{H³} ≤ 2·2·Σ ⟨k⟩^{6-8} < 4·Σ 1/(1+k²) < 4·(π/2) for every K.
        let bound = 4.0 * (PI / 2.0);
        for k in [8, 64, 512] {
            assert!(random_trig(11, k, 3.0, 1.0).sobolev_norm_sq(3.0) < bound);
        }
    }

    #[test]
    fn json_layout() {
        let f = TrigPoly::cos_mode(1, 2.0, 2);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"K":2,"coeffs":[[0.0,0.0],[1.0,0.0],[0.0,0.0]]}"#);
        let back: TrigPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<TrigPoly>(r#"{"K":2,"coeffs":[[0.0,0.0]]}"#).is_err());
        assert!(
            serde_json::from_str::<TrigPoly>(r#"{"K":1,"coeffs":[[0.0,1.0],[0.0,0.0]]}"#).is_err()
        );
    }
}
