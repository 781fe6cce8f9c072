use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::evolution::SolverConfig;
use crate::operators::FormTag;
use crate::spectral::{random_trig, TrigPoly};

use super::HarnessError;

/// Shape of the base initial datum `φ⁽⁰⁾`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseProfile {
    /// `amplitude·cos(mode·x)`.
    Cosine,
    /// `amplitude·Σ_{k≥1} ratio^{k−1} cos kx`.
    Geometric,
    /// `random_trig(seed, K, decay, amplitude)`.
    Random,
    Zero,
}

/// Base data `(φ⁽⁰⁾, φ⁽¹⁾)`; `φ⁽¹⁾ = velocity_amplitude·sin(mode·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseData {
    pub profile: BaseProfile,
    pub amplitude: f64,
    pub mode: usize,
    pub ratio: f64,
    pub decay: f64,
    pub seed: u64,
    pub velocity_amplitude: f64,
}

impl BaseData {
    pub fn build(&self, max_mode: usize) -> (TrigPoly, TrigPoly) {
        let k = max_mode;
        let varphi0 = match self.profile {
            BaseProfile::Cosine => TrigPoly::cos_mode(self.mode.min(k), self.amplitude, k),
            BaseProfile::Geometric => (1..=k).fold(TrigPoly::zeros(k), |acc, j| {
                acc.add_scaled(
                    1.0,
                    &TrigPoly::cos_mode(j, self.amplitude * self.ratio.powi(j as i32 - 1), k),
                )
            }),
            BaseProfile::Random => random_trig(self.seed, k, self.decay, self.amplitude),
            BaseProfile::Zero => TrigPoly::zeros(k),
        };
        let varphi1 = TrigPoly::sin_mode(self.mode.min(k), self.velocity_amplitude, k);
        (varphi0, varphi1)
    }
}

/// Perturbed data `φ⁽⁰⁾_n = φ⁽⁰⁾ + a_n⟨∂ₓ⟩^{−σ}cos(k_n x)` with
/// `a_n = amplitude/n` and `k_n = min(n, mode_cap)`; `φ⁽¹⁾_n = φ⁽¹⁾`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
    /// Defaults to `K/2`.
    pub mode_cap: Option<usize>,
    /// Defaults to `s`, which makes the perturbation exactly `H^s`-sized.
    pub smoothing: Option<f64>,
}

impl Perturbation {
    pub fn mode(&self, n: usize, max_mode: usize) -> usize {
        n.min(self.mode_cap.unwrap_or(max_mode / 2)).max(1)
    }

    pub fn amplitude(&self, n: usize) -> f64 {
        self.amplitude / n as f64
    }

    pub fn term(&self, n: usize, max_mode: usize, s: f64) -> TrigPoly {
        let k = self.mode(n, max_mode);
        TrigPoly::cos_mode(k, self.amplitude(n), max_mode).bessel(-self.smoothing.unwrap_or(s))
    }
}

/// Parameters of the frozen-background instability probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllposedSpec {
    pub amplitude: f64,
    pub k_list: Vec<usize>,
    pub t_short: f64,
}

/// Everything an experiment needs, parsed from a sectioned `key = value` file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub solver: SolverConfig,
    pub radius: f64,
    /// Monitored only.
    pub c2: f64,
    pub base: BaseData,
    pub perturbation: Perturbation,
    pub n_list: Vec<usize>,
    pub epsilon_list: Vec<f64>,
    pub k_levels: Vec<usize>,
    pub illposed: IllposedSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn s(&self) -> f64 {
        self.solver.sobolev_index
    }

    pub fn base_data(&self) -> (TrigPoly, TrigPoly) {
        self.base.build(self.solver.max_mode)
    }

    pub fn perturbed_data(&self, n: usize) -> (TrigPoly, TrigPoly) {
        let (u, v) = self.base_data();
        let term = self.perturbation.term(n, self.solver.max_mode, self.s());
        (&u + &term, v)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.solver
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.s() >= 3.0) {
            return bad(format!("s must be at least 3, got {}", self.s()));
        }
        if self.n_list.is_empty()
            || self.n_list[0] == 0
            || self.n_list.windows(2).any(|w| w[1] <= w[0])
        {
            return bad(format!(
                "n_list must be positive and strictly increasing, got {:?}",
                self.n_list
            ));
        }
        if self
            .epsilon_list
            .iter()
            .any(|e| !(*e > 0.0 && e.is_finite()))
        {
            return bad(format!(
                "epsilon_list entries must be positive, got {:?}",
                self.epsilon_list
            ));
        }
        if self.k_levels.windows(2).any(|w| w[1] <= w[0]) || self.k_levels.first() == Some(&0) {
            return bad(format!(
                "k_levels must be positive and increasing, got {:?}",
                self.k_levels
            ));
        }
        if self.base.profile == BaseProfile::Geometric
            && !(self.base.ratio > 0.0 && self.base.ratio < 1.0)
        {
            return bad(format!(
                "base_ratio must lie in (0, 1), got {}",
                self.base.ratio
            ));
        }
        if !(self.illposed.t_short > 0.0) {
            return bad(format!(
                "t_short must be positive, got {}",
                self.illposed.t_short
            ));
        }
        Ok(())
    }

    /// Parses the text format; see [`ExperimentConfig::template`] for all keys.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let file: FileConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let cfg = file.into_config();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// A commented file listing every key with its default.
    pub fn template() -> &'static str {
        TEMPLATE
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        FileConfig::default().into_config()
    }
}

const TEMPLATE: &str = r#"# Every key is optional; the values shown are the defaults.

[problem]
mu = 1.0
delta = 0.1
s = 3.0
R = 1.0                      # smallness radius of the data
C1 = 1.0                     # T0 = C1 / (|phi0_x|^2_H2 + |phi1|^2_H2)^(1/2)
C2 = 1.0                     # monitored only
T = 1.0                      # horizon, capped at 0.5*T0 over all runs
base_profile = "cosine"      # cosine | geometric | random | zero
base_amplitude = 0.01
base_mode = 1
base_ratio = 0.5             # geometric profile
base_decay = 3.0             # random profile
base_seed = 0
velocity_amplitude = 0.0     # phi1 = velocity_amplitude * sin(base_mode x)

[numerics]
K = 32
cfl = 0.5
# dt = 0.01                  # uniform step; CFL rule when absent
form = "C"                   # A | B | C
save_stride = 1
oversample = 4

[experiment]
n_list = [2, 4, 8, 16]
epsilon_list = [0.1, 0.01, 0.001]
perturbation_amplitude = 1.0 # a_n = perturbation_amplitude / n
# perturbation_mode_cap = 16 # k_n = min(n, cap); K/2 when absent
# smoothing = 3.0            # defaults to s
k_levels = [8, 16, 32, 64]
illposed_amplitude = 1.0
illposed_k = [8, 16, 32]
t_short = 0.4
seed = 0
output_dir = "out"
"#;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ProblemSection {
    mu: f64,
    delta: f64,
    s: f64,
    #[serde(rename = "R")]
    radius: f64,
    #[serde(rename = "C1")]
    c1: f64,
    #[serde(rename = "C2")]
    c2: f64,
    #[serde(rename = "T")]
    horizon: f64,
    base_profile: BaseProfile,
    base_amplitude: f64,
    base_mode: usize,
    base_ratio: f64,
    base_decay: f64,
    base_seed: u64,
    velocity_amplitude: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            mu: 1.0,
            delta: 0.1,
            s: 3.0,
            radius: 1.0,
            c1: 1.0,
            c2: 1.0,
            horizon: 1.0,
            base_profile: BaseProfile::Cosine,
            base_amplitude: 0.01,
            base_mode: 1,
            base_ratio: 0.5,
            base_decay: 3.0,
            base_seed: 0,
            velocity_amplitude: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NumericsSection {
    #[serde(rename = "K")]
    max_mode: usize,
    cfl: f64,
    dt: Option<f64>,
    form: FormTag,
    save_stride: usize,
    oversample: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            max_mode: d.max_mode,
            cfl: d.cfl,
            dt: None,
            form: d.form,
            save_stride: d.save_stride,
            oversample: d.oversample,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ExperimentSection {
    n_list: Vec<usize>,
    epsilon_list: Vec<f64>,
    perturbation_amplitude: f64,
    perturbation_mode_cap: Option<usize>,
    smoothing: Option<f64>,
    k_levels: Vec<usize>,
    illposed_amplitude: f64,
    illposed_k: Vec<usize>,
    t_short: f64,
    seed: u64,
    output_dir: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            n_list: vec![2, 4, 8, 16],
            epsilon_list: vec![0.1, 0.01, 0.001],
            perturbation_amplitude: 1.0,
            perturbation_mode_cap: None,
            smoothing: None,
            k_levels: vec![8, 16, 32, 64],
            illposed_amplitude: 1.0,
            illposed_k: vec![8, 16, 32],
            t_short: 0.4,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    problem: ProblemSection,
    numerics: NumericsSection,
    experiment: ExperimentSection,
}

impl FileConfig {
    fn into_config(self) -> ExperimentConfig {
        let FileConfig {
            problem: p,
            numerics: n,
            experiment: e,
        } = self;
        ExperimentConfig {
            solver: SolverConfig {
                mu: p.mu,
                delta: p.delta,
                max_mode: n.max_mode,
                cfl: n.cfl,
                fixed_dt: n.dt,
                form: n.form,
                horizon: p.horizon,
                save_stride: n.save_stride,
                c1: p.c1,
                sobolev_index: p.s,
                oversample: n.oversample,
            },
            radius: p.radius,
            c2: p.c2,
            base: BaseData {
                profile: p.base_profile,
                amplitude: p.base_amplitude,
                mode: p.base_mode,
                ratio: p.base_ratio,
                decay: p.base_decay,
                seed: p.base_seed,
                velocity_amplitude: p.velocity_amplitude,
            },
            perturbation: Perturbation {
                amplitude: e.perturbation_amplitude,
                mode_cap: e.perturbation_mode_cap,
                smoothing: e.smoothing,
            },
            n_list: e.n_list,
            epsilon_list: e.epsilon_list,
            k_levels: e.k_levels,
            illposed: IllposedSpec {
                amplitude: e.illposed_amplitude,
                k_list: e.illposed_k,
                t_short: e.t_short,
            },
            seed: e.seed,
            output_dir: e.output_dir,
        }
    }
}
