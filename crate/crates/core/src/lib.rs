//! Pseudo-spectral workbench for the quadratically nonlinear, nonlocal
//! amplitude equation of 2D current-vortex sheets on the periodic line,
//!
//! ```text
//! φ_tt − μ φ_xx = ( ½ H[ϕ²]_xx + ϕ φ_xx )_x ,   ϕ = H[φ],
//! ```
//!
//! together with its linearised variable-coefficient problem, exact energy
//! identities, randomized checks of the inequalities behind the
//! well-posedness theory, and experiment drivers for continuous dependence
//! on the initial data.
//!
//! Module map:
//! - [`spectral`]: truncated Fourier series, multipliers, exact products, norms.
//! - [`operators`]: Hilbert-based nonlinear operators, the three equivalent
//!   accelerations, hyperbolicity margin, commutators.
//! - [`evolution`]: RK4 method-of-lines solvers, energies, identity residuals.
//! - [`lab`]: LHS/RHS ratio sampling and campaign statistics.
//! - [`harness`]: experiment drivers, configuration format, output schemas.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evolution;
pub mod harness;
pub mod lab;
pub mod operators;
pub mod spectral;

pub use evolution::{SolverConfig, State, Trajectory};

pub use operators::FormTag;
pub use spectral::{analyze, random_trig, synthesize, SampleGrid, TrigPoly};
