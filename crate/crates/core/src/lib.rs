//! Bound states of the Cornell-modified plus harmonic (CMpH) radial potential
//!
//! ```text
//! V(r) = a r² + b r − c/r − d/r²,   a > 0
//! ```
//!
//! [`aeim`] solves the radial equation exactly with a polynomial ansatz,
//! which ties `c` to the other parameters for each level. [`numerov`] is an
//! independent shooting solver used to check it, and [`qdot`] builds the
//! quantum-dot sweeps on top.
//!
//! All numerical code is generic over the scalar type through [`Real`]; the
//! `*64` aliases at the crate root fix it to `f64`, which is what the command
//! line front end uses.

pub mod aeim;
pub mod error;
pub mod num;
pub mod numerov;
pub mod qdot;
pub mod specfun;
pub mod units;
pub mod wavefunction;

pub use aeim::{
    constrain_b_from_c, constrain_c, energy_closed_form, ground_energy_from_c, solve_level,
    solve_nodes, validate_constraint, AnalyticSolution, AnsatzExponents, Branch, Diagnostics,
    NodeSet,
};
pub use error::{Error, Result};
pub use num::Real;
pub use numerov::{compare, numerov_solve, CompareReport, NumericLevel, ShootingConfig};
pub use qdot::{
    excited_energy_via_b, excited_energy_vs_omega, ground_energy_vs_omega, ground_psi,
    implied_b_ground, level_spacing_pho, run_sweep, write_curves_csv, QDotPreset, Quantity,
    SweepSpec, SweepTable, SweepVariable,
};
pub use specfun::{gamma, integrate, pcf_d, QuadratureSpec};
pub use units::{lprime, PotentialParams, QuantumNumbers, ScaledParams, UnitLabel, UnitSystem};
pub use wavefunction::{
    ode_residual, residual_grid, CheckStatus, NormalizationCheck, NormalizationReport,
    RadialFunction,
};

/// Unit system in double precision.
pub type Units64 = UnitSystem<f64>;
/// Potential parameters in double precision.
pub type Params64 = PotentialParams<f64>;
/// Exact solution in double precision.
pub type Solution64 = AnalyticSolution<f64>;
/// Radial wave function in double precision.
pub type Radial64 = RadialFunction<f64>;
/// Numerov level in double precision.
pub type Level64 = NumericLevel<f64>;
/// Shooting configuration in double precision.
pub type Shooting64 = ShootingConfig<f64>;
/// Quantum-dot preset in double precision.
pub type Preset64 = QDotPreset<f64>;
/// Sweep description in double precision.
pub type Sweep64 = SweepSpec<f64>;

/// Potential parameters in single precision.
pub type Params32 = PotentialParams<f32>;
/// Exact solution in single precision.
pub type Solution32 = AnalyticSolution<f32>;
