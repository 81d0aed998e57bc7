//! Pseudo-spectral solver for the incompressible Navier–Stokes equations on
//! a periodic box, built around a mollified integral formulation
//!
//! ```text
//! u = −S[(u·∇)u] + E u + B u⁰
//! ```
//!
//! marched over short windows by fixed-point iteration. Alongside the solver
//! the crate ships probes that measure the operator multipliers and monitor
//! the sup-norm and energy estimates along a trajectory.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod flows;
pub mod grid;
pub mod io;
pub mod nonlinear;
pub mod operators;
pub mod runner;
pub mod timestepper;

pub use diagnostics::{diagnose, DiagnosticsRecord};
pub use error::{Error, Result};
pub use field::{
    fft_forward, fft_inverse, l2_norm, spectral_derivative, spectral_l2_norm, sup_norm, RealVectorField, ScalarField,
    SpectralVectorField,
};
pub use flows::{abc_flow, exact_decay_solution, random_schwartz_field, taylor_green, FlowKind, FlowSpec};
pub use grid::{make_grid, Grid};
pub use io::{load_config, read_checkpoint, read_diagnostics, write_checkpoint, write_diagnostics, RunConfig};
pub use nonlinear::{
    convective_spectral, convective_term, curl, dealias, divergence, max_abs_divergence, pressure_gradient,
    DealiasPolicy,
};
pub use operators::{
    apply_b, apply_e, apply_s_frozen, apply_s_quadrature, leray_kernel, leray_project, mollifier_value,
    probe_operator_norm, MollifierParams, MultiplierReport, OperatorId, PhysicalParams, ProbeSpec,
};
pub use timestepper::{
    approx_step, apriori_monitor, fit_q_ansatz, march, oracle_integrate, picard_window, AprioriReport, OracleConfig,
    PicardTrace, QFit, SolveMode, Trajectory, WindowConfig,
};
