//! Windowed march of the mollified integral equation.
//!
//! On each window [0, δt] the velocity solves
//!
//! ```text
//! u(τ) = −S_τ[(u·∇)u] + E[u(τ)] + B_τ[u_start]
//! ```
//!
//! and is found by successive substitution over `substeps` τ-nodes. The
//! converged end state seeds the next window.

mod approx;
mod march;
mod monitor;
mod oracle;
mod window;

use serde::{Deserialize, Serialize};

pub use approx::{approx_step, fit_q_ansatz, q_residual_fields, QFit, QResidualFields, Q_SEARCH_MAX};
pub use march::{march, march_with, window_count, MarchOptions, WindowOutcome};
pub use monitor::{apriori_monitor, apriori_monitor_with, AprioriReport, WindowCheck, DEFAULT_SLACK};
pub use oracle::{oracle_integrate, OracleConfig, ORACLE_CFL_LIMIT};
pub use window::{picard_window, probe_contraction, WindowSolver};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::field::RealVectorField;
use crate::nonlinear::DealiasPolicy;

/// Smallest admissible window length.
pub const MIN_DELTA_T: f64 = 1e-6;

/// Modes whose mollifier falls below this value are never divided by it.
pub const MOLLIFIER_GUARD: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Iterate the integral map verbatim, E channel included.
    PaperLiteral,
    /// Eliminate the E channel per mode and iterate only on the nonlinearity.
    #[default]
    ModeSolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub delta_t: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    /// Duhamel quadrature nodes per window, endpoints included.
    pub substeps: usize,
    pub mode: SolveMode,
    pub dealias: DealiasPolicy,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            delta_t: 1e-2,
            picard_tol: 1e-10,
            picard_max_iters: 50,
            substeps: 3,
            mode: SolveMode::ModeSolved,
            dealias: DealiasPolicy::TwoThirds,
        }
    }
}

impl WindowConfig {
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.delta_t.is_finite() && self.delta_t > 0.0) {
            out.push(format!("{prefix}.delta_t: must be > 0 (got {})", self.delta_t));
        } else if self.delta_t < MIN_DELTA_T {
            out.push(format!(
                "{prefix}.delta_t: must be at least {MIN_DELTA_T:e} (got {})",
                self.delta_t
            ));
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            out.push(format!("{prefix}.picard_tol: must be > 0 (got {})", self.picard_tol));
        }
        if self.picard_max_iters < 1 {
            out.push(format!("{prefix}.picard_max_iters: must be >= 1"));
        }
        if self.substeps < 2 {
            out.push(format!("{prefix}.substeps: must be >= 2 (got {})", self.substeps));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations("window");
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// Residual history of one window solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PicardTrace {
    /// max over τ-nodes of ‖u^{m+1} − u^m‖₀, one entry per iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Last ratio of consecutive residuals above the rounding floor.
    pub contraction: Option<f64>,
}

impl PicardTrace {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// Diagnostics of a march plus optional stored states.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Diagnostics of the starting state.
    pub initial: DiagnosticsRecord,
    /// One record per completed window (or oracle step).
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: RealVectorField,
    /// States retained per [`MarchOptions::keep_every`].
    pub states: Vec<(f64, RealVectorField)>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}
