use super::window::WindowSolver;
use super::{PicardTrace, Trajectory, WindowConfig};
use crate::diagnostics::{diagnose, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::field::RealVectorField;
use crate::operators::{MollifierParams, PhysicalParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MarchOptions {
    /// Retain every k-th window state in the trajectory (0 keeps none).
    pub keep_every: usize,
}

/// What the observer sees after each completed window.
pub struct WindowOutcome<'a> {
    /// 1-based index of the completed window.
    pub window: usize,
    pub t: f64,
    pub state: &'a RealVectorField,
    pub record: &'a DiagnosticsRecord,
    pub trace: &'a PicardTrace,
}

/// Number of windows needed to cover `horizon`, ⌈T/δt⌉ with a small
/// allowance for representation error in the ratio.
pub fn window_count(horizon: f64, delta_t: f64) -> usize {
    let ratio = horizon / delta_t;
    (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as usize
}

/// Marches `u0` over ⌈T/δt⌉ windows of length δt.
pub fn march(
    u0: &RealVectorField,
    horizon: f64,
    cfg: &WindowConfig,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<Trajectory> {
    march_with(u0, 0, horizon, cfg, params, eps, MarchOptions::default(), |_| Ok(()))
}

/// Marches from window index `start_window` (the state `u_start` sits at
/// t = start_window·δt) up to the horizon, calling `observer` after each
/// window. Window times are computed as k·δt, never accumulated, so a
/// resumed march reproduces the original one bitwise.
#[allow(clippy::too_many_arguments)]
pub fn march_with<F>(
    u_start: &RealVectorField,
    start_window: usize,
    horizon: f64,
    cfg: &WindowConfig,
    params: &PhysicalParams,
    eps: &MollifierParams,
    options: MarchOptions,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&WindowOutcome<'_>) -> Result<()>,
{
    cfg.validate()?;
    if !(horizon.is_finite() && horizon >= cfg.delta_t * (1.0 - 1e-12)) {
        return Err(Error::InvalidTime(format!(
            "horizon {horizon} must be at least delta_t = {}",
            cfg.delta_t
        )));
    }
    let total = window_count(horizon, cfg.delta_t);
    let solver = WindowSolver::new(u_start.grid(), cfg, params, eps)?;
    let initial = diagnose(u_start, start_window as f64 * cfg.delta_t, 0, 0.0);
    let mut records = Vec::with_capacity(total.saturating_sub(start_window));
    let mut states = Vec::new();
    let mut u = u_start.clone();
    for k in start_window..total {
        let window = k + 1;
        let (next, trace) = solver.solve(&u).map_err(|e| match e {
            Error::NonConvergence {
                iterations,
                residual,
                contraction,
                ..
            } => Error::NonConvergence {
                window,
                iterations,
                residual,
                contraction,
            },
            other => other,
        })?;
        let t = window as f64 * cfg.delta_t;
        let record = diagnose(&next, t, trace.iterations() as u32, trace.final_residual());
        observer(&WindowOutcome {
            window,
            t,
            state: &next,
            record: &record,
            trace: &trace,
        })?;
        if options.keep_every > 0 && window % options.keep_every == 0 {
            states.push((t, next.clone()));
        }
        records.push(record);
        u = next;
    }
    Ok(Trajectory {
        initial,
        records,
        final_state: u,
        states,
    })
}
