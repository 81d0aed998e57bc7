//! Config-driven marches with diagnostics and checkpoint output, and the
//! exact-flow validation suite.

use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::field::RealVectorField;
use crate::flows::{abc_flow, exact_decay_solution, taylor_green, FlowKind};
use crate::io::{read_checkpoint, read_diagnostics, write_checkpoint, write_diagnostics, RunConfig};
use crate::nonlinear::DIVERGENCE_TOLERANCE;
use crate::operators::PhysicalParams;
use crate::timestepper::{march_with, window_count, MarchOptions, Trajectory};

/// Result of a config-driven march.
#[derive(Clone, Debug)]
pub struct RunSummary {
    /// Windows completed by this invocation.
    pub windows: usize,
    /// Window index the march started from (0 for a fresh run).
    pub start_window: usize,
    pub final_t: f64,
    pub final_record: Option<DiagnosticsRecord>,
    pub diagnostics_path: PathBuf,
    pub checkpoints: Vec<PathBuf>,
}

fn march_to_disk(
    config: &RunConfig,
    u_start: &RealVectorField,
    start_window: usize,
    mut rows: Vec<DiagnosticsRecord>,
) -> Result<(RunSummary, Trajectory)> {
    let out = &config.output;
    let diagnostics_path = out.diagnostics_path();
    let hash = config.hash();
    let (nu, epsilon) = (config.physics.nu, config.mollifier.epsilon);
    let mut checkpoints = Vec::new();
    let result = march_with(
        u_start,
        start_window,
        config.horizon,
        &config.window,
        &config.physics,
        &config.mollifier,
        MarchOptions::default(),
        |o| {
            rows.push(*o.record);
            if out.checkpoint_every > 0 && o.window % out.checkpoint_every == 0 {
                let path = out.checkpoint_path(o.window);
                write_checkpoint(o.state, o.t, nu, epsilon, hash, &path)?;
                write_diagnostics(&rows, &diagnostics_path)?;
                checkpoints.push(path);
            }
            Ok(())
        },
    );
    // Completed windows are kept on disk even when a later one fails.
    write_diagnostics(&rows, &diagnostics_path)?;
    let trajectory = result?;
    let summary = RunSummary {
        windows: trajectory.records.len(),
        start_window,
        final_t: trajectory.records.last().map_or(trajectory.initial.t, |r| r.t),
        final_record: trajectory.records.last().copied(),
        diagnostics_path,
        checkpoints,
    };
    Ok((summary, trajectory))
}

/// Builds the configured initial flow and marches it to the horizon,
/// writing diagnostics and checkpoints under `config.output.directory`.
pub fn run_config(config: &RunConfig) -> Result<(RunSummary, Trajectory)> {
    config.validate()?;
    let grid = config.build_grid()?;
    let u0 = config.flow.build(&grid)?;
    march_to_disk(config, &u0, 0, Vec::new())
}

/// Continues a run from `checkpoint`. Diagnostics rows up to the checkpoint
/// window are kept from the existing file and the rest are appended, so the
/// final file matches an uninterrupted run.
pub fn resume_config(config: &RunConfig, checkpoint: &Path) -> Result<(RunSummary, Trajectory)> {
    config.validate()?;
    let ck = read_checkpoint(checkpoint)?;
    let expected = config.hash();
    if ck.config_hash != expected {
        return Err(Error::Config(vec![format!(
            "checkpoint: config_hash {:#018x} does not match the configuration ({expected:#018x})",
            ck.config_hash
        )]));
    }
    let dt = config.window.delta_t;
    let window = (ck.t / dt).round() as usize;
    if (window as f64 * dt - ck.t).abs() > 1e-9 * dt {
        return Err(Error::CheckpointLayout(format!(
            "checkpoint time {} is not a multiple of window.delta_t = {dt}",
            ck.t
        )));
    }
    if window >= window_count(config.horizon, dt) {
        return Err(Error::InvalidTime(format!(
            "checkpoint at t = {} is already at the horizon {}",
            ck.t, config.horizon
        )));
    }
    let path = config.output.diagnostics_path();
    let mut rows = if path.exists() {
        read_diagnostics(&path)?
    } else {
        Vec::new()
    };
    rows.truncate(window);
    march_to_disk(config, &ck.field, window, rows)
}

/// One line of the exact-flow validation table.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub name: String,
    pub nu: f64,
    pub windows: usize,
    /// Largest sup error against the exact solution over all windows.
    pub max_sup_error: f64,
    /// Largest max|div u| over all emitted states.
    pub max_divergence: f64,
    pub passed: bool,
}

/// Marches Taylor–Green, ABC and the inviscid ABC steady state with the
/// configured grid, mollifier and window settings and compares every window
/// with the exact solution.
pub fn validation_suite(config: &RunConfig) -> Result<Vec<ValidationRow>> {
    config.validate()?;
    let grid = config.build_grid()?;
    let nu = config.physics.nu;
    let cases = [
        ("taylor_green", FlowKind::TaylorGreen, taylor_green(&grid, 1.0), nu),
        ("abc", FlowKind::Abc, abc_flow(&grid, 1.0, 1.0, 1.0), nu),
        ("abc_inviscid", FlowKind::Abc, abc_flow(&grid, 1.0, 1.0, 1.0), 0.0),
    ];
    let tolerance = config.validate.tolerance;
    let mut rows = Vec::new();
    for (name, kind, u0, case_nu) in cases {
        let params = PhysicalParams::new(case_nu)?;
        let mut max_err: f64 = 0.0;
        let mut max_div: f64 = 0.0;
        let traj = march_with(
            &u0,
            0,
            config.horizon,
            &config.window,
            &params,
            &config.mollifier,
            MarchOptions::default(),
            |o| {
                let exact = exact_decay_solution(kind, &u0, o.t, case_nu)?;
                max_err = max_err.max((o.state - &exact).sup_norm());
                max_div = max_div.max(o.record.max_divergence);
                Ok(())
            },
        )?;
        rows.push(ValidationRow {
            name: name.to_string(),
            nu: case_nu,
            windows: traj.records.len(),
            max_sup_error: max_err,
            max_divergence: max_div,
            passed: max_err <= tolerance && max_div <= DIVERGENCE_TOLERANCE,
        });
    }
    Ok(rows)
}
