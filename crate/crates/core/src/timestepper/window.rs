use super::{PicardTrace, SolveMode, WindowConfig, MOLLIFIER_GUARD};
use crate::error::{Error, Result};
use crate::field::{fft_forward, fft_inverse, synthesize_unchecked, RealVectorField, SpectralVectorField};
use crate::flows::random_schwartz_field;
use crate::grid::Grid;
use crate::nonlinear::{convective_spectral, divergence_spectral, DIVERGENCE_TOLERANCE};
use crate::operators::{apply_b, apply_e, duhamel_cumulative, mollifier_value, MollifierParams, PhysicalParams};

/// Reusable solver for windows of fixed length on one grid.
pub struct WindowSolver {
    grid: Grid,
    cfg: WindowConfig,
    params: PhysicalParams,
    eps: MollifierParams,
    nodes: Vec<f64>,
    mollifier: Vec<f64>,
}

/// Converged τ-history of one window.
pub(crate) struct WindowState {
    pub history: Vec<SpectralVectorField>,
    pub start_forcing: SpectralVectorField,
    pub trace: PicardTrace,
}

impl WindowSolver {
    pub fn new(grid: &Grid, cfg: &WindowConfig, params: &PhysicalParams, eps: &MollifierParams) -> Result<Self> {
        cfg.validate()?;
        let s = cfg.substeps;
        let nodes = (0..s)
            .map(|j| if j + 1 == s { cfg.delta_t } else { cfg.delta_t * j as f64 / (s - 1) as f64 })
            .collect();
        let mollifier = (0..grid.points())
            .map(|idx| mollifier_value(grid.wavevector(idx), eps))
            .collect();
        Ok(WindowSolver {
            grid: grid.clone(),
            cfg: *cfg,
            params: *params,
            eps: *eps,
            nodes,
            mollifier,
        })
    }

    pub fn config(&self) -> &WindowConfig {
        &self.cfg
    }

    /// One sweep of the fixed-point map over the τ-history.
    pub(crate) fn picard_map(
        &self,
        history: &[SpectralVectorField],
        start_forcing: &SpectralVectorField,
    ) -> Result<Vec<SpectralVectorField>> {
        let start = &history[0];
        let mut forcing = Vec::with_capacity(history.len());
        forcing.push((self.nodes[0], start_forcing.clone()));
        for (j, state) in history.iter().enumerate().skip(1) {
            forcing.push((self.nodes[j], convective_spectral(state, self.cfg.dealias)));
        }
        let duhamel = duhamel_cumulative(&forcing, &self.params, &self.eps)?;

        let p = self.grid.points();
        let mut next = Vec::with_capacity(history.len());
        next.push(start.clone());
        for j in 1..history.len() {
            let b = apply_b(start, self.nodes[j], &self.params, &self.eps)?;
            let e = apply_e(&history[j], &self.eps);
            let s = &duhamel[j];
            let mut out = SpectralVectorField::zeros(&self.grid);
            {
                let (sd, ed, bd) = (s.data(), e.data(), b.data());
                let od = out.data_mut();
                for c in 0..3 {
                    for idx in 0..p {
                        let i = c * p + idx;
                        let delta = self.mollifier[idx];
                        od[i] = match self.cfg.mode {
                            SolveMode::ModeSolved if delta > MOLLIFIER_GUARD => (bd[i] - sd[i]) / delta,
                            _ => -sd[i] + ed[i] + bd[i],
                        };
                    }
                }
            }
            next.push(out);
        }
        Ok(next)
    }

    fn residual(&self, a: &[SpectralVectorField], b: &[SpectralVectorField]) -> f64 {
        a.iter()
            .zip(b)
            .skip(1)
            .map(|(x, y)| synthesize_unchecked(&(x - y)).sup_norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn solve_history(&self, u_start: &RealVectorField) -> Result<WindowState> {
        if !u_start.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let start = fft_forward(u_start);
        let scale = u_start.sup_norm().max(1.0);
        let div = divergence_spectral(&start).max_abs;
        let tolerance = DIVERGENCE_TOLERANCE * scale;
        if div > tolerance {
            return Err(Error::NotDivergenceFree { max_div: div, tolerance });
        }
        let start_forcing = convective_spectral(&start, self.cfg.dealias);
        let mut history = vec![start; self.cfg.substeps];
        let mut residuals = Vec::new();
        let mut converged = false;
        for _ in 0..self.cfg.picard_max_iters {
            let next = self.picard_map(&history, &start_forcing)?;
            let r = self.residual(&next, &history);
            history = next;
            residuals.push(r);
            if !r.is_finite() {
                break;
            }
            if r <= self.cfg.picard_tol {
                converged = true;
                break;
            }
        }
        let floor = 1e-13 * scale;
        let contraction = residuals
            .windows(2)
            .filter(|w| w[0] > floor && w[1] > floor)
            .map(|w| w[1] / w[0])
            .next_back();
        let trace = PicardTrace {
            residuals,
            converged,
            contraction,
        };
        if !converged {
            return Err(Error::NonConvergence {
                window: 0,
                iterations: trace.iterations(),
                residual: trace.final_residual(),
                contraction: trace
                    .contraction
                    .map_or_else(|| "unavailable".to_string(), |c| format!("{c:.3e}")),
            });
        }
        Ok(WindowState {
            history,
            start_forcing,
            trace,
        })
    }

    /// Advances `u_start` by one window.
    pub fn solve(&self, u_start: &RealVectorField) -> Result<(RealVectorField, PicardTrace)> {
        let state = self.solve_history(u_start)?;
        let end = state.history.last().expect("at least two nodes");
        Ok((fft_inverse(end)?, state.trace))
    }
}

/// Solves the integral equation on [0, δt] from `u_start` by successive
/// substitution and returns the state at τ = δt.
pub fn picard_window(
    u_start: &RealVectorField,
    cfg: &WindowConfig,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<(RealVectorField, PicardTrace)> {
    WindowSolver::new(u_start.grid(), cfg, params, eps)?.solve(u_start)
}

/// Local Lipschitz ratio of the window map at its fixed point:
/// ‖Φ(u* + ηw) − Φ(u*)‖₀ / ‖ηw‖₀ for a seeded solenoidal perturbation w
/// applied at every interior τ-node, with η = 1e-4·max(‖u_start‖₀, 1).
pub fn probe_contraction(
    u_start: &RealVectorField,
    cfg: &WindowConfig,
    params: &PhysicalParams,
    eps: &MollifierParams,
    seed: u64,
) -> Result<f64> {
    let grid = u_start.grid();
    let solver = WindowSolver::new(grid, cfg, params, eps)?;
    let state = solver.solve_history(u_start)?;
    let size = 1e-4 * u_start.sup_norm().max(1.0);
    let w = random_schwartz_field(grid, seed, 2.0, size)?;
    let w_hat = fft_forward(&w);
    let perturbed: Vec<SpectralVectorField> = state
        .history
        .iter()
        .enumerate()
        .map(|(j, h)| if j == 0 { h.clone() } else { h + &w_hat })
        .collect();
    let base = solver.picard_map(&state.history, &state.start_forcing)?;
    let moved = solver.picard_map(&perturbed, &state.start_forcing)?;
    let response = solver.residual(&moved, &base);
    Ok(response / w.sup_norm())
}
