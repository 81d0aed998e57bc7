use num_complex::Complex64;

use super::march::window_count;
use super::Trajectory;
use crate::diagnostics::diagnose;
use crate::error::{Error, Result};
use crate::field::{
    analyze_pair, fft_forward, fft_inverse, synthesize_pair, synthesize_real, RealVectorField, SpectralVectorField,
};
use crate::grid::Grid;
use crate::nonlinear::{dealias, DealiasPolicy};
use crate::operators::{project_mode, PhysicalParams};

/// Courant number above which the reference integrator refuses to step.
pub const ORACLE_CFL_LIMIT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    /// Requested step; the actual step is T divided into ⌈T/dt⌉ equal parts.
    pub dt: f64,
    pub dealias: DealiasPolicy,
    /// Retain every k-th step state in the trajectory (0 keeps none).
    pub keep_every: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dt: 1e-3,
            dealias: DealiasPolicy::TwoThirds,
            keep_every: 0,
        }
    }
}

/// −P F[∇·(u⊗u)] in divergence form, dealiased. Nyquist modes are zeroed.
fn projected_rhs(grid: &Grid, u: &SpectralVectorField, policy: DealiasPolicy) -> SpectralVectorField {
    let p = grid.points();
    let mut s = u.clone();
    dealias(&mut s, policy);
    let (u0, u1) = synthesize_pair(grid, s.component(0), s.component(1));
    let u2 = synthesize_real(grid, s.component(2));
    let v = [&u0, &u1, &u2];
    let product = |a: usize, b: usize| -> Vec<f64> { (0..p).map(|i| v[a][i] * v[b][i]).collect() };
    // 00 11 22 01 02 12
    let (f00, f11) = analyze_pair(grid, &product(0, 0), &product(1, 1));
    let (f22, f01) = analyze_pair(grid, &product(2, 2), &product(0, 1));
    let (f02, f12) = analyze_pair(grid, &product(0, 2), &product(1, 2));
    let t = [[&f00, &f01, &f02], [&f01, &f11, &f12], [&f02, &f12, &f22]];

    let mut out = SpectralVectorField::zeros(grid);
    let minus_i = Complex64::new(0.0, -1.0);
    for idx in 0..p {
        if grid.touches_nyquist(idx) || (policy == DealiasPolicy::TwoThirds && !grid.keeps(idx)) {
            continue;
        }
        let g = grid.wavevector(idx);
        let mut div = [Complex64::default(); 3];
        for (i, row) in t.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                div[i] += minus_i * g[j] * f[idx];
            }
        }
        let pr = project_mode(g, div);
        out.set_mode(idx, [-pr[0], -pr[1], -pr[2]]);
    }
    out
}

/// Classic fourth-order Runge–Kutta on v = e^{ν|γ|²t}û with the exact
/// integrating factor and the Leray-projected divergence-form nonlinearity.
/// No mollifier is involved. One diagnostics record per step.
pub fn oracle_integrate(
    u0: &RealVectorField,
    horizon: f64,
    cfg: &OracleConfig,
    params: &PhysicalParams,
) -> Result<Trajectory> {
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(Error::InvalidParameter(format!("oracle dt must be > 0 (got {})", cfg.dt)));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidTime(format!("horizon must be > 0 (got {horizon})")));
    }
    let grid = u0.grid().clone();
    let steps = window_count(horizon, cfg.dt).max(1);
    let h = horizon / steps as f64;
    let courant_scale = h * grid.n() as f64 / grid.length();

    let p = grid.points();
    let (full, half): (Vec<f64>, Vec<f64>) = (0..p)
        .map(|idx| {
            let g = grid.wavevector(idx);
            let a = params.nu * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
            ((-a * h).exp(), (-a * 0.5 * h).exp())
        })
        .unzip();
    let decay = |f: &SpectralVectorField, m: &[f64]| {
        let mut out = f.clone();
        out.map_modes(|idx, _, v| [v[0] * m[idx], v[1] * m[idx], v[2] * m[idx]]);
        out
    };

    let initial = diagnose(u0, 0.0, 0, 0.0);
    let mut u_hat = fft_forward(u0);
    let mut sup = u0.sup_norm();
    let mut records = Vec::with_capacity(steps);
    let mut states = Vec::new();
    let mut state = u0.clone();
    for k in 1..=steps {
        let courant = sup * courant_scale;
        if courant > ORACLE_CFL_LIMIT {
            return Err(Error::Cfl { courant });
        }
        let a1 = projected_rhs(&grid, &u_hat, cfg.dealias);
        let u2 = decay(&u_hat.axpy(0.5 * h, &a1), &half);
        let a2 = projected_rhs(&grid, &u2, cfg.dealias);
        let u3 = decay(&u_hat, &half).axpy(0.5 * h, &a2);
        let a3 = projected_rhs(&grid, &u3, cfg.dealias);
        let u4 = decay(&u_hat, &full).axpy(h, &decay(&a3, &half));
        let a4 = projected_rhs(&grid, &u4, cfg.dealias);
        let mid = decay(&(&a2 + &a3), &half);
        let incr = decay(&a1, &full).axpy(2.0, &mid).axpy(1.0, &a4);
        u_hat = decay(&u_hat, &full).axpy(h / 6.0, &incr);

        state = fft_inverse(&u_hat)?;
        sup = state.sup_norm();
        if !sup.is_finite() {
            return Err(Error::NonFinite);
        }
        let t = k as f64 * h;
        records.push(diagnose(&state, t, 0, 0.0));
        if cfg.keep_every > 0 && k % cfg.keep_every == 0 {
            states.push((t, state.clone()));
        }
    }
    Ok(Trajectory {
        initial,
        records,
        final_state: state,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{exact_decay_solution, random_schwartz_field, taylor_green, FlowKind};
    use crate::grid::make_grid;
    use crate::nonlinear::convective_spectral;
    use crate::operators::leray_project;
    use std::f64::consts::PI;

    #[test]
    fn divergence_form_matches_advective_form() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let u = random_schwartz_field(&g, 5, 2.0, 1.0).unwrap();
        let s = fft_forward(&u);
        let rhs = projected_rhs(&g, &s, DealiasPolicy::TwoThirds);
        let adv = leray_project(&convective_spectral(&s, DealiasPolicy::TwoThirds));
        let diff = &rhs + &adv;
        assert!(diff.max_abs() < 1e-8 * adv.max_abs().max(1.0), "{}", diff.max_abs());
    }

    #[test]
    fn taylor_green_reference_is_exact() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let u0 = taylor_green(&g, 1.0);
        let cfg = OracleConfig { dt: 1e-2, ..OracleConfig::default() };
        let traj = oracle_integrate(&u0, 0.5, &cfg, &PhysicalParams::new(0.1).unwrap()).unwrap();
        let exact = exact_decay_solution(FlowKind::TaylorGreen, &u0, 0.5, 0.1).unwrap();
        assert!((&traj.final_state - &exact).sup_norm() < 1e-10);
        assert_eq!(traj.records.len(), 50);
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let z = RealVectorField::zeros(&g);
        let traj = oracle_integrate(&z, 0.1, &OracleConfig::default(), &PhysicalParams::new(0.1).unwrap()).unwrap();
        assert_eq!(traj.final_state.sup_norm(), 0.0);
        assert!(traj.records.iter().all(|r| r.sup_norm == 0.0));
    }

    #[test]
    fn courant_guard_aborts() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let u0 = taylor_green(&g, 10.0);
        let cfg = OracleConfig { dt: 0.1, ..OracleConfig::default() };
        assert!(matches!(
            oracle_integrate(&u0, 1.0, &cfg, &PhysicalParams::new(0.1).unwrap()),
            Err(Error::Cfl { .. })
        ));
    }
}
