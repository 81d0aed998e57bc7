//! Fourier-multiplier operators of the mollified integral formulation.
//!
//! With the mollifier δ(γ) = exp(−ε³/|γ|²) (and δ(0) = 0):
//!
//! * `B` multiplies by e^{−ν|γ|²t}·δ(γ) and acts on the initial velocity,
//! * `E` multiplies by 1 − δ(γ) and acts on the current velocity,
//! * `S` is the Duhamel integral of the heat kernel composed with the Leray
//!   projection P(γ) = I − γγᵀ/|γ|² and the mollifier, acting on the
//!   convective term.
//!
//! The velocity obeys u = −S[(u·∇)u] + E[u] + B[u⁰].
//!
//! The zero mode is annihilated by P and δ, so S and B never touch the mean;
//! the mean flow is carried entirely by E (multiplier 1 at γ = 0). Modes on a
//! Nyquist plane have no partner at −γ, so projected operators zero them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{fft_forward, synthesize_unchecked, RealVectorField, SpectralVectorField};
use crate::grid::Grid;

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierParams {
    pub epsilon: f64,
}

impl MollifierParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1) (got {epsilon})"
            )));
        }
        Ok(MollifierParams { epsilon })
    }
}

impl Default for MollifierParams {
    fn default() -> Self {
        MollifierParams {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

pub const DEFAULT_NU: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Kinematic viscosity; zero selects the Euler limit.
    pub nu: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nu must be finite and non-negative (got {nu})"
            )));
        }
        Ok(PhysicalParams { nu })
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams { nu: DEFAULT_NU }
    }
}

#[inline]
fn norm_sq(g: [f64; 3]) -> f64 {
    g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
}

/// δ(γ) = exp(−ε³/|γ|²), continuously extended by 0 at γ = 0.
#[inline]
pub fn mollifier_value(gamma: [f64; 3], eps: &MollifierParams) -> f64 {
    mollifier_from_norm_sq(norm_sq(gamma), eps.epsilon)
}

#[inline]
fn mollifier_from_norm_sq(k2: f64, epsilon: f64) -> f64 {
    if k2 == 0.0 {
        0.0
    } else {
        (-epsilon.powi(3) / k2).exp()
    }
}

/// 1 − δ(γ), evaluated without cancellation.
#[inline]
pub fn e_multiplier(gamma: [f64; 3], eps: &MollifierParams) -> f64 {
    let k2 = norm_sq(gamma);
    if k2 == 0.0 {
        1.0
    } else {
        -(-eps.epsilon.powi(3) / k2).exp_m1()
    }
}

/// e^{−ν|γ|²t}·δ(γ).
#[inline]
pub fn b_multiplier(gamma: [f64; 3], t: f64, params: &PhysicalParams, eps: &MollifierParams) -> f64 {
    let k2 = norm_sq(gamma);
    (-params.nu * k2 * t).exp() * mollifier_from_norm_sq(k2, eps.epsilon)
}

/// Scalar factor of the frozen-time S multiplier, t·e^{−ν|γ|²(t−t★)}·δ(γ);
/// the full multiplier is this times P(γ).
#[inline]
pub fn s_frozen_scalar(
    gamma: [f64; 3],
    t: f64,
    t_star: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> f64 {
    let k2 = norm_sq(gamma);
    t * (-params.nu * k2 * (t - t_star)).exp() * mollifier_from_norm_sq(k2, eps.epsilon)
}

/// Leray kernel P_ij(γ) = δ_ij − γ_iγ_j/|γ|².
pub fn leray_kernel(gamma: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let k2 = norm_sq(gamma);
    if k2 == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            p[i][j] = delta - gamma[i] * gamma[j] / k2;
        }
    }
    Ok(p)
}

/// P(γ)·v computed as v − γ(γ·v)/|γ|².
#[inline]
pub(crate) fn project_mode(gamma: [f64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = norm_sq(gamma);
    if k2 == 0.0 {
        return [Complex64::default(); 3];
    }
    let dot = (v[0] * gamma[0] + v[1] * gamma[1] + v[2] * gamma[2]) / k2;
    [v[0] - dot * gamma[0], v[1] - dot * gamma[1], v[2] - dot * gamma[2]]
}

/// Leray projection of a spectral field (no mollifier).
pub fn leray_project(f: &SpectralVectorField) -> SpectralVectorField {
    let grid = f.grid().clone();
    let mut out = f.clone();
    out.map_modes(|idx, g, v| {
        if grid.touches_nyquist(idx) {
            [Complex64::default(); 3]
        } else {
            project_mode(g, v)
        }
    });
    out
}

fn check_time(t: f64, name: &str) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(format!("{name} must be finite and >= 0 (got {t})")));
    }
    Ok(())
}

fn scale_modes(f: &SpectralVectorField, multiplier: impl Fn([f64; 3]) -> f64) -> SpectralVectorField {
    let mut out = f.clone();
    out.map_modes(|_, g, v| {
        let m = multiplier(g);
        [v[0] * m, v[1] * m, v[2] * m]
    });
    out
}

/// Heat semigroup times mollifier applied to the initial velocity.
pub fn apply_b(
    u0: &SpectralVectorField,
    t: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<SpectralVectorField> {
    check_time(t, "t")?;
    Ok(scale_modes(u0, |g| b_multiplier(g, t, params, eps)))
}

/// Mollifier complement 1 − δ(γ).
pub fn apply_e(u: &SpectralVectorField, eps: &MollifierParams) -> SpectralVectorField {
    scale_modes(u, |g| e_multiplier(g, eps))
}

/// Frozen-time Duhamel operator tS^t: per mode
/// t·e^{−ν|γ|²(t−t★)}·δ(γ)·P(γ)·F̂.
pub fn apply_s_frozen(
    forcing: &SpectralVectorField,
    t: f64,
    t_star: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<SpectralVectorField> {
    check_time(t, "t")?;
    if !(t_star.is_finite() && (0.0..=t).contains(&t_star)) {
        return Err(Error::InvalidTime(format!(
            "t_star must lie in [0, t] = [0, {t}] (got {t_star})"
        )));
    }
    Ok(frozen_kernel(forcing, t - t_star, t, params, eps))
}

/// scale·e^{−ν|γ|²·lag}·δ·P applied per mode. `scale = t` gives tS^t,
/// `scale = 1` gives S^t.
pub(crate) fn frozen_kernel(
    forcing: &SpectralVectorField,
    lag: f64,
    scale: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> SpectralVectorField {
    let grid = forcing.grid().clone();
    let mut out = forcing.clone();
    out.map_modes(|idx, g, v| {
        if grid.touches_nyquist(idx) {
            return [Complex64::default(); 3];
        }
        let k2 = norm_sq(g);
        let m = scale * (-params.nu * k2 * lag).exp() * mollifier_from_norm_sq(k2, eps.epsilon);
        let p = project_mode(g, v);
        [p[0] * m, p[1] * m, p[2] * m]
    });
    out
}

fn check_history(history: &[(f64, SpectralVectorField)]) -> Result<()> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    for (i, w) in history.windows(2).enumerate() {
        if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NonMonotoneHistory { index: i + 1 });
        }
    }
    let grid = history[0].1.grid();
    if history.iter().any(|(_, f)| !f.grid().same_as(grid)) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Duhamel integral ∫₀^{τ_j} e^{−ν|γ|²(τ_j−s)}·δ·P·F̂(s) ds at every node τ_j
/// of the history, by the composite trapezoid rule. Node 0 must be τ = 0.
///
/// Uses the recurrence I_j = e^{−a h}I_{j−1} + (h/2)(e^{−a h}g_{j−1} + g_j),
/// which is the trapezoid rule applied to the exponentially weighted
/// integrand on each subinterval.
pub fn duhamel_cumulative(
    history: &[(f64, SpectralVectorField)],
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<Vec<SpectralVectorField>> {
    check_history(history)?;
    let first = history[0].0;
    if first.abs() > 1e-14 {
        return Err(Error::HistorySpan {
            t: history[history.len() - 1].0,
            first,
            last: history[history.len() - 1].0,
        });
    }
    let grid = history[0].1.grid().clone();
    let steps: Vec<f64> = history.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let mut out: Vec<SpectralVectorField> = (0..history.len())
        .map(|_| SpectralVectorField::zeros(&grid))
        .collect();

    for idx in 0..grid.points() {
        if grid.touches_nyquist(idx) {
            continue;
        }
        let g = grid.wavevector(idx);
        let k2 = norm_sq(g);
        if k2 == 0.0 {
            continue;
        }
        let a = params.nu * k2;
        let mollifier = mollifier_from_norm_sq(k2, eps.epsilon);
        let mut acc = [Complex64::default(); 3];
        let mut prev = project_mode(g, history[0].1.mode(idx));
        for (j, h) in steps.iter().enumerate() {
            let cur = project_mode(g, history[j + 1].1.mode(idx));
            let decay = (-a * h).exp();
            for c in 0..3 {
                acc[c] = acc[c] * decay + (prev[c] * decay + cur[c]) * (0.5 * h);
            }
            out[j + 1].set_mode(idx, [acc[0] * mollifier, acc[1] * mollifier, acc[2] * mollifier]);
            prev = cur;
        }
    }
    Ok(out)
}

/// Duhamel operator S evaluated at time `t` from a sampled forcing history
/// spanning [0, t].
pub fn apply_s_quadrature(
    history: &[(f64, SpectralVectorField)],
    t: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<SpectralVectorField> {
    check_time(t, "t")?;
    check_history(history)?;
    let first = history[0].0;
    let last = history[history.len() - 1].0;
    let slack = 1e-12 * t.max(1.0);
    if first.abs() > slack || (last - t).abs() > slack {
        return Err(Error::HistorySpan { t, first, last });
    }
    let mut all = duhamel_cumulative(history, params, eps)?;
    Ok(all.pop().expect("history is non-empty"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorId {
    B,
    E,
    S,
}

impl std::fmt::Display for OperatorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OperatorId::B => "B",
            OperatorId::E => "E",
            OperatorId::S => "S",
        };
        f.write_str(s)
    }
}

/// Spectral support of the random probe fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeSpec {
    pub seed: u64,
    pub count: usize,
    /// Modes with `k2_min ≤ |γ|² ≤ k2_max` carry random coefficients.
    pub k2_min: f64,
    pub k2_max: f64,
    /// Band coefficients are drawn uniformly from [−amplitude, amplitude].
    pub amplitude: f64,
    /// Constant added to every component (γ = 0 content).
    pub mean: f64,
}

/// Measured sup-norm amplification of an operator over seeded probes.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierReport {
    pub operator: OperatorId,
    /// Largest multiplier magnitude (matrix 2-norm for S) over all grid modes.
    pub max_multiplier: f64,
    /// Largest multiplier magnitude over modes in the probe support.
    pub band_max_multiplier: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub mean_ratio: f64,
    pub samples: usize,
}

/// Draws a real field whose coefficients are random on the probe band.
pub fn probe_field(grid: &Grid, spec: &ProbeSpec, sample: u64) -> RealVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ sample);
    let p = grid.points();
    let mut s = SpectralVectorField::zeros(grid);
    for idx in 0..p {
        let mirror = grid.mirror(idx);
        if mirror < idx || grid.touches_nyquist(idx) {
            continue;
        }
        let k2 = norm_sq(grid.wavevector(idx));
        if k2 == 0.0 || k2 < spec.k2_min || k2 > spec.k2_max {
            continue;
        }
        let mut v = [Complex64::default(); 3];
        for c in v.iter_mut() {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * spec.amplitude;
        }
        s.set_mode(idx, v);
        s.set_mode(mirror, [v[0].conj(), v[1].conj(), v[2].conj()]);
    }
    for c in 0..3 {
        s.component_mut(c)[0] = Complex64::new(spec.mean, 0.0);
    }
    synthesize_unchecked(&s)
}

fn operator_multiplier_norm(
    op: OperatorId,
    idx: usize,
    grid: &Grid,
    params: &PhysicalParams,
    eps: &MollifierParams,
    t: f64,
) -> f64 {
    let g = grid.wavevector(idx);
    match op {
        OperatorId::B => b_multiplier(g, t, params, eps),
        OperatorId::E => e_multiplier(g, eps),
        OperatorId::S => {
            // ‖P‖₂ = 1 for γ ≠ 0 (orthogonal projection of rank 2).
            if norm_sq(g) == 0.0 || grid.touches_nyquist(idx) {
                0.0
            } else {
                s_frozen_scalar(g, 1.0, 1.0 - t / 2.0, params, eps)
            }
        }
    }
}

/// Applies the probed operator: B(·, t), E, or the frozen S^t with t★ = t/2
/// (without the leading factor t).
pub fn apply_probe_operator(
    op: OperatorId,
    f: &SpectralVectorField,
    params: &PhysicalParams,
    eps: &MollifierParams,
    t: f64,
) -> Result<SpectralVectorField> {
    check_time(t, "t")?;
    Ok(match op {
        OperatorId::B => apply_b(f, t, params, eps)?,
        OperatorId::E => apply_e(f, eps),
        OperatorId::S => frozen_kernel(f, t / 2.0, 1.0, params, eps),
    })
}

/// Measures sup_norm(op f)/sup_norm(f) over `spec.count` seeded probes.
/// Bounds are recorded, never asserted.
pub fn probe_operator_norm(
    op: OperatorId,
    spec: &ProbeSpec,
    grid: &Grid,
    params: &PhysicalParams,
    eps: &MollifierParams,
    t: f64,
) -> Result<MultiplierReport> {
    if spec.count == 0 {
        return Err(Error::InvalidParameter("probe count must be at least 1".into()));
    }
    check_time(t, "t")?;
    let mut max_multiplier: f64 = 0.0;
    let mut band_max: f64 = 0.0;
    for idx in 0..grid.points() {
        let m = operator_multiplier_norm(op, idx, grid, params, eps, t);
        max_multiplier = max_multiplier.max(m);
        let k2 = norm_sq(grid.wavevector(idx));
        let in_band = (k2 > 0.0 && k2 >= spec.k2_min && k2 <= spec.k2_max && !grid.touches_nyquist(idx))
            || (k2 == 0.0 && spec.mean != 0.0);
        if in_band {
            band_max = band_max.max(m);
        }
    }
    let mut ratios = Vec::with_capacity(spec.count);
    for sample in 0..spec.count as u64 {
        let f = probe_field(grid, spec, sample);
        let denom = f.sup_norm();
        if denom == 0.0 {
            continue;
        }
        let out = synthesize_unchecked(&apply_probe_operator(op, &fft_forward(&f), params, eps, t)?);
        ratios.push(out.sup_norm() / denom);
    }
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("probe band contains no modes".into()));
    }
    let max_ratio = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min_ratio = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(MultiplierReport {
        operator: op,
        max_multiplier,
        band_max_multiplier: band_max,
        max_ratio,
        min_ratio,
        mean_ratio,
        samples: ratios.len(),
    })
}

/// sup_norm(B(u⁰, 0) + E(u⁰) − u⁰): how far the t = 0 operator split is
/// from reproducing the initial data.
pub fn initial_split_gap(u0: &RealVectorField, eps: &MollifierParams) -> Result<f64> {
    let s = fft_forward(u0);
    let params = PhysicalParams { nu: 0.0 };
    let sum = &apply_b(&s, 0.0, &params, eps)? + &apply_e(&s, eps);
    Ok((&synthesize_unchecked(&sum) - u0).sup_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::fft_inverse;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn eps(e: f64) -> MollifierParams {
        MollifierParams::new(e).unwrap()
    }

    #[test]
    fn mollifier_examples() {
        assert_eq!(mollifier_value([0.0; 3], &eps(1e-3)), 0.0);
        // |γ|² = ε³
        let e = 0.1_f64;
        let g = [e.powf(1.5), 0.0, 0.0];
        assert!((mollifier_value(g, &eps(e)) - (-1.0f64).exp()).abs() < 1e-12);
        let v = mollifier_value([1.0, 0.0, 0.0], &eps(1e-2));
        assert!((v - (-1e-6f64).exp()).abs() < 1e-15);
        assert!((v - 0.999999).abs() < 1e-9);
    }

    #[test]
    fn leray_kernel_examples() {
        let p = leray_kernel([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p, [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

        let g = [1.0, 2.0, 3.0];
        let p = leray_kernel(g).unwrap();
        for row in p {
            let dot: f64 = row.iter().zip(g).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-15);
        }

        let p = leray_kernel([2.0, -1.0, 5.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let sq: f64 = (0..3).map(|k| p[i][k] * p[k][j]).sum();
                assert!((sq - p[i][j]).abs() < 1e-14);
                assert_eq!(p[i][j], p[j][i]);
            }
        }
        assert!(matches!(leray_kernel([0.0; 3]), Err(Error::ZeroWavenumber)));
    }

    #[test]
    fn leray_diagonal_matches_fraction_table() {
        let g = [0.7, -1.3, 2.1];
        let k2 = norm_sq(g);
        let p = leray_kernel(g).unwrap();
        assert!((p[0][0] - (g[1] * g[1] + g[2] * g[2]) / k2).abs() < 1e-15);
        assert!((p[1][1] - (g[2] * g[2] + g[0] * g[0]) / k2).abs() < 1e-15);
        assert!((p[2][2] - (g[0] * g[0] + g[1] * g[1]) / k2).abs() < 1e-15);
        assert!((p[0][1] + g[0] * g[1] / k2).abs() < 1e-15);
    }

    fn single_mode(grid: &Grid, idx: usize, v: [Complex64; 3]) -> SpectralVectorField {
        let mut s = SpectralVectorField::zeros(grid);
        s.set_mode(idx, v);
        s
    }

    #[test]
    fn b_examples() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let params = PhysicalParams::new(1.0).unwrap();
        let zero = apply_b(&SpectralVectorField::zeros(&g), 1.0, &params, &eps(1e-3)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let idx = g.index(1, 0, 0);
        let one = Complex64::new(1.0, 0.0);
        let s = single_mode(&g, idx, [one, one, one]);
        let out = apply_b(&s, 1.0, &params, &eps(1e-3)).unwrap();
        let expected = (-1.0f64).exp() * (-1e-9f64).exp();
        assert!((out.mode(idx)[0].re - expected).abs() < 1e-16);
        assert!(apply_b(&s, -1.0, &params, &eps(1e-3)).is_err());
    }

    #[test]
    fn e_examples() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let c = Complex64::new(3.0, 0.0);
        let s = single_mode(&g, 0, [c, c, c]);
        assert_eq!(apply_e(&s, &eps(1e-3)).mode(0), [c, c, c]);

        let idx = g.index(0, 1, 0);
        let s = single_mode(&g, idx, [c, c, c]);
        let out = apply_e(&s, &eps(1e-3)).mode(idx)[0].re / 3.0;
        assert!((out - 1e-9).abs() < 1e-18);
        assert_eq!(apply_e(&SpectralVectorField::zeros(&g), &eps(1e-3)).max_abs(), 0.0);
    }

    #[test]
    fn s_frozen_annihilates_gradients_and_vanishes_at_t0() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let params = PhysicalParams::new(0.3).unwrap();
        // F = iγφ for φ with a few modes.
        let mut s = SpectralVectorField::zeros(&g);
        for idx in [g.index(1, 2, 0), g.index(3, 1, 1), g.index(0, 0, 2)] {
            let gv = g.wavevector(idx);
            let phi = Complex64::new(0.4, -0.2);
            let i = Complex64::new(0.0, 1.0);
            s.set_mode(idx, [i * gv[0] * phi, i * gv[1] * phi, i * gv[2] * phi]);
        }
        let out = apply_s_frozen(&s, 0.1, 0.05, &params, &eps(1e-3)).unwrap();
        assert!(out.max_abs() < 1e-15);

        let f = single_mode(&g, g.index(1, 0, 0), [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::default()]);
        let out = apply_s_frozen(&f, 0.0, 0.0, &params, &eps(1e-3)).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        assert!(apply_s_frozen(&f, 0.1, 0.2, &params, &eps(1e-3)).is_err());
        assert!(apply_s_frozen(&f, 0.1, -0.01, &params, &eps(1e-3)).is_err());
    }

    #[test]
    fn s_frozen_single_mode_chain() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let params = PhysicalParams::new(1.0).unwrap();
        let idx = g.index(1, 0, 0);
        let f = single_mode(&g, idx, [Complex64::default(), Complex64::new(1.0, 0.0), Complex64::default()]);
        let out = apply_s_frozen(&f, 0.1, 0.05, &params, &eps(1e-3)).unwrap();
        let expected = 0.1 * (-0.05f64).exp() * (-1e-9f64).exp();
        let m = out.mode(idx);
        assert!((m[1].re - expected).abs() < 1e-16);
        assert_eq!(m[0], Complex64::default());
        assert_eq!(m[2], Complex64::default());

        // Constant history through the quadrature route at ν = 0 gives t·δ·P·F.
        let zero = PhysicalParams::new(0.0).unwrap();
        let hist: Vec<_> = (0..5).map(|j| (0.1 * j as f64 / 4.0, f.clone())).collect();
        let q = apply_s_quadrature(&hist, 0.1, &zero, &eps(1e-3)).unwrap();
        let frozen = apply_s_frozen(&f, 0.1, 0.05, &zero, &eps(1e-3)).unwrap();
        assert!((q.mode(idx)[1] - frozen.mode(idx)[1]).norm() < 1e-16);
    }

    #[test]
    fn quadrature_error_paths() {
        let g = make_grid(4, 2.0 * PI).unwrap();
        let params = PhysicalParams::new(0.1).unwrap();
        let z = SpectralVectorField::zeros(&g);
        assert!(matches!(
            apply_s_quadrature(&[], 1.0, &params, &eps(1e-3)),
            Err(Error::EmptyHistory)
        ));
        let bad = vec![(0.0, z.clone()), (0.5, z.clone()), (0.5, z.clone()), (1.0, z.clone())];
        assert!(matches!(
            apply_s_quadrature(&bad, 1.0, &params, &eps(1e-3)),
            Err(Error::NonMonotoneHistory { index: 2 })
        ));
        let short = vec![(0.0, z.clone()), (0.5, z.clone())];
        assert!(matches!(
            apply_s_quadrature(&short, 1.0, &params, &eps(1e-3)),
            Err(Error::HistorySpan { .. })
        ));
        let zero_out = apply_s_quadrature(&[(0.0, z.clone()), (1.0, z)], 1.0, &params, &eps(1e-3)).unwrap();
        assert_eq!(zero_out.max_abs(), 0.0);
    }

    #[test]
    fn quadrature_matches_analytic_kernel_for_constant_forcing() {
        // ∫₀ᵗ e^{−νk²(t−s)} ds = (1 − e^{−νk²t})/(νk²), here with νk²t = 1.
        // The trapezoid error is (h²/12)·νk²·(1 − e^{−1}) = 1.33e-6/(νk²)
        // at 200 samples, so the mode must be stiff enough for 1e-8.
        let g = make_grid(16, 2.0 * PI).unwrap();
        let idx = g.index(0, 6, 6);
        let k2 = 72.0;
        let nu = 4.0;
        let t = 1.0 / (nu * k2);
        let params = PhysicalParams::new(nu).unwrap();
        let e = eps(1e-3);
        let f = single_mode(&g, idx, [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()]);
        let samples = 200;
        let hist: Vec<_> = (0..samples)
            .map(|j| (t * j as f64 / (samples - 1) as f64, f.clone()))
            .collect();
        let q = apply_s_quadrature(&hist, t, &params, &e).unwrap();
        let delta = mollifier_value(g.wavevector(idx), &e);
        let exact = delta * (1.0 - (-nu * k2 * t).exp()) / (nu * k2);
        assert!((q.mode(idx)[0].re - exact).abs() < 1e-8);
    }

    #[test]
    fn probe_b_at_t0_never_amplifies_smooth_fields() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let spec = ProbeSpec { seed: 1, count: 8, k2_min: 1.0, k2_max: 3.0, amplitude: 1.0, mean: 0.0 };
        let r = probe_operator_norm(OperatorId::B, &spec, &g, &PhysicalParams::new(0.1).unwrap(), &eps(1e-3), 0.0).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-12, "{r:?}");
        assert_eq!(r.samples, 8);
    }

    #[test]
    fn probe_e_on_unit_shell_and_with_mean() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let params = PhysicalParams::new(0.1).unwrap();
        let e = eps(1e-3);
        let shell = ProbeSpec { seed: 2, count: 10, k2_min: 1.0, k2_max: 1.0, amplitude: 1.0, mean: 0.0 };
        let r = probe_operator_norm(OperatorId::E, &shell, &g, &params, &e, 0.0).unwrap();
        assert!(r.max_ratio <= -(-1e-9f64).exp_m1() + 1e-12, "{r:?}");
        assert!(r.max_ratio > 0.5e-9);

        let with_mean = ProbeSpec { mean: 1.0, amplitude: 1e-3, k2_max: 2.0, ..shell };
        let r = probe_operator_norm(OperatorId::E, &with_mean, &g, &params, &e, 0.0).unwrap();
        assert!(r.band_max_multiplier == 1.0);
        assert!(r.max_ratio > 0.9);
    }

    #[test]
    fn probe_rejects_zero_count() {
        let g = make_grid(4, 2.0 * PI).unwrap();
        let spec = ProbeSpec { seed: 0, count: 0, k2_min: 1.0, k2_max: 1.0, amplitude: 1.0, mean: 0.0 };
        assert!(probe_operator_norm(OperatorId::B, &spec, &g, &PhysicalParams::new(0.0).unwrap(), &eps(0.5), 0.0).is_err());
    }

    #[test]
    fn initial_split_gap_is_rounding_sized() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let spec = ProbeSpec { seed: 4, count: 1, k2_min: 1.0, k2_max: 6.0, amplitude: 1.0, mean: 0.3 };
        let u = probe_field(&g, &spec, 0);
        let gap = initial_split_gap(&u, &eps(1e-2)).unwrap();
        assert!(gap < 1e-13 * (1.0 + u.sup_norm()));
    }

    #[test]
    fn probe_fields_are_real() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let spec = ProbeSpec { seed: 7, count: 1, k2_min: 1.0, k2_max: 9.0, amplitude: 1.0, mean: 0.0 };
        let u = probe_field(&g, &spec, 3);
        fft_inverse(&fft_forward(&u)).unwrap();
        assert!(fft_forward(&u).hermitian_defect() < 1e-15);
    }
}
