//! Initial conditions and exact reference solutions.
//!
//! Analytic flows are written on the 2π box; on a box of edge L the
//! coordinates are rescaled by κ = 2π/L and decay rates pick up κ².

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{synthesize_unchecked, RealVectorField, SpectralVectorField};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    TaylorGreen,
    Abc,
    RandomSchwartz,
}

impl std::fmt::Display for FlowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FlowKind::TaylorGreen => "taylor_green",
            FlowKind::Abc => "abc",
            FlowKind::RandomSchwartz => "random_schwartz",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub amplitude: f64,
    /// Seed of the random field; ignored by the analytic flows.
    pub seed: u64,
    /// Spectral envelope width σ of the random field.
    pub decay_scale: f64,
    /// ABC coefficients (A, B, C), each multiplied by `amplitude`.
    pub abc: [f64; 3],
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec::taylor_green(1.0)
    }
}

fn default_decay_scale() -> f64 {
    1.0
}

fn default_abc() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

impl FlowSpec {
    pub fn taylor_green(amplitude: f64) -> Self {
        FlowSpec {
            kind: FlowKind::TaylorGreen,
            amplitude,
            seed: 0,
            decay_scale: default_decay_scale(),
            abc: default_abc(),
        }
    }

    pub fn abc(a: f64, b: f64, c: f64) -> Self {
        FlowSpec {
            kind: FlowKind::Abc,
            amplitude: 1.0,
            seed: 0,
            decay_scale: default_decay_scale(),
            abc: [a, b, c],
        }
    }

    pub fn random_schwartz(seed: u64, decay_scale: f64, amplitude: f64) -> Self {
        FlowSpec {
            kind: FlowKind::RandomSchwartz,
            amplitude,
            seed,
            decay_scale,
            abc: default_abc(),
        }
    }

    /// Invariant violations, each prefixed with `prefix`.
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if !self.amplitude.is_finite() {
            out.push(format!("{prefix}.amplitude: must be finite (got {})", self.amplitude));
        }
        if !(self.decay_scale.is_finite() && self.decay_scale > 0.0) {
            out.push(format!("{prefix}.decay_scale: must be > 0 (got {})", self.decay_scale));
        }
        if self.abc.iter().any(|v| !v.is_finite()) {
            out.push(format!("{prefix}.abc: coefficients must be finite"));
        }
        out
    }

    pub fn build(&self, grid: &Grid) -> Result<RealVectorField> {
        let v = self.violations("flow");
        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        Ok(match self.kind {
            FlowKind::TaylorGreen => taylor_green(grid, self.amplitude),
            FlowKind::Abc => {
                let [a, b, c] = self.abc;
                abc_flow(grid, self.amplitude * a, self.amplitude * b, self.amplitude * c)
            }
            FlowKind::RandomSchwartz => {
                random_schwartz_field(grid, self.seed, self.decay_scale, self.amplitude)?
            }
        })
    }
}

/// u = a·(cos κx₁ sin κx₂, −sin κx₁ cos κx₂, 0).
pub fn taylor_green(grid: &Grid, amplitude: f64) -> RealVectorField {
    let k = grid.base_wavenumber();
    RealVectorField::from_fn(grid, |x| {
        let (s0, c0) = (k * x[0]).sin_cos();
        let (s1, c1) = (k * x[1]).sin_cos();
        [amplitude * c0 * s1, -amplitude * s0 * c1, 0.0]
    })
}

/// Arnold–Beltrami–Childress flow; curl u = κu.
pub fn abc_flow(grid: &Grid, a: f64, b: f64, c: f64) -> RealVectorField {
    let k = grid.base_wavenumber();
    RealVectorField::from_fn(grid, |x| {
        let (s0, c0) = (k * x[0]).sin_cos();
        let (s1, c1) = (k * x[1]).sin_cos();
        let (s2, c2) = (k * x[2]).sin_cos();
        [a * s2 + c * c1, b * s0 + a * c2, c * s1 + b * c0]
    })
}

/// Divergence-free, zero-mean random field with Gaussian spectral envelope
/// exp(−|γ|²/2σ²), scaled so its component-summed sup norm equals
/// `amplitude`.
///
/// Every retained mode has magnitude exactly `envelope(γ)` before scaling:
/// the coefficient is the envelope times a random unit vector in the plane
/// orthogonal to γ with a random phase. Nyquist planes and the mean are
/// empty.
pub fn random_schwartz_field(grid: &Grid, seed: u64, decay_scale: f64, amplitude: f64) -> Result<RealVectorField> {
    if !(decay_scale.is_finite() && decay_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay_scale must be > 0 (got {decay_scale})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SpectralVectorField::zeros(grid);
    for idx in 0..grid.points() {
        let mirror = grid.mirror(idx);
        if mirror < idx || grid.touches_nyquist(idx) {
            continue;
        }
        let g = grid.wavevector(idx);
        let k2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        if k2 == 0.0 {
            continue;
        }
        let [e1, e2] = orthonormal_pair(g);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let envelope = (-k2 / (2.0 * decay_scale * decay_scale)).exp();
        let rot = Complex64::from_polar(envelope, phase);
        let (st, ct) = theta.sin_cos();
        let v = [
            rot * (ct * e1[0] + st * e2[0]),
            rot * (ct * e1[1] + st * e2[1]),
            rot * (ct * e1[2] + st * e2[2]),
        ];
        s.set_mode(idx, v);
        s.set_mode(mirror, [v[0].conj(), v[1].conj(), v[2].conj()]);
    }
    let u = synthesize_unchecked(&s);
    let sup = u.sup_norm();
    if sup == 0.0 {
        return Ok(u);
    }
    Ok(u.scaled(amplitude / sup))
}

/// Two real unit vectors spanning the plane orthogonal to `g`.
fn orthonormal_pair(g: [f64; 3]) -> [[f64; 3]; 2] {
    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    let n = [g[0] / norm, g[1] / norm, g[2] / norm];
    // Seed with the axis least aligned with n.
    let axis = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let mut e1 = cross(n, axis);
    let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|v| *v /= l);
    let e2 = cross(n, e1);
    [e1, e2]
}

/// Exact solution of the analytic flows: u⁰·e^{−2νκ²t} (Taylor–Green) or
/// u⁰·e^{−νκ²t} (ABC).
pub fn exact_decay_solution(kind: FlowKind, u0: &RealVectorField, t: f64, nu: f64) -> Result<RealVectorField> {
    let k2 = u0.grid().base_wavenumber().powi(2);
    let rate = match kind {
        FlowKind::TaylorGreen => 2.0 * k2,
        FlowKind::Abc => k2,
        FlowKind::RandomSchwartz => return Err(Error::UnsupportedFlow(kind.to_string())),
    };
    if t == 0.0 {
        return Ok(u0.clone());
    }
    Ok(u0.scaled((-rate * nu * t).exp()))
}
