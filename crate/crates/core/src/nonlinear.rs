//! Pseudo-spectral convective term, divergence, curl and pressure gradient.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    analyze_pair, analyze_scalar, differentiate_in_place, fft_forward, synthesize_pair, synthesize_real,
    synthesize_unchecked, RealVectorField, ScalarField, SpectralVectorField,
};
use crate::grid::Grid;
use crate::operators::project_mode;

/// Divergence tolerance for inputs that must be solenoidal.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DealiasPolicy {
    #[default]
    TwoThirds,
    None,
}

/// Zeroes every mode outside the two-thirds mask (no-op for `None`).
pub fn dealias(f: &mut SpectralVectorField, policy: DealiasPolicy) {
    if policy == DealiasPolicy::None {
        return;
    }
    let grid = f.grid().clone();
    let p = grid.points();
    for idx in 0..p {
        if !grid.keeps(idx) {
            for c in 0..3 {
                f.data_mut()[c * p + idx] = Complex64::default();
            }
        }
    }
}

/// Physical samples of (u·∇)u = Σ_n u_n ∂_n u_k from a spectral velocity.
fn advective_product(grid: &Grid, spectrum: &SpectralVectorField) -> Vec<f64> {
    let p = grid.points();
    let (u0, u1) = synthesize_pair(grid, spectrum.component(0), spectrum.component(1));
    let u2 = synthesize_real(grid, spectrum.component(2));
    let velocity = [u0, u1, u2];

    // All nine gradients ∂_n u_k, synthesized two at a time.
    let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(9);
    for k in 0..3 {
        for n in 0..3 {
            let mut s = spectrum.component(k).to_vec();
            differentiate_in_place(grid, &mut s, n);
            spectra.push(s);
        }
    }
    let mut grads: Vec<Vec<f64>> = Vec::with_capacity(9);
    let mut it = spectra.chunks(2);
    for pair in &mut it {
        if pair.len() == 2 {
            let (a, b) = synthesize_pair(grid, &pair[0], &pair[1]);
            grads.push(a);
            grads.push(b);
        } else {
            grads.push(synthesize_real(grid, &pair[0]));
        }
    }

    let mut out = vec![0.0; 3 * p];
    for k in 0..3 {
        let dst = &mut out[k * p..(k + 1) * p];
        for n in 0..3 {
            let g = &grads[3 * k + n];
            let un = &velocity[n];
            for idx in 0..p {
                dst[idx] += un[idx] * g[idx];
            }
        }
    }
    out
}

/// (u·∇)u in physical space, with the input velocity dealiased per `policy`
/// before the derivative and product are formed.
pub fn convective_term(u: &RealVectorField, policy: DealiasPolicy) -> RealVectorField {
    let mut s = fft_forward(u);
    dealias(&mut s, policy);
    RealVectorField::from_parts(u.grid(), advective_product(u.grid(), &s))
}

/// F[(u·∇)u] from a spectral velocity; with `TwoThirds` both the input and
/// the product spectrum are truncated, which removes all aliasing.
pub fn convective_spectral(spectrum: &SpectralVectorField, policy: DealiasPolicy) -> SpectralVectorField {
    let grid = spectrum.grid();
    let p = grid.points();
    let mut s = spectrum.clone();
    dealias(&mut s, policy);
    let prod = advective_product(grid, &s);
    let (a, b) = analyze_pair(grid, &prod[..p], &prod[p..2 * p]);
    let mut data = a;
    data.extend(b);
    data.extend(analyze_scalar(grid, &prod[2 * p..]));
    let mut out = SpectralVectorField::from_parts(grid, data);
    dealias(&mut out, policy);
    out
}

/// Spectral divergence Σ_n ∂u_n/∂x_n.
#[derive(Clone, Debug)]
pub struct Divergence {
    pub field: ScalarField,
    pub max_abs: f64,
}

pub fn divergence(u: &RealVectorField) -> Divergence {
    divergence_spectral(&fft_forward(u))
}

pub(crate) fn divergence_spectral(s: &SpectralVectorField) -> Divergence {
    let grid = s.grid();
    let p = grid.points();
    let mut acc = vec![Complex64::default(); p];
    for n in 0..3 {
        let mut d = s.component(n).to_vec();
        differentiate_in_place(grid, &mut d, n);
        acc.iter_mut().zip(d).for_each(|(a, b)| *a += b);
    }
    let data = synthesize_real(grid, &acc);
    let field = ScalarField::from_parts(grid, data);
    let max_abs = field.max_abs();
    Divergence { field, max_abs }
}

/// max |div u| without materializing the scalar field for the caller.
pub fn max_abs_divergence(u: &RealVectorField) -> f64 {
    divergence(u).max_abs
}

pub(crate) fn curl_spectral(s: &SpectralVectorField) -> SpectralVectorField {
    let grid = s.grid();
    let p = grid.points();
    let d = |comp: usize, axis: usize| {
        let mut v = s.component(comp).to_vec();
        differentiate_in_place(grid, &mut v, axis);
        v
    };
    let mut data = Vec::with_capacity(3 * p);
    // (∂₂u₃ − ∂₃u₂, ∂₃u₁ − ∂₁u₃, ∂₁u₂ − ∂₂u₁)
    for (a, b) in [((2, 1), (1, 2)), ((0, 2), (2, 0)), ((1, 0), (0, 1))] {
        let x = d(a.0, a.1);
        let y = d(b.0, b.1);
        data.extend(x.into_iter().zip(y).map(|(x, y)| x - y));
    }
    SpectralVectorField::from_parts(grid, data)
}

pub fn curl(u: &RealVectorField) -> RealVectorField {
    synthesize_unchecked(&curl_spectral(&fft_forward(u)))
}

/// ∇p for the pressure of the momentum equation
/// ∂u/∂t + (u·∇)u = νΔu − ∇p, i.e. F[∇p] = −(I − P)·F[(u·∇)u] with the
/// zero mode of p fixed to 0.
pub fn pressure_gradient(u: &RealVectorField, policy: DealiasPolicy) -> Result<RealVectorField> {
    let s = fft_forward(u);
    let div = divergence_spectral(&s).max_abs;
    let tolerance = DIVERGENCE_TOLERANCE * u.sup_norm().max(1.0);
    if div > tolerance {
        return Err(Error::NotDivergenceFree {
            max_div: div,
            tolerance,
        });
    }
    let conv = convective_spectral(&s, policy);
    let grid = u.grid().clone();
    let mut grad = conv.clone();
    grad.map_modes(|idx, g, v| {
        if grid.touches_nyquist(idx) {
            return [Complex64::default(); 3];
        }
        let pv = project_mode(g, v);
        [pv[0] - v[0], pv[1] - v[1], pv[2] - v[2]]
    });
    Ok(synthesize_unchecked(&grad))
}
