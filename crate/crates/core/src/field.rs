//! Physical- and Fourier-space vector fields, the transform pair between
//! them, spectral differentiation and the norm family.
//!
//! Transform convention: the analysis transform uses the kernel e^{+i x.γ}
//! and is normalized by 1/n³, so coefficients are Fourier-series
//! coefficients and `cos(x₁)` maps to ½ at γ = (±1, 0, 0). Synthesis uses
//! e^{-i x.γ} without scaling, and differentiation is multiplication by
//! −iγ. Under this pair Parseval reads
//!
//! ```text
//! ‖f‖²_L2 = L³ · Σ_γ |F(γ)|²
//! ```
//!
//! which is [`PARSEVAL_SCALE`] times the coefficient sum with `L³` supplied
//! by the grid.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Imaginary residue (relative to the largest synthesized magnitude) above
/// which a spectrum is rejected as non-Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Parseval constant per unit volume: ‖f‖²_L2 = PARSEVAL_SCALE · L³ · Σ|F|².
pub const PARSEVAL_SCALE: f64 = 1.0;

/// A real 3-vector field sampled on the grid, component-major.
#[derive(Clone, Debug)]
pub struct RealVectorField {
    grid: Grid,
    data: Vec<f64>,
}

/// Fourier coefficients of a 3-vector field, component-major.
#[derive(Clone, Debug)]
pub struct SpectralVectorField {
    grid: Grid,
    data: Vec<Complex64>,
}

/// A real scalar field on the grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl RealVectorField {
    pub fn new(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        let expected = 3 * grid.points();
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(RealVectorField {
            grid: grid.clone(),
            data,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        RealVectorField {
            grid: grid.clone(),
            data: vec![0.0; 3 * grid.points()],
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let points = grid.points();
        let mut data = vec![0.0; 3 * points];
        for idx in 0..points {
            let v = f(grid.position(idx));
            for c in 0..3 {
                data[c * points + idx] = v[c];
            }
        }
        RealVectorField {
            grid: grid.clone(),
            data,
        }
    }

    pub(crate) fn from_parts(grid: &Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), 3 * grid.points());
        RealVectorField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Component `c` in 0..3.
    pub fn component(&self, c: usize) -> &[f64] {
        let p = self.grid.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let p = self.grid.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// Component-summed sup magnitude Σ_i max_x |u_i(x)|.
    pub fn sup_norm(&self) -> f64 {
        sup_norm(self)
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        RealVectorField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Returns `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &RealVectorField) -> Self {
        assert!(self.grid.same_as(&other.grid), "fields on different grids");
        RealVectorField {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }
}

impl Sub for &RealVectorField {
    type Output = RealVectorField;
    fn sub(self, rhs: &RealVectorField) -> RealVectorField {
        self.axpy(-1.0, rhs)
    }
}

impl Add for &RealVectorField {
    type Output = RealVectorField;
    fn add(self, rhs: &RealVectorField) -> RealVectorField {
        self.axpy(1.0, rhs)
    }
}

impl ScalarField {
    pub(crate) fn from_parts(grid: &Grid, data: Vec<f64>) -> Self {
        ScalarField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl SpectralVectorField {
    pub fn new(grid: &Grid, data: Vec<Complex64>) -> Result<Self> {
        let expected = 3 * grid.points();
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(SpectralVectorField {
            grid: grid.clone(),
            data,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        SpectralVectorField {
            grid: grid.clone(),
            data: vec![Complex64::default(); 3 * grid.points()],
        }
    }

    pub(crate) fn from_parts(grid: &Grid, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), 3 * grid.points());
        SpectralVectorField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let p = self.grid.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let p = self.grid.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// The three components of mode `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        let p = self.grid.points();
        [self.data[idx], self.data[p + idx], self.data[2 * p + idx]]
    }

    #[inline]
    pub fn set_mode(&mut self, idx: usize, v: [Complex64; 3]) {
        let p = self.grid.points();
        self.data[idx] = v[0];
        self.data[p + idx] = v[1];
        self.data[2 * p + idx] = v[2];
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest |F(γ) − conj F(−γ)| over all modes and components.
    pub fn hermitian_defect(&self) -> f64 {
        let p = self.grid.points();
        let mut worst: f64 = 0.0;
        for c in 0..3 {
            let comp = &self.data[c * p..(c + 1) * p];
            for idx in 0..p {
                let d = comp[idx] - comp[self.grid.mirror(idx)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Applies `f(idx, γ, value)` to every mode in place.
    pub fn map_modes(&mut self, mut f: impl FnMut(usize, [f64; 3], [Complex64; 3]) -> [Complex64; 3]) {
        for idx in 0..self.grid.points() {
            let g = self.grid.wavevector(idx);
            let v = f(idx, g, self.mode(idx));
            self.set_mode(idx, v);
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        SpectralVectorField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|z| z * alpha).collect(),
        }
    }

    pub fn axpy(&self, alpha: f64, other: &SpectralVectorField) -> Self {
        assert!(self.grid.same_as(&other.grid), "fields on different grids");
        SpectralVectorField {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b * alpha)
                .collect(),
        }
    }
}

impl Add for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn add(self, rhs: &SpectralVectorField) -> SpectralVectorField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn sub(self, rhs: &SpectralVectorField) -> SpectralVectorField {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn neg(self) -> SpectralVectorField {
        self.scaled(-1.0)
    }
}

impl Mul<&SpectralVectorField> for f64 {
    type Output = SpectralVectorField;
    fn mul(self, rhs: &SpectralVectorField) -> SpectralVectorField {
        rhs.scaled(self)
    }
}

/// Forward transform of one real scalar component (normalized by 1/n³).
pub(crate) fn analyze_scalar(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.analyze(&mut buf);
    let scale = 1.0 / grid.points() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Forward transforms of two real scalars with one complex transform.
pub(crate) fn analyze_pair(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    grid.analyze(&mut buf);
    let scale = 0.5 / grid.points() as f64;
    let p = grid.points();
    let mut fa = vec![Complex64::default(); p];
    let mut fb = vec![Complex64::default(); p];
    for idx in 0..p {
        let z = buf[idx];
        let zm = buf[grid.mirror(idx)].conj();
        fa[idx] = (z + zm) * scale;
        // (z - zm) / (2i)
        let d = (z - zm) * scale;
        fb[idx] = Complex64::new(d.im, -d.re);
    }
    (fa, fb)
}

/// Synthesizes two Hermitian spectra at once; returns the real parts of
/// each synthesis. Imaginary residue of the individual spectra is dropped.
pub(crate) fn synthesize_pair(grid: &Grid, fa: &[Complex64], fb: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut buf: Vec<Complex64> = fa.iter().zip(fb).map(|(&x, &y)| x + i * y).collect();
    grid.synthesize(&mut buf);
    buf.into_iter().map(|z| (z.re, z.im)).unzip()
}

/// Synthesizes one real scalar, discarding the imaginary residue unchecked.
pub(crate) fn synthesize_real(grid: &Grid, f: &[Complex64]) -> Vec<f64> {
    let mut buf = f.to_vec();
    grid.synthesize(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Transforms a real field to Fourier coefficients.
pub fn fft_forward(f: &RealVectorField) -> SpectralVectorField {
    let grid = &f.grid;
    let p = grid.points();
    let mut data = Vec::with_capacity(3 * p);
    let (a, b) = analyze_pair(grid, f.component(0), f.component(1));
    data.extend(a);
    data.extend(b);
    data.extend(analyze_scalar(grid, f.component(2)));
    SpectralVectorField::from_parts(grid, data)
}

/// Synthesizes a real field, rejecting spectra whose synthesis carries an
/// imaginary residue above [`HERMITIAN_TOLERANCE`] relative to its size.
pub fn fft_inverse(spectrum: &SpectralVectorField) -> Result<RealVectorField> {
    let grid = &spectrum.grid;
    let p = grid.points();
    let mut data = Vec::with_capacity(3 * p);
    let mut residue: f64 = 0.0;
    let mut magnitude: f64 = 0.0;
    for c in 0..3 {
        let mut buf = spectrum.component(c).to_vec();
        grid.synthesize(&mut buf);
        for z in &buf {
            residue = residue.max(z.im.abs());
            magnitude = magnitude.max(z.norm());
        }
        data.extend(buf.into_iter().map(|z| z.re));
    }
    if residue > HERMITIAN_TOLERANCE * magnitude {
        return Err(Error::NonHermitianInput { residue, magnitude });
    }
    RealVectorField::new(grid, data)
}

/// Synthesis without the Hermitian check, for spectra produced by the
/// library's own symmetric operators.
pub(crate) fn synthesize_unchecked(spectrum: &SpectralVectorField) -> RealVectorField {
    let grid = &spectrum.grid;
    let (a, b) = synthesize_pair(grid, spectrum.component(0), spectrum.component(1));
    let mut data = a;
    data.extend(b);
    data.extend(synthesize_real(grid, spectrum.component(2)));
    RealVectorField::from_parts(grid, data)
}

/// Multiplies every coefficient by −iγ_axis (`axis` in 1..=3); the Nyquist
/// plane of that axis is zeroed so real fields stay real.
pub fn spectral_derivative(spectrum: &SpectralVectorField, axis: usize) -> Result<SpectralVectorField> {
    if !(1..=3).contains(&axis) {
        return Err(Error::InvalidAxis(axis));
    }
    let grid = &spectrum.grid;
    let p = grid.points();
    let mut out = spectrum.clone();
    for c in 0..3 {
        differentiate_in_place(grid, &mut out.data[c * p..(c + 1) * p], axis - 1);
    }
    Ok(out)
}

/// −iγ_axis multiplication of one scalar spectrum (0-based axis).
pub(crate) fn differentiate_in_place(grid: &Grid, values: &mut [Complex64], axis: usize) {
    let n = grid.n();
    let half = n / 2;
    let w = grid.wavenumbers();
    for (idx, z) in values.iter_mut().enumerate() {
        let m = grid.unravel(idx)[axis];
        if m == half {
            *z = Complex64::default();
        } else {
            let k = w[m];
            // −i k (a + ib) = k b − i k a
            *z = Complex64::new(k * z.im, -k * z.re);
        }
    }
}

/// Component-summed sup magnitude, Σ_i max_x |u_i(x)|.
pub fn sup_norm(f: &RealVectorField) -> f64 {
    (0..3)
        .map(|c| f.component(c).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .sum()
}

/// (Σ_i ∫ |u_i|² dx)^{1/2} by the rectangle rule, exact for band-limited data.
pub fn l2_norm(f: &RealVectorField) -> f64 {
    let sum: f64 = f.data.iter().map(|v| v * v).sum();
    (sum * f.grid.cell_volume()).sqrt()
}

/// L² norm computed from coefficients via Parseval.
pub fn spectral_l2_norm(spectrum: &SpectralVectorField) -> f64 {
    let sum: f64 = spectrum.data.iter().map(|z| z.norm_sqr()).sum();
    (PARSEVAL_SCALE * spectrum.grid.volume() * sum).sqrt()
}
