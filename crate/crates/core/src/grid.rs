//! Periodic-box discretization: wavenumber tables, dealiasing mask and the
//! 3D transform plans shared by every field on the grid.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// A cubic periodic box of edge `length` resolved by `n` modes per axis.
///
/// Cloning is cheap; clones share tables and FFT plans.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    length: f64,
    wavenumbers: Vec<f64>,
    keep: Vec<bool>,
    // Per-mode axis indices; avoids integer division in hot loops.
    axes: Vec<[u16; 3]>,
    // Kernel e^{+i x.k}: the "forward" analysis transform.
    analysis: Arc<dyn Fft<f64>>,
    // Kernel e^{-i x.k}: the synthesis transform.
    synthesis: Arc<dyn Fft<f64>>,
}

/// Shorthand for [`Grid::new`].
pub fn make_grid(n: usize, length: f64) -> Result<Grid> {
    Grid::new(n, length)
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("n must be at least 4 (got {n})")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n must be even (got {n})")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite (got {length})"
            )));
        }
        let base = 2.0 * PI / length;
        let half = n / 2;
        let wavenumbers: Vec<f64> = (0..n)
            .map(|i| {
                let m = if i < half { i as isize } else { i as isize - n as isize };
                base * m as f64
            })
            .collect();
        // Two-thirds rule, evaluated on integer mode numbers so the cut does
        // not depend on rounding of the 2π/L scale.
        let keep = (0..n)
            .map(|i| {
                let m = if i < half { i } else { n - i };
                3 * m <= 2 * half
            })
            .collect();
        if n > u16::MAX as usize {
            return Err(Error::InvalidGrid(format!("n must be at most {} (got {n})", u16::MAX)));
        }
        let mut axes = Vec::with_capacity(n * n * n);
        for i in 0..n as u16 {
            for j in 0..n as u16 {
                for k in 0..n as u16 {
                    axes.push([i, j, k]);
                }
            }
        }
        let mut planner = FftPlanner::new();
        let analysis = planner.plan_fft(n, FftDirection::Inverse);
        let synthesis = planner.plan_fft(n, FftDirection::Forward);
        Ok(Grid {
            inner: Arc::new(GridInner {
                n,
                length,
                wavenumbers,
                keep,
                axes,
                analysis,
                synthesis,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Fundamental wavenumber 2π/L.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.inner.length
    }

    /// Per-axis wavenumber table in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Per-axis two-thirds mask: `true` where the axis index survives.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.keep
    }

    /// Number of samples (and modes) per scalar component, n³.
    pub fn points(&self) -> usize {
        let n = self.inner.n;
        n * n * n
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(3)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.inner.n;
        (i * n + j) * n + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let [i, j, k] = self.inner.axes[idx];
        [i as usize, j as usize, k as usize]
    }

    /// Wavevector γ of the flat mode index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        let w = &self.inner.wavenumbers;
        [w[i], w[j], w[k]]
    }

    /// Physical coordinate of the flat sample index.
    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let [i, j, k] = self.unravel(idx);
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    #[inline]
    pub fn keeps(&self, idx: usize) -> bool {
        let [i, j, k] = self.unravel(idx);
        let keep = &self.inner.keep;
        keep[i] && keep[j] && keep[k]
    }

    /// True when any axis index of the mode sits on the Nyquist plane.
    #[inline]
    pub fn touches_nyquist(&self, idx: usize) -> bool {
        let half = self.inner.n / 2;
        self.unravel(idx).contains(&half)
    }

    /// Flat index of the mode at −γ.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.inner.n;
        let flip = |m: u16| if m == 0 { 0 } else { n - m as usize };
        let [i, j, k] = self.inner.axes[idx];
        (flip(i) * n + flip(j)) * n + flip(k)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }

    /// Unnormalized 3D transform with kernel e^{+i x.γ}, in place.
    pub(crate) fn analyze(&self, data: &mut [Complex64]) {
        let plan = self.inner.analysis.clone();
        self.transform_3d(data, plan.as_ref());
    }

    /// Unnormalized 3D transform with kernel e^{-i x.γ}, in place.
    pub(crate) fn synthesize(&self, data: &mut [Complex64]) {
        let plan = self.inner.synthesis.clone();
        self.transform_3d(data, plan.as_ref());
    }

    fn transform_3d(&self, data: &mut [Complex64], plan: &dyn Fft<f64>) {
        let n = self.inner.n;
        debug_assert_eq!(data.len(), n * n * n);
        SCRATCH.with(|cell| {
            let (scratch, buf) = &mut *cell.borrow_mut();
            scratch.resize(plan.get_inplace_scratch_len(), Complex64::default());
            buf.resize(LINES * n, Complex64::default());
            Self::transform_with(n, data, plan, scratch, buf);
        });
    }

    fn transform_with(
        n: usize,
        data: &mut [Complex64],
        plan: &dyn Fft<f64>,
        scratch: &mut [Complex64],
        buf: &mut [Complex64],
    ) {
        let n2 = n * n;
        // Last axis: contiguous lines.
        plan.process_with_scratch(data, scratch);
        // Middle axis, slab by slab; then the first axis over the whole array.
        for slab in data.chunks_exact_mut(n2) {
            strided_lines(slab, n, n, plan, scratch, buf);
        }
        strided_lines(data, n, n2, plan, scratch, buf);
    }
}

/// Lines gathered per batch by [`strided_lines`].
const LINES: usize = 16;

/// Transforms the `stride` interleaved lines of length `n` in `data`
/// (element `m` of line `c` sits at `m * stride + c`), a batch of adjacent
/// lines at a time so the working set stays in cache.
fn strided_lines(
    data: &mut [Complex64],
    n: usize,
    stride: usize,
    plan: &dyn Fft<f64>,
    scratch: &mut [Complex64],
    buf: &mut [Complex64],
) {
    for c0 in (0..stride).step_by(LINES) {
        let width = LINES.min(stride - c0);
        let lines = &mut buf[..width * n];
        for (m, row) in data.chunks_exact(stride).enumerate() {
            for (l, &z) in row[c0..c0 + width].iter().enumerate() {
                lines[l * n + m] = z;
            }
        }
        plan.process_with_scratch(lines, scratch);
        for (m, row) in data.chunks_exact_mut(stride).enumerate() {
            for (l, z) in row[c0..c0 + width].iter_mut().enumerate() {
                *z = lines[l * n + m];
            }
        }
    }
}

thread_local! {
    // Transform scratch and line-batch buffer, reused across calls.
    static SCRATCH: RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n && self.inner.length == other.inner.length
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}
