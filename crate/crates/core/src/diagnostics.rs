use crate::field::{fft_forward, RealVectorField, SpectralVectorField};
use crate::nonlinear::{curl_spectral, divergence_spectral};

/// Per-window summary of the velocity state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Component-summed sup magnitude.
    pub sup_norm: f64,
    /// ½‖u‖²_L2
    pub l2_energy: f64,
    /// ½‖curl u‖²_L2
    pub enstrophy: f64,
    pub max_divergence: f64,
    pub picard_iters: u32,
    pub picard_final_residual: f64,
}

impl DiagnosticsRecord {
    /// ‖u‖_L2 recovered from the stored energy.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * self.l2_energy).sqrt()
    }
}

fn half_energy(s: &SpectralVectorField) -> f64 {
    let sum: f64 = s.data().iter().map(|z| z.norm_sqr()).sum();
    0.5 * s.grid().volume() * sum
}

pub fn diagnose(u: &RealVectorField, t: f64, picard_iters: u32, picard_final_residual: f64) -> DiagnosticsRecord {
    let s = fft_forward(u);
    let l2 = u.l2_norm();
    DiagnosticsRecord {
        t,
        sup_norm: u.sup_norm(),
        l2_energy: 0.5 * l2 * l2,
        enstrophy: half_energy(&curl_spectral(&s)),
        max_divergence: divergence_spectral(&s).max_abs,
        picard_iters,
        picard_final_residual,
    }
}
