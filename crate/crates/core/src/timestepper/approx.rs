use crate::error::{Error, Result};
use crate::field::{fft_forward, synthesize_unchecked, RealVectorField};
use crate::nonlinear::{convective_spectral, DealiasPolicy};
use crate::operators::{apply_b, apply_e, apply_s_frozen, MollifierParams, PhysicalParams};

/// Upper end of the q search interval.
pub const Q_SEARCH_MAX: f64 = 50.0;

const COARSE_STEP: f64 = 0.5;
const GOLDEN_TOL: f64 = 1e-10;

/// Single evaluation of −tS^t[(u⁰·∇)u⁰] + E u⁰ + B_t u⁰, first-order
/// accurate in t. The frozen kernel is sampled at t★ = t/2.
pub fn approx_step(
    u0: &RealVectorField,
    t: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<RealVectorField> {
    let s = fft_forward(u0);
    let forcing = convective_spectral(&s, DealiasPolicy::default());
    let st = apply_s_frozen(&forcing, t, 0.5 * t, params, eps)?;
    let sum = &(&apply_e(&s, eps) + &apply_b(&s, t, params, eps)?) - &st;
    Ok(synthesize_unchecked(&sum))
}

/// Physical-space pieces of the q residual. With w = e^{−q},
///
/// ```text
/// R(q) = ‖(1 − t w)·A + (1 − w)·Sn − Bu‖₀
/// ```
///
/// where A = u⁰ − E u⁰, Sn = tS^t[(u⁰·∇)u⁰] and Bu = B_t u⁰.
#[derive(Clone, Debug)]
pub struct QResidualFields {
    pub t: f64,
    pub a: RealVectorField,
    pub sn: RealVectorField,
    pub bu: RealVectorField,
}

impl QResidualFields {
    pub fn residual(&self, q: f64) -> f64 {
        let w = (-q).exp();
        let (ca, cs) = (1.0 - self.t * w, 1.0 - w);
        let grid = self.a.grid();
        let p = grid.points();
        (0..3)
            .map(|c| {
                let (a, s, b) = (self.a.component(c), self.sn.component(c), self.bu.component(c));
                (0..p).map(|i| (ca * a[i] + cs * s[i] - b[i]).abs()).fold(0.0, f64::max)
            })
            .sum()
    }

    /// True when the residual does not depend on q at all.
    pub fn is_degenerate(&self) -> bool {
        let slope = self.a.scaled(self.t).axpy(1.0, &self.sn);
        slope.sup_norm() == 0.0
    }
}

pub fn q_residual_fields(
    u0: &RealVectorField,
    t: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<QResidualFields> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidTime(format!("fit time must be > 0 (got {t})")));
    }
    let s = fft_forward(u0);
    let a = &s - &apply_e(&s, eps);
    let forcing = convective_spectral(&s, DealiasPolicy::default());
    let sn = apply_s_frozen(&forcing, t, 0.5 * t, params, eps)?;
    let bu = apply_b(&s, t, params, eps)?;
    Ok(QResidualFields {
        t,
        a: synthesize_unchecked(&a),
        sn: synthesize_unchecked(&sn),
        bu: synthesize_unchecked(&bu),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QFit {
    pub q: f64,
    pub residual: f64,
    /// The residual is independent of q (for example u⁰ = 0).
    pub degenerate: bool,
}

/// Minimizes the residual of the uniform ansatz u = u⁰(1 − t e^{−q}) over
/// q ∈ [0, 50]. The residual is convex in e^{−q}, hence unimodal in q: a
/// coarse scan brackets the minimum and golden-section search refines it.
pub fn fit_q_ansatz(
    u0: &RealVectorField,
    t: f64,
    params: &PhysicalParams,
    eps: &MollifierParams,
) -> Result<QFit> {
    let fields = q_residual_fields(u0, t, params, eps)?;
    if fields.is_degenerate() {
        return Ok(QFit {
            q: 0.0,
            residual: fields.residual(0.0),
            degenerate: true,
        });
    }
    let steps = (Q_SEARCH_MAX / COARSE_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * COARSE_STEP).collect();
    let values: Vec<f64> = grid.iter().map(|&q| fields.residual(q)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("scan is non-empty");
    // Rounding flattens the residual once t·e^{−q} drops below machine
    // precision; a plateau reaching either end means no interior minimum.
    let tie = values[best] + 1e-14 * fields.bu.sup_norm().max(fields.a.sup_norm());
    let best = if values[steps] <= tie {
        steps
    } else if values[0] <= tie {
        0
    } else {
        best
    };
    if best == 0 || best == steps {
        return Err(Error::NoBracket {
            q: grid[best],
            residual: values[best],
        });
    }
    let (q, residual) = golden_section(|q| fields.residual(q), grid[best - 1], grid[best + 1]);
    let (q, residual) = if residual <= values[best] {
        (q, residual)
    } else {
        (grid[best], values[best])
    };
    Ok(QFit {
        q,
        residual,
        degenerate: false,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    let q = 0.5 * (lo + hi);
    (q, f(q))
}
