//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints its PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use msns::io::checkpoint_file_name;
use msns::operators::{duhamel_cumulative, probe_field};
use msns::runner::validation_suite;
use msns::timestepper::{apriori_monitor_with, march_with, probe_contraction, q_residual_fields, MarchOptions};
use msns::{
    abc_flow, apply_b, apply_e, apply_s_frozen, exact_decay_solution, fft_forward, fit_q_ansatz, make_grid,
    mollifier_value, oracle_integrate, picard_window, probe_operator_norm, random_schwartz_field, taylor_green,
    FlowKind, Grid, MollifierParams, OperatorId, OracleConfig, PhysicalParams, ProbeSpec, RealVectorField, RunConfig,
    SolveMode, SpectralVectorField, WindowConfig,
};
use nalgebra::Matrix3;
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn grid(n: usize) -> Grid {
    make_grid(n, 2.0 * PI).unwrap()
}

fn window_cfg() -> WindowConfig {
    WindowConfig {
        delta_t: 1e-2,
        ..WindowConfig::default()
    }
}

/// Marches `u0` and returns (max sup error against `exact` over windows,
/// max divergence over windows, stored states).
fn march_against(
    u0: &RealVectorField,
    horizon: f64,
    nu: f64,
    eps: f64,
    exact: impl Fn(f64) -> RealVectorField,
) -> (f64, f64, Vec<(f64, RealVectorField)>) {
    let params = PhysicalParams::new(nu).unwrap();
    let eps = MollifierParams::new(eps).unwrap();
    let mut err: f64 = 0.0;
    let mut div: f64 = 0.0;
    let traj = march_with(u0, 0, horizon, &window_cfg(), &params, &eps, MarchOptions { keep_every: 1 }, |o| {
        err = err.max((o.state - &exact(o.t)).sup_norm());
        div = div.max(o.record.max_divergence);
        Ok(())
    })
    .unwrap();
    (err, div, traj.states)
}

fn criterion_1(max_div: &mut f64) -> Outcome {
    let g = grid(32);
    let nu = 0.1;
    let u0 = taylor_green(&g, 1.0);
    let exact = |t: f64| exact_decay_solution(FlowKind::TaylorGreen, &u0, t, nu).unwrap();
    let start = Instant::now();
    let (march_err, div, states) = march_against(&u0, 1.0, nu, 1e-4, exact);
    let seconds = start.elapsed().as_secs_f64();
    *max_div = max_div.max(div);

    let oracle_cfg = OracleConfig {
        dt: 1e-3,
        keep_every: 10,
        ..OracleConfig::default()
    };
    let oracle = oracle_integrate(&u0, 1.0, &oracle_cfg, &PhysicalParams::new(nu).unwrap()).unwrap();
    let oracle_err = oracle
        .states
        .iter()
        .map(|(t, u)| (u - &exact(*t)).sup_norm())
        .fold(0.0, f64::max);
    assert_eq!(oracle.states.len(), states.len());
    let cross = states
        .iter()
        .zip(&oracle.states)
        .map(|((_, a), (_, b))| (a - b).sup_norm())
        .fold(0.0, f64::max);
    *max_div = max_div.max(oracle.records.iter().map(|r| r.max_divergence).fold(0.0, f64::max));
    Outcome::new(
        march_err <= 1e-3 && oracle_err <= 1e-6 && cross <= 1e-3 && seconds <= 60.0,
        format!(
            "Taylor-Green n=32 T=1: march err {march_err:.3e}, oracle err {oracle_err:.3e}, \
             march-oracle {cross:.3e}, runtime {seconds:.1} s"
        ),
    )
}

fn criterion_2(max_div: &mut f64) -> Outcome {
    let g = grid(32);
    let u0 = abc_flow(&g, 1.0, 1.0, 1.0);
    let viscous = |t: f64| exact_decay_solution(FlowKind::Abc, &u0, t, 0.1).unwrap();
    let (err, div, _) = march_against(&u0, 1.0, 0.1, 1e-4, viscous);
    let (drift, div0, _) = march_against(&u0, 0.5, 0.0, 1e-4, |_| u0.clone());
    *max_div = max_div.max(div).max(div0);
    Outcome::new(
        err <= 1e-3 && drift <= 1e-3,
        format!("ABC n=32 T=1: err {err:.3e}; inviscid drift over T=0.5: {drift:.3e}"),
    )
}

/// Largest divergence over every state of the validate suite.
fn validate_suite_divergence() -> f64 {
    let mut config = RunConfig::default();
    config.grid.n = 32;
    config.horizon = 1.0;
    config.physics.nu = 0.1;
    config.mollifier = MollifierParams::new(1e-4).unwrap();
    config.window = window_cfg();
    let rows = validation_suite(&config).unwrap();
    rows.iter().map(|r| r.max_divergence).fold(0.0, f64::max)
}

fn criteria_4_5(max_div: &mut f64) -> (Outcome, Outcome) {
    let g = grid(32);
    let params = PhysicalParams::new(0.1).unwrap();
    let eps = MollifierParams::default();
    let (mut l2_bad, mut sup_bad) = (Vec::new(), Vec::new());
    let (mut l2_worst, mut sup_worst) = (f64::MIN, f64::MIN);
    for seed in 0..10u64 {
        let u0 = random_schwartz_field(&g, seed, 1.0, 1.0).unwrap();
        let traj = march_with(&u0, 0, 0.5, &window_cfg(), &params, &eps, MarchOptions::default(), |_| Ok(())).unwrap();
        *max_div = max_div.max(traj.records.iter().map(|r| r.max_divergence).fold(0.0, f64::max));
        let report = apriori_monitor_with(&traj, 1e-6, 1e-10);
        for c in &report.checks {
            l2_worst = l2_worst.max(c.l2_after - c.l2_before);
            sup_worst = sup_worst.max(c.sup_after - c.sup_before);
        }
        l2_bad.extend(report.l2_violations().iter().map(|c| (seed, c.window)));
        sup_bad.extend(report.sup_violations().iter().map(|c| (seed, c.window)));
    }
    (
        Outcome::new(
            l2_bad.is_empty(),
            format!("10 random runs: largest l2 step change {l2_worst:.3e}, violations (seed, window) {l2_bad:?}"),
        ),
        Outcome::new(
            sup_bad.is_empty(),
            format!("10 random runs: largest sup step change {sup_worst:.3e}, violations (seed, window) {sup_bad:?}"),
        ),
    )
}

/// Spectral field whose every mode is the unit vector e_c.
fn unit_columns(g: &Grid, c: usize) -> SpectralVectorField {
    let p = g.points();
    let mut data = vec![Complex64::default(); 3 * p];
    data[c * p..(c + 1) * p].fill(Complex64::new(1.0, 0.0));
    SpectralVectorField::new(g, data).unwrap()
}

fn criterion_6() -> Outcome {
    let g = grid(32);
    let params = PhysicalParams::new(0.1).unwrap();
    let mut violations = 0usize;
    let mut checked = 0usize;
    for eps in [1e-4, 1e-3] {
        let eps = MollifierParams::new(eps).unwrap();
        for t in [0.0, 1e-2, 1.0] {
            let cols = |f: &dyn Fn(&SpectralVectorField) -> SpectralVectorField| -> Vec<SpectralVectorField> {
                (0..3).map(|c| f(&unit_columns(&g, c))).collect()
            };
            let b = cols(&|x| apply_b(x, t, &params, &eps).unwrap());
            let e = cols(&|x| apply_e(x, &eps));
            let s = cols(&|x| apply_s_frozen(x, t, t / 2.0, &params, &eps).unwrap());
            for idx in 0..g.points() {
                let matrix = |cols: &[SpectralVectorField]| {
                    Matrix3::from_fn(|i, j| {
                        let z = cols[j].mode(idx)[i];
                        assert_eq!(z.im, 0.0);
                        z.re
                    })
                };
                let (mb, me, ms) = (matrix(&b), matrix(&e), matrix(&s));
                let scalar = |m: &Matrix3<f64>| {
                    let d = m[(0, 0)];
                    let diagonal = (0..3).all(|i| (0..3).all(|j| m[(i, j)] == if i == j { d } else { 0.0 }));
                    diagonal.then_some(d)
                };
                let s_norm = ms.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let ok_b = scalar(&mb).is_some_and(|v| (0.0..1.0).contains(&v));
                let ok_e = scalar(&me).is_some_and(|v| v > 0.0 && v <= 1.0);
                let ok_s = s_norm <= t && (ms - ms.transpose()).abs().max() <= 1e-15;
                checked += 1;
                if !(ok_b && ok_e && ok_s) {
                    violations += 1;
                }
            }
        }
    }
    Outcome::new(
        violations == 0,
        format!("{checked} (mode, t, epsilon) cases on n=32: {violations} violations"),
    )
}

fn criterion_7() -> Outcome {
    let g = grid(32);
    let params = PhysicalParams::new(0.1).unwrap();
    let eps = MollifierParams::new(1e-3).unwrap();
    // High band: the |γ|² = 12 shell, where the E multiplier is constant.
    let k2 = 12.0;
    let spec = ProbeSpec {
        seed: 0,
        count: 100,
        k2_min: k2,
        k2_max: k2,
        amplitude: 1.0,
        mean: 0.0,
    };
    let report = probe_operator_norm(OperatorId::E, &spec, &g, &params, &eps, 1e-2).unwrap();
    let bound = -(-eps.epsilon.powi(3) / k2).exp_m1();
    let zero_mean = (0..spec.count as u64).all(|s| {
        let f = fft_forward(&probe_field(&g, &spec, s));
        f.mode(0).iter().all(|z| z.norm() <= 1e-15)
    });
    let with_mean = ProbeSpec {
        mean: 1.0,
        amplitude: 1e-3,
        ..spec
    };
    let counter = probe_operator_norm(OperatorId::E, &with_mean, &g, &params, &eps, 1e-2).unwrap();
    Outcome::new(
        report.samples == 100 && zero_mean && report.max_ratio <= bound + 1e-12 && counter.max_ratio > 0.9,
        format!(
            "E on |γ|²={k2}: max ratio {:.6e} vs bound {bound:.6e}; mean counterexample ratio {:.6}",
            report.max_ratio, counter.max_ratio
        ),
    )
}

fn criterion_8() -> Outcome {
    let g = grid(8);
    let params = PhysicalParams::new(0.01).unwrap();
    let eps = MollifierParams::new(0.5).unwrap();
    let t = 1.0;
    // Constant forcing on the single mode γ = (1, 1, 0) and its mirror,
    // polarized along e₃ so the projection leaves it unchanged.
    let idx = g.index(1, 1, 0);
    let mut forcing = SpectralVectorField::zeros(&g);
    let amp = Complex64::new(0.3, -0.7);
    forcing.set_mode(idx, [Complex64::default(), Complex64::default(), amp]);
    forcing.set_mode(g.mirror(idx), [Complex64::default(), Complex64::default(), amp.conj()]);
    let gamma = g.wavevector(idx);
    let a = params.nu * (gamma[0] * gamma[0] + gamma[1] * gamma[1] + gamma[2] * gamma[2]);
    let delta = mollifier_value(gamma, &eps);
    let analytic = (1.0 - (-a * t).exp()) / a * delta * amp.norm();
    let error = |substeps: usize| {
        let history: Vec<_> = (0..=substeps)
            .map(|j| (t * j as f64 / substeps as f64, forcing.clone()))
            .collect();
        let out = duhamel_cumulative(&history, &params, &eps).unwrap().pop().unwrap();
        (out.mode(idx)[2].norm() - analytic).abs()
    };
    let (e100, e200) = (error(100), error(200));
    let ratio = e100 / e200;
    Outcome::new(
        e200 <= 1e-8 && (ratio - 4.0).abs() <= 1.0,
        format!("single mode ν|γ|²={a}: error at 200 substeps {e200:.3e}, ratio 100→200 {ratio:.3}"),
    )
}

fn criterion_9() -> Outcome {
    let g = grid(32);
    let params = PhysicalParams::new(0.1).unwrap();
    let eps = MollifierParams::default();
    let u0 = taylor_green(&g, 1.0);
    let cfg = WindowConfig {
        mode: SolveMode::ModeSolved,
        picard_tol: 1e-10,
        ..window_cfg()
    };
    let (_, trace) = picard_window(&u0, &cfg, &params, &eps).unwrap();
    let ratios: Vec<f64> = [2e-2, 1e-2, 5e-3]
        .iter()
        .map(|&dt| probe_contraction(&u0, &WindowConfig { delta_t: dt, ..cfg }, &params, &eps, 1).unwrap())
        .collect();
    let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
    Outcome::new(
        trace.converged && trace.iterations() <= 10 && monotone,
        format!(
            "TG δt=1e-2: {} iterations, final residual {:.3e}; contraction at δt 2e-2/1e-2/5e-3: {:.3e} {:.3e} {:.3e}",
            trace.iterations(),
            trace.final_residual(),
            ratios[0],
            ratios[1],
            ratios[2]
        ),
    )
}

fn criterion_10() -> Outcome {
    let g = grid(32);
    let nu = 0.1;
    let params = PhysicalParams::new(nu).unwrap();
    let eps = MollifierParams::default();
    let u0 = taylor_green(&g, 1.0);
    let delta = mollifier_value([1.0, 1.0, 0.0], &eps);
    let sup0 = u0.sup_norm();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for t in [1e-3, 1e-2, 5e-2] {
        let fit = fit_q_ansatz(&u0, t, &params, &eps).unwrap();
        // Library residual and closed-form residual, each scanned in 0.01 steps.
        let fields = q_residual_fields(&u0, t, &params, &eps).unwrap();
        let analytic = |q: f64| delta * (1.0 - t * (-q).exp() - (-2.0 * nu * t).exp()).abs() * sup0;
        let scan = |f: &dyn Fn(f64) -> f64| {
            (0..=5000)
                .map(|i| i as f64 * 0.01)
                .min_by(|a, b| f(*a).total_cmp(&f(*b)))
                .unwrap()
        };
        let q_lib = scan(&|q| fields.residual(q));
        let q_exact = scan(&analytic);
        let dev = (fit.q - q_lib).abs().max((fit.q - q_exact).abs());
        worst = worst.max(dev);
        lines.push(format!("t={t:e}: q={:.6} scan {q_lib:.2} closed-form scan {q_exact:.2}", fit.q));
    }
    Outcome::new(worst <= 0.01, format!("{}; worst deviation {worst:.2e}", lines.join("; ")))
}

fn cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_msns"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = "horizon = 0.1\n[grid]\nn = 16\n[flow]\nkind = \"random_schwartz\"\nseed = 42\n\
                  decay_scale = 1.0\namplitude = 1.0\n[output]\ncheckpoint_every = 3\n";
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, config).unwrap();
    let path = |p: &Path| p.to_str().unwrap().to_owned();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ok = cli(&["run", &path(&cfg), "--output", &path(&a)]) && cli(&["run", &path(&cfg), "--output", &path(&b)]);
    let csv = |d: &Path| fs::read(d.join("diagnostics.csv")).unwrap_or_default();
    let identical = ok && !csv(&a).is_empty() && csv(&a) == csv(&b);
    // Resume b from window 3 and compare against the uninterrupted run.
    let resumed = cli(&[
        "resume",
        &path(&b.join(checkpoint_file_name(3))),
        "--config",
        &path(&cfg),
        "--output",
        &path(&b),
    ]);
    let equivalent = resumed
        && csv(&a) == csv(&b)
        && fs::read(a.join(checkpoint_file_name(9))).ok() == fs::read(b.join(checkpoint_file_name(9))).ok();
    Outcome::new(
        identical && equivalent,
        format!("two runs bitwise identical: {identical}; resume from window 3 equivalent: {equivalent}"),
    )
}

fn main() {
    let mut div_runs: f64 = 0.0;
    // Timed first so the runtime figure is not inflated by parallel work.
    let c1 = criterion_1(&mut div_runs);
    let (c2, c45, suite_div, others) = std::thread::scope(|s| {
        let h2 = s.spawn(|| {
            let mut d = 0.0;
            (criterion_2(&mut d), d)
        });
        let h45 = s.spawn(|| {
            let mut d = 0.0;
            (criteria_4_5(&mut d), d)
        });
        let h3 = s.spawn(validate_suite_divergence);
        let rest = s.spawn(|| {
            [criterion_6(), criterion_7(), criterion_8(), criterion_9(), criterion_10(), criterion_11()]
        });
        (h2.join().unwrap(), h45.join().unwrap(), h3.join().unwrap(), rest.join().unwrap())
    });
    let ((c2, d2), ((c4, c5), d45)) = (c2, c45);
    div_runs = div_runs.max(d2).max(d45);
    let c3 = Outcome::new(
        suite_div <= 1e-8 && div_runs <= 1e-8,
        format!("max|div u| validate suite {suite_div:.3e}, marches and oracle {div_runs:.3e}"),
    );
    let [c6, c7, c8, c9, c10, c11] = others;
    let all = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11];
    for (i, c) in all.iter().enumerate() {
        println!("criterion {}: {} {}", i + 1, if c.pass { "PASS" } else { "FAIL" }, c.detail);
    }
    let failed: Vec<usize> = all.iter().enumerate().filter(|(_, c)| !c.pass).map(|(i, _)| i + 1).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
