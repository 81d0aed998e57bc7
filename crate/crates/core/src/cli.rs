//! The `msns` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::io::{load_config, RunConfig};
use crate::operators::{probe_operator_norm, MultiplierReport, OperatorId, ProbeSpec};
use crate::runner::{resume_config, run_config, validation_suite, RunSummary};
use crate::timestepper::fit_q_ansatz;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "msns", version, about = "Mollified spectral Navier–Stokes solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// March the configured flow, writing diagnostics and checkpoints.
    Run {
        config: PathBuf,
        /// Overrides output.directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the exact-flow convergence suite and print the error table.
    Validate { config: PathBuf },
    /// Measure the B, E and S multipliers on seeded probe fields.
    ProbeOperators { config: PathBuf },
    /// Fit the uniform-decay ansatz u⁰(1 − t e^{−q}) at time t.
    FitQ {
        config: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Continue a run from a checkpoint.
    Resume {
        checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Exit code and stderr prefix for a library error.
pub fn classify(err: &Error) -> (i32, &'static str) {
    match err {
        Error::Io { .. }
        | Error::CheckpointMagic(_)
        | Error::CheckpointVersion(_)
        | Error::CheckpointCrc { .. }
        | Error::CheckpointLayout(_)
        | Error::MalformedCsv(_) => (EXIT_IO, "ERROR[io]"),
        Error::Config(_) | Error::ConfigParse(_) | Error::InvalidGrid(_) | Error::InvalidParameter(_) => {
            (EXIT_FAILURE, "ERROR[config]")
        }
        _ => (EXIT_FAILURE, "ERROR[converge]"),
    }
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// human output to `out` and errors to `err`. Returns the exit code.
pub fn dispatch_to<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let (code, prefix) = classify(&e);
            let _ = writeln!(err, "{prefix} {e}");
            code
        }
    }
}

/// [`dispatch_to`] on the process's standard streams.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(args, &mut stdout.lock(), &mut stderr.lock())
}

fn with_output(mut config: RunConfig, output: Option<PathBuf>) -> RunConfig {
    if let Some(dir) = output {
        config.output.directory = dir;
    }
    config
}

fn print_summary(out: &mut dyn Write, s: &RunSummary) {
    let _ = writeln!(
        out,
        "completed {} windows (from window {}) to t = {:.6}",
        s.windows, s.start_window, s.final_t
    );
    if let Some(r) = s.final_record {
        let _ = writeln!(
            out,
            "final sup_norm = {:.6e}, l2_energy = {:.6e}, max_divergence = {:.3e}",
            r.sup_norm, r.l2_energy, r.max_divergence
        );
    }
    let _ = writeln!(out, "diagnostics: {}", s.diagnostics_path.display());
    let _ = writeln!(out, "checkpoints written: {}", s.checkpoints.len());
}

fn print_report(out: &mut dyn Write, label: &str, r: &MultiplierReport) {
    let _ = writeln!(
        out,
        "{label:<10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>8}",
        r.max_multiplier, r.band_max_multiplier, r.max_ratio, r.min_ratio, r.mean_ratio, r.samples
    );
}

fn execute(command: Command, out: &mut dyn Write) -> crate::Result<i32> {
    match command {
        Command::Run { config, output } => {
            let config = with_output(load_config(&config)?, output);
            let (summary, _) = run_config(&config)?;
            print_summary(out, &summary);
            Ok(EXIT_OK)
        }
        Command::Resume {
            checkpoint,
            config,
            output,
        } => {
            let config = with_output(load_config(&config)?, output);
            let (summary, _) = resume_config(&config, &checkpoint)?;
            print_summary(out, &summary);
            Ok(EXIT_OK)
        }
        Command::Validate { config } => {
            let config = load_config(&config)?;
            let rows = validation_suite(&config)?;
            let _ = writeln!(
                out,
                "{:<14} {:>6} {:>8} {:>14} {:>14}  status",
                "flow", "nu", "windows", "max_sup_error", "max_div"
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<14} {:>6} {:>8} {:>14.6e} {:>14.6e}  {}",
                    r.name,
                    r.nu,
                    r.windows,
                    r.max_sup_error,
                    r.max_divergence,
                    if r.passed { "ok" } else { "FAIL" }
                );
            }
            let _ = writeln!(out, "tolerance: {:e}", config.validate.tolerance);
            match rows.iter().find(|r| !r.passed) {
                None => Ok(EXIT_OK),
                Some(r) => Err(Error::ValidationFailed(format!(
                    "{}: max sup error {:.3e} (tolerance {:.1e}), max div {:.3e}",
                    r.name, r.max_sup_error, config.validate.tolerance, r.max_divergence
                ))),
            }
        }
        Command::ProbeOperators { config } => {
            let config = load_config(&config)?;
            let grid = config.build_grid()?;
            let p = config.probe;
            let spec = ProbeSpec {
                seed: p.seed,
                count: p.count,
                k2_min: p.k2_min,
                k2_max: p.k2_max,
                amplitude: 1.0,
                mean: 0.0,
            };
            let _ = writeln!(
                out,
                "probe: seed {} count {} t {} band |γ|² ∈ [{}, {}] epsilon {} nu {}",
                p.seed, p.count, p.t, p.k2_min, p.k2_max, config.mollifier.epsilon, config.physics.nu
            );
            let _ = writeln!(
                out,
                "{:<10} {:>14} {:>14} {:>14} {:>14} {:>14} {:>8}",
                "operator", "max_mult", "band_max_mult", "max_ratio", "min_ratio", "mean_ratio", "samples"
            );
            for op in [OperatorId::B, OperatorId::E, OperatorId::S] {
                let r = probe_operator_norm(op, &spec, &grid, &config.physics, &config.mollifier, p.t)?;
                print_report(out, &op.to_string(), &r);
            }
            // Mean-dominated probes: E leaves γ = 0 untouched, so the ratio
            // approaches 1 however small ε is.
            let with_mean = ProbeSpec {
                mean: 1.0,
                amplitude: 1e-3,
                ..spec
            };
            let r = probe_operator_norm(OperatorId::E, &with_mean, &grid, &config.physics, &config.mollifier, p.t)?;
            print_report(out, "E(mean=1)", &r);
            Ok(EXIT_OK)
        }
        Command::FitQ { config, t } => {
            let config = load_config(&config)?;
            let grid = config.build_grid()?;
            let u0 = config.flow.build(&grid)?;
            let fit = fit_q_ansatz(&u0, t, &config.physics, &config.mollifier)?;
            let _ = writeln!(out, "t = {t:e}");
            let _ = writeln!(out, "q = {:.12}", fit.q);
            let _ = writeln!(out, "residual = {:.6e}", fit.residual);
            let _ = writeln!(out, "degenerate = {}", fit.degenerate);
            Ok(EXIT_OK)
        }
    }
}
