use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains non-finite samples")]
    NonFinite,

    #[error("field shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("spectrum is not Hermitian: imaginary residue {residue:.3e} relative to magnitude {magnitude:.3e}")]
    NonHermitianInput { residue: f64, magnitude: f64 },

    #[error("axis must be 1, 2 or 3 (got {0})")]
    InvalidAxis(usize),

    #[error("Leray kernel is undefined at the zero wavenumber")]
    ZeroWavenumber,

    #[error("invalid time argument: {0}")]
    InvalidTime(String),

    #[error("forcing history is empty")]
    EmptyHistory,

    #[error("forcing history timestamps must be strictly increasing (entry {index})")]
    NonMonotoneHistory { index: usize },

    #[error("forcing history must span [0, {t}], got [{first}, {last}]")]
    HistorySpan { t: f64, first: f64, last: f64 },

    #[error("input is not divergence-free: max |div u| = {max_div:.3e} exceeds {tolerance:.1e}")]
    NotDivergenceFree { max_div: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "Picard iteration did not converge in window {window} after {iterations} iterations \
         (residual {residual:.3e}, contraction estimate {contraction})"
    )]
    NonConvergence {
        window: usize,
        iterations: usize,
        residual: f64,
        contraction: String,
    },

    #[error("unsupported flow kind for this operation: {0}")]
    UnsupportedFlow(String),

    #[error("no interior minimum of the q residual in [0, 50] (boundary q = {q}, residual {residual:.3e})")]
    NoBracket { q: f64, residual: f64 },

    #[error("CFL guard tripped: sup|u| dt n / L = {courant:.3} exceeds 0.5")]
    Cfl { courant: f64 },

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("configuration parse error: {0}")]
    ConfigParse(String),

    #[error("malformed diagnostics CSV: {0}")]
    MalformedCsv(String),

    #[error("checkpoint has bad magic bytes {0:?}")]
    CheckpointMagic([u8; 4]),

    #[error("unsupported checkpoint format version {0}")]
    CheckpointVersion(u32),

    #[error("checkpoint CRC mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    CheckpointCrc { stored: u32, computed: u32 },

    #[error("checkpoint payload is inconsistent: {0}")]
    CheckpointLayout(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
