use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("kernel truncated: grid covers ±{covered:.3} but ±{required:.3} (4·w0) is required")]
    KernelTruncated { covered: f64, required: f64 },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("pitch mismatch: object pitch {object} m, kernel pitch {kernel} m")]
    PitchMismatch { object: f64, kernel: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("transduction efficiency {0} is beyond the beamsplitter model (must be < 1)")]
    BeyondBeamsplitter(f64),

    #[error("noiseless divergence: readout variance is zero")]
    NoiselessDivergence,

    #[error("singular inverse: |H| = {min_abs:e} < 1e-12; supply nsr > 0")]
    SingularInverse { min_abs: f64 },

    #[error("zero signal power")]
    ZeroSignalPower,

    #[error("undersampled chirp: {given} samples given, at least {required} required")]
    UndersampledChirp { given: usize, required: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config validation: {0}")]
    Validation(String),

    #[error("cell (d/w0={d_over_w0}, gain={gain_db} dB, loss={loss_db} dB, seed={seed}) failed: {source}")]
    Cell {
        d_over_w0: f64,
        gain_db: f64,
        loss_db: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad input (exit code 1) rather than a
    /// runtime failure (exit code 2).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. }
                | Error::Cell { .. }
                | Error::NoiselessDivergence
                | Error::SingularInverse { .. }
                | Error::ZeroSignalPower
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
