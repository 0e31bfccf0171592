//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Sampling grid violates the uniform symmetric-window contract.
    #[error("invalid pulse grid: {0}")]
    InvalidGrid(String),

    /// Spectrum container violates a structural invariant.
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    /// Two prescribed eigenvalues closer than the minimum separation.
    #[error(
        "duplicate eigenvalues: |lambda[{i}] - lambda[{j}]| = {sep:.3e} \
         below minimum separation {min_sep:.3e}"
    )]
    DuplicateEigenvalues {
        i: usize,
        j: usize,
        sep: f64,
        min_sep: f64,
    },

    /// A prescribed discrete amplitude is zero, so there is no soliton to add.
    #[error("discrete amplitude is zero at eigenvalue index {index}; soliton absent")]
    ZeroAmplitude { index: usize },

    /// Attempt to add an eigenvalue on top of an existing one.
    #[error("new eigenvalue {re}{im:+}i coincides with an existing eigenvalue")]
    EigenvalueCollision { re: f64, im: f64 },

    /// The ratio-update denominator vanished at a grid point.
    #[error("darboux update denominator vanished at t index {t_index} (stage {stage})")]
    DegenerateUpdate { stage: usize, t_index: usize },

    /// Scattering accumulators left the representable range.
    #[error(
        "scattering accumulators overflowed for Im(lambda)*T0 this large; \
         use the forward-backward method or shrink the window"
    )]
    Overflow,

    /// R11 vanished at the chosen split point.
    #[error("split lies at scattering singularity; retry with different split")]
    SplitSingularity,

    /// |a'| too small for a well-conditioned discrete amplitude.
    #[error(
        "near-degenerate eigenvalue at {re}{im:+}i; Q_d ill-conditioned (|a'| = {a_prime_abs:.3e})"
    )]
    NearDegenerateEigenvalue {
        re: f64,
        im: f64,
        a_prime_abs: f64,
    },

    #[error("malformed pulse file: {0}")]
    MalformedCsv(String),

    #[error("malformed spectrum file: {0}")]
    MalformedJson(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
