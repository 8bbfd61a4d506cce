use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The Fock expansion still carries more than `eps` probability mass
    /// beyond the requested cutoff.
    #[error(
        "truncation insufficient: tail mass {tail:.3e} beyond level {cutoff} exceeds {eps:.1e}"
    )]
    TruncationInsufficient { cutoff: usize, tail: f64, eps: f64 },

    #[error("Fock index {index} out of range for cutoff {cutoff}")]
    IndexOutOfRange { index: usize, cutoff: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The alternating coefficient sum lost too many significant digits.
    #[error("witness coefficient c[w={w}, n={n}] unstable: estimated error {estimate:.3e}")]
    Instability { w: f64, n: usize, estimate: f64 },

    /// Displacing the state pushes probability beyond the witness cutoff.
    #[error("displacement headroom insufficient: need cutoff {required}, have {available} (tail {tail:.3e})")]
    HeadroomInsufficient {
        required: usize,
        available: usize,
        tail: f64,
    },

    #[error("non-real expectation value: imaginary part {imag:.3e}")]
    NonReal { imag: f64 },

    #[error("ill-conditioned evaluation: estimated absolute error {estimate:.3e}")]
    IllConditioned { estimate: f64 },

    #[error("cutoff {cutoff} insufficient: extremum of the spectrum lies on the boundary")]
    CutoffInsufficient { cutoff: usize },

    #[error("root bracketing failed on [{lo}, {hi}]")]
    RootBracketing { lo: f64, hi: f64 },

    #[error("no bounds available for {0}")]
    BoundsMissing(String),

    #[error("schema mismatch: expected version {expected}, found {found}")]
    SchemaMismatch { expected: u32, found: u32 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
