use thiserror::Error;

/// Errors raised anywhere in the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: relative anti-Hermitian part {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("eigendecomposition did not converge (relative residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("matrix has eigenvalue {eigenvalue:.3e} below the positivity floor")]
    NotPositive { eigenvalue: f64 },
    #[error("state is not a valid density matrix: {0}")]
    NotDensity(String),
    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("detuning of atom {atom} is zero; the dispersive model is undefined on resonance")]
    Resonant { atom: char },
    #[error("closed forms require identical atoms (g_a = g_b and Δ_a = Δ_b)")]
    NotIdenticalAtoms,
    #[error("Werner mixing parameter γ = {0} outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("Fock truncation n_max = {n_max} leaves tail mass {tail:.3e} > {tol:.0e}")]
    TruncationTooSmall { n_max: usize, tail: f64, tol: f64 },
    #[error("exact route refused: n_max = {n_max} exceeds {limit}")]
    ExactTooLarge { n_max: usize, limit: usize },
    #[error("series resolution too coarse: spacing {spacing:.3e} > FWHM/5; use at least {suggested_steps} steps")]
    ResolutionTooCoarse {
        spacing: f64,
        suggested_steps: usize,
    },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid scan spec: {0}")]
    InvalidScan(String),
    #[error("scan cell (intensity #{row}, tau #{col}) failed: {source}")]
    Cell {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
