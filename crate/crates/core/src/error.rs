use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("potential singular or solution blow-up at x = {x:.6}: {detail}")]
    Singular { x: f64, detail: String },

    #[error("step size underflow at x = {x:.6}")]
    StepSizeUnderflow { x: f64 },

    #[error("potential is not real-valued (max |Im V| = {max_imag:.3e})")]
    NotReal { max_imag: f64 },

    #[error("E = {energy} is not an eigenvalue (|D| = {residual:.3e}, tolerance {tolerance:.3e})")]
    NotAnEigenvalue {
        energy: Complex64,
        residual: f64,
        tolerance: f64,
    },

    #[error("ambiguous winding number {value} (not within 0.05 of an integer)")]
    AmbiguousWinding { value: Complex64 },

    #[error("root on contour: refinement stalled near E = {near} after {retries} perturbations")]
    RootOnContour { near: Complex64, retries: usize },

    #[error("Wronskian vanishes on (a,b) near x = {x:.6}")]
    WronskianVanishes { x: f64 },

    #[error("factorization energies must differ (alpha1 = alpha2 = {0})")]
    EqualFactorizationEnergies(Complex64),

    #[error("E = {0} equals a factorization energy; use darboux_exceptional")]
    ExceptionalEnergy(Complex64),

    #[error("alpha = {alpha} does not match level {index}: {detail}")]
    AlphaMismatch {
        alpha: Complex64,
        index: usize,
        detail: String,
    },

    #[error("eigenvalue index {0} out of computed spectrum range")]
    IndexOutOfRange(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("regularity violated: {0}")]
    Regularity(String),

    #[error("node of the reference solution at x = {x:.6}; reduction-of-order integral diverges")]
    NodeInSolution { x: f64 },

    #[error("E = {0} is not a spectral point")]
    NotSpectralPoint(Complex64),

    #[error("chain residual exceeds tolerance: {0}")]
    ChainResidual(String),

    #[error("chain did not shorten: multiplicity {before} -> {after}")]
    ChainDidNotShorten { before: usize, after: usize },

    #[error("{what}: residual {value:.3e} exceeds {tolerance:.1e}")]
    Residual {
        what: String,
        value: f64,
        tolerance: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Config-type errors map to a distinct exit status in the CLI.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::EqualFactorizationEnergies(_) | Error::InvalidInterval(_)
        )
    }
}
