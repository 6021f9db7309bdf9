use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("tail mass {tail:.3e} above tolerance at N = {n}")]
    TailNotResolved { n: usize, tail: f64 },
    #[error("numerical rank {found} differs from expected {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("pole at modulus {0:.12} is not outside the closed unit disc")]
    PoleInsideDisc(f64),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("ambiguous eigenvalue grouping (relative gap {0:.3e})")]
    AmbiguousGrouping(f64),
    #[error("symbol is zero")]
    ZeroSymbol,
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("sigma_1^2 - sigma_2^2 = {0:.3e} is too small")]
    DegenerateSigmas(f64),
    #[error("x = {x} is within {margin:.1e} of a resonance")]
    ResonantX { x: f64, margin: f64 },
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("initial datum is not on the resonant leaf (ell_1 / Q^2 = {0:.3e})")]
    NotOnResonantLeaf(f64),
    #[error("eigenprojection crossing detected at t = {0}")]
    CrossingDetected(f64),
    #[error("unreliable fit (R^2 = {0:.4})")]
    FitUnreliable(f64),
    #[error("numerically singular matrix (condition {0:.3e})")]
    NumericalSingularity(f64),
    #[error("multiplicity > 1 is not supported: {0}")]
    UnsupportedMultiplicity(String),
    #[error("functional evaluation failed: {0}")]
    EvalFailure(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable variant name, used in machine-readable reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::TailNotResolved { .. } => "TailNotResolved",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::PoleInsideDisc(_) => "PoleInsideDisc",
            Error::InvalidSymbol(_) => "InvalidSymbol",
            Error::AmbiguousGrouping(_) => "AmbiguousGrouping",
            Error::ZeroSymbol => "ZeroSymbol",
            Error::DegenerateSpectrum(_) => "DegenerateSpectrum",
            Error::InconsistentInputs(_) => "InconsistentInputs",
            Error::DegenerateSigmas(_) => "DegenerateSigmas",
            Error::ResonantX { .. } => "ResonantX",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::NotOnResonantLeaf(_) => "NotOnResonantLeaf",
            Error::CrossingDetected(_) => "CrossingDetected",
            Error::FitUnreliable(_) => "FitUnreliable",
            Error::NumericalSingularity(_) => "NumericalSingularity",
            Error::UnsupportedMultiplicity(_) => "UnsupportedMultiplicity",
            Error::EvalFailure(_) => "EvalFailure",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
