use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("kernel dimensions not monotone near eigenvalue {lambda}: {dims:?} (try retuning eig_cluster/rank_cut)")]
    StaircaseInconsistent { lambda: String, dims: Vec<usize> },

    #[error("invalid block pairing: {0}")]
    InvalidPairing(String),

    #[error("matrix is not G-Hamiltonian: {0}")]
    NotGHamiltonian(String),

    #[error("off-axis eigenvalues cannot be paired: {0}")]
    PairingFailure(String),

    #[error("metric is singular (min singular value {min_sv:e}, cutoff {cutoff:e})")]
    SingularMetric { min_sv: f64, cutoff: f64 },

    #[error("metric is not Hermitian: imaginary action {0:e}")]
    NonHermitianMetric(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("syntax error at offset {offset}: expected {}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
    },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("parity operator is not an involution")]
    ParityInvalid,

    #[error("parameter `{name}` evaluates to a non-real value {value}")]
    NonRealParameter { name: String, value: String },

    #[error("path parameter {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("gap has no interior minimum on [{0}, {1}]")]
    NoMinimum(f64, f64),

    #[error("schema: {0}")]
    Schema(String),

    #[error("at t = {t}: {source}")]
    AtPathPoint { t: f64, source: Box<Error> },
}

impl Error {
    /// Input/validation errors as opposed to numerical ones.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidInput(_)
            | Error::Syntax { .. }
            | Error::UnknownIdentifier(_)
            | Error::ParityInvalid
            | Error::NonRealParameter { .. }
            | Error::OutOfRange { .. }
            | Error::Schema(_)
            | Error::InvalidPairing(_) => true,
            Error::AtPathPoint { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::StaircaseInconsistent { .. } => "StaircaseInconsistent",
            Error::InvalidPairing(_) => "InvalidPairing",
            Error::NotGHamiltonian(_) => "NotGHamiltonian",
            Error::PairingFailure(_) => "PairingFailure",
            Error::SingularMetric { .. } => "SingularMetric",
            Error::NonHermitianMetric(_) => "NonHermitianMetric",
            Error::InsufficientData(_) => "InsufficientData",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownIdentifier(_) => "UnknownIdentifier",
            Error::ParityInvalid => "ParityInvalid",
            Error::NonRealParameter { .. } => "NonRealParameter",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NoMinimum(..) => "NoMinimum",
            Error::Schema(_) => "SchemaError",
            Error::AtPathPoint { source, .. } => source.code(),
        }
    }
}
