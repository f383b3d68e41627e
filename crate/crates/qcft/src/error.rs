use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A†| = {asymmetry:.3e} exceeds {tol:.1e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("dimension mismatch: {context} (got {got}, expected {expected})")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("operator has eigenvalue {eigenvalue:.3e} below the negativity floor {floor:.1e}")]
    NotPositive { eigenvalue: f64, floor: f64 },

    #[error("trace = {trace:.12} is not 1 within {tol:.1e}")]
    NotUnitTrace { trace: f64, tol: f64 },

    #[error("Kraus set is not trace-preserving: deviation {deviation:.3e} exceeds {tol:.1e}")]
    NotTracePreserving { deviation: f64, tol: f64 },

    #[error("map is not completely positive: Choi eigenvalue {eigenvalue:.3e}")]
    NotCompletelyPositive { eigenvalue: f64 },

    #[error("state lies outside the support of the reference: overlap defect {defect:.3e}")]
    SupportViolation { defect: f64 },

    #[error("reference state is rank deficient: smallest eigenvalue {min_eigenvalue:.3e}")]
    RankDeficientReference { min_eigenvalue: f64 },

    #[error("backward transition probability {value:.3e} is numerically zero; ratio undefined")]
    DegenerateBackward { value: f64 },

    #[error("no backward atom for sigma = ({sigma_r:.6}, {sigma_i:.6}) with forward weight {forward_weight:.3e}")]
    MissingAtom {
        sigma_r: f64,
        sigma_i: f64,
        forward_weight: f64,
    },

    #[error("measurement set is not a POVM: completeness defect {defect:.3e}")]
    NotPovm { defect: f64 },

    #[error("channel is not covariant: defect {defect:.3e} at parameter {theta}")]
    NotCovariant { defect: f64, theta: f64 },

    #[error("reference state does not commute with the generator: defect {defect:.3e}")]
    ReferenceNotCommuting { defect: f64 },

    #[error("state is not pure: largest eigenvalue {largest:.12}")]
    NotPure { largest: f64 },

    #[error("unitary violates energy conservation: defect {defect:.3e}")]
    EnergyConservationViolated { defect: f64 },

    #[error("Fock truncation insufficient: fixed-point residual {residual:.3e} exceeds {tol:.1e}")]
    TruncationInsufficient { residual: f64, tol: f64 },

    #[error("integration step too large: eigenvalue {eigenvalue:.3e} at t = {time}")]
    StepTooLarge { eigenvalue: f64, time: f64 },

    #[error("inconsistent measurement labels: {0}")]
    InconsistentLabels(String),

    #[error("{path}:{line}: {msg}")]
    ConfigParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("missing config key `{0}`")]
    ConfigMissingKey(String),

    #[error("invalid value for config key `{key}`: {msg}")]
    ConfigBadValue { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
