use thiserror::Error;

/// Errors raised by the observer design and simulation toolkit.
///
/// Every variant maps to a stable machine-readable code through
/// [`DuioError::code`], which front ends use in reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DuioError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigen-solver failure: {0}")]
    EigenSolverFailure(String),

    #[error(
        "lyapunov_unstable: spectral abscissa {abscissa:.3e} is not in the open left half-plane"
    )]
    LyapunovUnstable { abscissa: f64 },

    #[error("lyapunov_ill_conditioned: spectral separation {separation:.3e} is numerically zero")]
    LyapunovIllConditioned { separation: f64 },

    #[error("not_detectable: unobservable mode with real part {real_part:.6e} is not stable")]
    NotDetectable { real_part: f64 },

    #[error("margin_unreachable: requested margin {requested}, fixed modes allow at most {achievable:.6e}")]
    MarginUnreachable { requested: f64, achievable: f64 },

    #[error("requires_symmetric: asymmetry {asymmetry:.3e}")]
    RequiresSymmetric { asymmetry: f64 },

    #[error("requires_connectivity: topology {index} is not connected")]
    RequiresConnectivity { index: usize },

    #[error("requires_strong_connectivity: directed graph is not strongly connected")]
    RequiresStrongConnectivity,

    #[error("non_simple_zero_eigenvalue: zero eigenvalue has multiplicity {multiplicity}")]
    NonSimpleZeroEigenvalue { multiplicity: usize },

    #[error("unsolvable_decoupling: node {node} has rank(C B_bar) = {rank_cb} but rank(B_bar) = {rank_b}")]
    UnsolvableDecoupling {
        node: usize,
        rank_cb: usize,
        rank_b: usize,
    },

    #[error("not_jointly_detectable: common undetectable subspace of dimension {witness_dim}")]
    NotJointlyDetectable { witness_dim: usize },

    #[error(
        "lmi_scaling_failed: sum of Lambda_i still not negative definite at beta = {beta:.3e}"
    )]
    LmiScalingFailed { beta: f64 },

    #[error("no_certificate: the LMI verdict is negative")]
    NoCertificate,

    #[error("chi_too_small: smallest eigenvalue of the decay matrix is {min_eigenvalue:.3e}")]
    ChiTooSmall { min_eigenvalue: f64 },

    #[error("mode_mismatch: {0}")]
    ModeMismatch(String),

    #[error("blow_up: non-finite state at t = {time:.6}")]
    BlowUp { time: f64 },

    #[error(
        "step_too_large: step {step:.3e} exceeds the RK4 stability limit {max_stable_step:.3e}"
    )]
    StepTooLarge { step: f64, max_stable_step: f64 },

    #[error("io: {0}")]
    Io(String),
}

impl DuioError {
    /// Stable short identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            DuioError::DimensionMismatch(_) => "dimension_mismatch",
            DuioError::InvalidArgument(_) => "invalid_argument",
            DuioError::EigenSolverFailure(_) => "eigen_solver_failure",
            DuioError::LyapunovUnstable { .. } => "lyapunov_unstable",
            DuioError::LyapunovIllConditioned { .. } => "lyapunov_ill_conditioned",
            DuioError::NotDetectable { .. } => "not_detectable",
            DuioError::MarginUnreachable { .. } => "margin_unreachable",
            DuioError::RequiresSymmetric { .. } => "requires_symmetric",
            DuioError::RequiresConnectivity { .. } => "requires_connectivity",
            DuioError::RequiresStrongConnectivity => "requires_strong_connectivity",
            DuioError::NonSimpleZeroEigenvalue { .. } => "non_simple_zero_eigenvalue",
            DuioError::UnsolvableDecoupling { .. } => "unsolvable_decoupling",
            DuioError::NotJointlyDetectable { .. } => "not_jointly_detectable",
            DuioError::LmiScalingFailed { .. } => "lmi_scaling_failed",
            DuioError::NoCertificate => "no_certificate",
            DuioError::ChiTooSmall { .. } => "chi_too_small",
            DuioError::ModeMismatch(_) => "mode_mismatch",
            DuioError::BlowUp { .. } => "blow_up",
            DuioError::StepTooLarge { .. } => "step_too_large",
            DuioError::Io(_) => "io",
        }
    }

    /// True for errors that report a violated existence or design condition
    /// rather than malformed input.
    pub fn is_condition_failure(&self) -> bool {
        matches!(
            self,
            DuioError::UnsolvableDecoupling { .. }
                | DuioError::NotJointlyDetectable { .. }
                | DuioError::NotDetectable { .. }
                | DuioError::LmiScalingFailed { .. }
                | DuioError::NoCertificate
                | DuioError::ChiTooSmall { .. }
                | DuioError::LyapunovUnstable { .. }
                | DuioError::BlowUp { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, DuioError>;
