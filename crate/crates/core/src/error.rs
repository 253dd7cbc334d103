use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} is not Hermitian (‖A − A*‖ = {norm:.3e})")]
    NotHermitian { what: &'static str, norm: f64 },

    #[error("matrix is not unitary (‖W*W − id‖ = {norm:.3e})")]
    NotUnitary { norm: f64 },

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error(
        "dynamics is not ergodic ({zero_eigen_count} eigenvalues near zero, \
         min stationary eigenvalue {min_stationary_eigenvalue:.3e})"
    )]
    NotErgodic {
        zero_eigen_count: usize,
        min_stationary_eigenvalue: f64,
    },

    #[error("operator is not centered: |tr[ρ_ss X]| = {value:.3e}")]
    NotCentered { value: f64 },

    #[error("tangent vector is not identifiable: ‖E_D(Ḋ)‖ = {norm:.3e}")]
    NotIdentifiable { norm: f64 },

    #[error("degenerate span: achieved rank {rank}, expected {expected}")]
    DegenerateSpan { rank: usize, expected: usize },

    #[error("span is not closed under the complex structure (real rank {real_rank}, complex rank {complex_rank})")]
    NotComplexClosed { real_rank: usize, complex_rank: usize },

    #[error("chart leaves the ergodic region at u = {u:?}, t = {t}")]
    ChartOutOfRange { u: Vec<f64>, t: f64 },

    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
