use thiserror::Error;

/// Precision contract `(D, N)`: t-adic degree bound and π-adic precision.
pub type Precision = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// No stabilization layer was found below the working precision.
    #[error("quotient is not certified finite length at precision {precision:?}{}", degree.map(|d| format!(" (homological degree {d})")).unwrap_or_default())]
    NotFiniteLength {
        precision: Precision,
        degree: Option<i32>,
    },

    /// The π-adic (p-adic) precision is exhausted before the computation certifies.
    #[error("p-adic precision {pi_precision} insufficient: {reason}")]
    PrecisionInsufficient { pi_precision: u32, reason: String },

    #[error("germ is smooth at the origin (mu = 0)")]
    SmoothGerm,

    #[error("jet bound violated: ord(g - f) = {order} < {bound}")]
    JetBoundViolated { order: u32, bound: u32 },

    #[error("linear solve failed at step {step}: residual not in the image of the Jacobian")]
    LinearSolveFailed { step: usize },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("all {samples} samples failed")]
    AllSamplesFailed { samples: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
