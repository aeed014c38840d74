use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value from {what} at x = {point:?}")]
    Evaluation { what: String, point: Vec<f64> },

    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    /// The Jacobian's eigenvector matrix is too ill-conditioned to treat it as diagonalizable.
    #[error(
        "Jacobian is (numerically) defective: eigenvector condition number {condition:.3e}; \
         use the flow-map oracle route instead"
    )]
    DefectiveJacobian { condition: f64 },

    #[error("cannot identify slow directions: {near_zero} near-zero eigenvalues, expected {expected:?}")]
    AmbiguousSlowDirection { near_zero: usize, expected: Option<usize> },

    #[error("local frame is singular: v . gamma' = {0:.3e}")]
    SingularFrame(f64),

    #[error("manifold is not attracting: transverse eigenvalue {lambda:.6e} has non-negative real part")]
    UnstableManifold { lambda: f64 },

    #[error("step size underflow at t = {t:.6e} (h = {step:.3e})")]
    Stiffness { t: f64, step: f64 },

    #[error("outer flow did not settle before t_max = {t_max} (residual {residual:.3e})")]
    NoConvergence { t_max: f64, residual: f64 },

    #[error("replicate {replicate} left the finite state space at step {step}")]
    BlowUp { replicate: usize, step: usize },

    #[error("point is outside the model's domain: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn eval(what: impl Into<String>, point: &[f64]) -> Self {
        Error::Evaluation {
            what: what.into(),
            point: point.to_vec(),
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_))
    }
}
