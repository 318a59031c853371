use crate::verdict::Verdict;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GsfError {
    #[error("config error: {0}")]
    Config(String),

    #[error("gauge mismatch between operands")]
    GaugeMismatch,

    #[error("division by a non-invertible element: {verdict}")]
    NonInvertible { verdict: Verdict },

    #[error("operation requires the eps gauge, got {0}")]
    GaugeNotEps(String),

    #[error("expression parse error: {0}")]
    Parse(String),

    #[error("point outside domain: {0}")]
    DomainViolation(String),

    #[error("derivative moderateness failed at multi-index {alpha:?}: {verdict}")]
    NotModerate { alpha: Vec<usize>, verdict: Verdict },

    #[error("matrix nondegeneracy not certified: {verdict}")]
    Degenerate { verdict: Verdict },

    #[error("ill-conditioned moment system (cond ~ {cond:.3e}); try a smaller j")]
    IllConditioned { cond: f64 },

    #[error("unsupported distribution/mollifier combination: {0}")]
    UnsupportedDist(String),

    #[error("certificate radius search exhausted: {0}")]
    RadiusSearch(String),

    #[error("finiteness required by the Fermat certificate failed: {0}")]
    NotFinite(String),

    #[error("Newton stagnated: {0}")]
    NewtonStagnation(String),

    #[error("determinant lower bound violated: {0}")]
    DetBoundViolation(String),

    #[error("uniform positivity not certified at tested scale: {0}")]
    PositivityFailure(String),

    #[error("sign change of f' inside the cutoff window: {0}")]
    SignChange(String),

    #[error("properness table plateaued at radius {0}")]
    NotProper(f64),

    #[error("norm bound violated at (eps={eps:.3e}, |x|={x:.3e}): {msg}")]
    BoundViolation { eps: f64, x: f64, msg: String },

    #[error("homotopy continuation failed: {0}")]
    Continuation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}
