use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("grading parameter must be nonzero")]
    ZeroGradingParameter,
    #[error("affine map needs a nonzero dilation factor")]
    ZeroDilation,
    #[error("unknown generator `{0}` for preset {1}")]
    UnknownGenerator(String, String),
    #[error("state is not in the {0} basis: {1}")]
    BasisMismatch(String, String),
    #[error("vector is not homogeneous")]
    NotHomogeneous,
    #[error("invalid degree window [{0}, {1}]")]
    InvalidWindow(i64, i64),
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("points {0} and {1} have equal modulus; the radially ordered series does not apply")]
    EqualModuli(usize, usize),
    #[error("series did not converge: tail {tail:.3e} above tolerance {tol:.3e} at degree cap {cap}")]
    NonConvergent { tail: f64, tol: f64, cap: i64 },
    #[error("associativity domain violated: max|w| = {max_w} is not below min|z_i - z_(m+1)| = {min_gap}")]
    DomainViolation { max_w: f64, min_gap: f64 },
    #[error("Laurent expansion is not valid on the contour: {0}")]
    ExpansionDomainMismatch(String),
    #[error("quadrature did not converge: difference {diff:.3e} above {tol:.3e}")]
    NonConvergentQuadrature { diff: f64, tol: f64 },
    #[error("weight projection leaked {leak:.3e} into other degrees (tolerance {tol:.3e})")]
    NotConcentrated { leak: f64, tol: f64 },
    #[error("open set is not contained in the target")]
    NotASubset,
    #[error("open sets are not disjoint")]
    NotDisjoint,
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("exact evaluation unavailable: {0}")]
    ExactPathUnavailable(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
