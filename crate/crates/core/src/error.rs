use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("input is zero or constant")]
    ZeroOrConstantInput,

    #[error("polynomial is not reduced (gcd(f, f_x, f_y) = {0})")]
    NotReduced(String),

    #[error("no free basis found ({0} minimal syzygy generators); supply a basis file")]
    NotFree(usize),

    #[error("module element is not homogeneous")]
    NotHomogeneous,

    #[error("Saito criterion failed: det(A) = {0} is not a constant multiple of f")]
    SaitoFail(String),

    #[error("bracket coefficients are not polynomial: {0}")]
    DivisionFail(String),

    #[error("syzygy identity fails for {0}")]
    BadSyzygy(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("b-function is zero (ideal not holonomic?) after degree {0}")]
    NonHolonomicOrZeroB(usize),

    #[error("operator has a nonzero class in D/(dx D + dy D)")]
    NotInImage,

    #[error("pair is not of the form (dx a, dy a)")]
    NotIntegrable,

    #[error("no preimage found up to degree cap {0}")]
    DegreeCapExceeded(usize),

    #[error("dimension conditions violated: {0:?}")]
    ConditionsViolated([bool; 3]),

    #[error("transfer failed: {0}")]
    InternalTransferFailure(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
