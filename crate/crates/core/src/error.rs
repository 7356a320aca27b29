use thiserror::Error;

/// Errors raised by the filters, kernels and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch in {context}: expected {expected}, got {actual}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("spectrum is not Hermitian: imaginary residue {residue:e} after inverse transform")]
    NotHermitian { residue: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("adaptation diverged at block {block}")]
    Divergence { block: usize },

    #[error("weight spectrum violates the zero-tail constraint (residue {residue:e})")]
    ConstraintViolation { residue: f64 },

    #[error("step size outside the stability region (denominator {denominator:e})")]
    Unstable { denominator: f64 },

    #[error("trace too short: need {required} samples, have {available}")]
    InsufficientTrace { required: usize, available: usize },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("signal has zero power")]
    ZeroPower,

    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            context,
            expected,
            actual,
        })
    }
}
