use thiserror::Error;

use crate::numtheory::Prime;

/// Errors produced by the toolkit.
///
/// Variants map onto the CLI status codes through [`Error::is_unsupported`]:
/// anything outside the supported class of inputs is "unsupported input",
/// the rest are genuine computation failures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cofactor {0} left after trial division is not certifiably prime")]
    CompositeResidue(String),
    #[error("zero has no valuation")]
    ZeroInput,
    #[error("Jacobi symbol needs an odd positive modulus, got {0}")]
    EvenModulus(u64),
    #[error("{0} is not squarefree")]
    NotSquarefree(i64),
    #[error("singular Weierstrass equation (discriminant 0)")]
    SingularCurve,
    #[error("prime {0} is not supported here")]
    UnsupportedPrime(Prime),
    #[error("model is not minimal at {0}")]
    NonMinimalModel(Prime),
    #[error("prime {0} is above the point-counting bound")]
    PrimeTooLarge(u64),
    #[error("additive reduction at {0}: conductor exponent not supported")]
    UnsupportedReduction(Prime),
    #[error("no local root number rule covers the place {place} ({reason})")]
    UnsupportedPlace { place: Prime, reason: &'static str },
    #[error("twist formula hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("{requested} terms exceed the coefficient budget of {budget}")]
    TermBudget { requested: usize, budget: usize },
    #[error("auxiliary prime {0} is a bad prime of the curve")]
    BadAuxPrime(u64),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("generators {0} and {1} do not commute")]
    NonCommutingAction(usize, usize),
    #[error("generator {0} does not square to the identity")]
    NonInvolutiveAction(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("curve table, line {line}: {msg}")]
    CurveTable { line: usize, msg: String },
    #[error("unknown curve label {0:?}")]
    UnknownLabel(String),
    #[error("arbitrary-precision arithmetic failed: {0}")]
    Precision(String),
    #[error("character {character}: {source}")]
    InCharacter { character: String, source: Box<Error> },
}

impl Error {
    /// True for errors that mean "outside the supported input class" rather
    /// than "the computation ran and something is wrong".
    pub fn is_unsupported(&self) -> bool {
        match self {
            Error::InCharacter { source, .. } => source.is_unsupported(),
            Error::Precision(_) | Error::NotOnCurve => false,
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
