use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the crate.
///
/// Several variants (`NotAbsolutelyIrreducible`, `WitnessNotFound`,
/// `SolvableWitnessNotFound`, `NoInfiniteOrderElement`, `NotDense`,
/// `NoSurjectivePrimeFound`) are signals that the input group is not Zariski
/// dense rather than programming errors; see [`Error::signals_not_dense`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not invertible modulo {modulus}")]
    NotInvertibleMod { modulus: u64 },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("generator {0} does not have determinant 1")]
    NotDeterminantOne(usize),
    #[error("generator index {index} out of range (group has {count} generators)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("unknown catalog group `{0}`")]
    UnknownName(String),
    #[error("parameter {0} is odd; h2(t) has integral entries only for even t")]
    Parity(i64),
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("matrix is not a transvection")]
    NotTransvection,
    #[error("no element of infinite order found within budget")]
    NoInfiniteOrderElement,
    #[error("group is not absolutely irreducible (enveloping algebra has dimension {dimension})")]
    NotAbsolutelyIrreducible { dimension: usize },
    #[error("sieve `{sieve}` does not apply in degree {degree}")]
    DegreeSkip { sieve: &'static str, degree: usize },
    #[error("no witness found for sieve `{0}` within budget")]
    WitnessNotFound(&'static str),
    #[error("no non-trivial tree commutator found within budget")]
    SolvableWitnessNotFound,
    #[error("orbit of size {points} exceeds the orbit cap")]
    OrbitTooLarge { points: u128 },
    #[error("degree {0} is not prime")]
    DegreeNotPrime(usize),
    #[error("no exact order oracle is feasible for modulus {0}")]
    OrderOracleUnavailable(u64),
    #[error("image modulo {0} is too large to enumerate")]
    EnumerationTooLarge(u64),
    #[error("no prime p > 3 with surjective image found among the scanned primes")]
    NoSurjectivePrimeFound,
    #[error("group is not dense: {0}")]
    NotDense(String),
    #[error("degree 2 groups only admit prime moduli, got {0}")]
    DegreeTwoComposite(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors that indicate the input is not Zariski dense.
    pub fn signals_not_dense(&self) -> bool {
        matches!(
            self,
            Error::NotAbsolutelyIrreducible { .. }
                | Error::WitnessNotFound(_)
                | Error::SolvableWitnessNotFound
                | Error::NoInfiniteOrderElement
                | Error::NotDense(_)
                | Error::NoSurjectivePrimeFound
        )
    }

    /// Stable machine-readable tag used in JSON reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotInvertibleMod { .. } => "NotInvertibleMod",
            Error::Schema(_) => "SchemaError",
            Error::NotDeterminantOne(_) => "NotDeterminantOne",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::UnknownName(_) => "UnknownName",
            Error::Parity(_) => "ParityError",
            Error::CompositeModulus(_) => "CompositeModulus",
            Error::NotTransvection => "NotTransvection",
            Error::NoInfiniteOrderElement => "NoInfiniteOrderElement",
            Error::NotAbsolutelyIrreducible { .. } => "NotAbsolutelyIrreducible",
            Error::DegreeSkip { .. } => "DegreeSkip",
            Error::WitnessNotFound(_) => "WitnessNotFound",
            Error::SolvableWitnessNotFound => "SolvableWitnessNotFound",
            Error::OrbitTooLarge { .. } => "OrbitTooLarge",
            Error::DegreeNotPrime(_) => "DegreeNotPrime",
            Error::OrderOracleUnavailable(_) => "OrderOracleUnavailable",
            Error::EnumerationTooLarge(_) => "EnumerationTooLarge",
            Error::NoSurjectivePrimeFound => "NoSurjectivePrimeFound",
            Error::NotDense(_) => "NotDense",
            Error::DegreeTwoComposite(_) => "DegreeTwoComposite",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Invariant(_) => "InvariantViolation",
        }
    }
}
