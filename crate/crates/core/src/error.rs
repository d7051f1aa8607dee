use thiserror::Error;

/// Every failure the pipeline can report. Each variant maps to a stable
/// machine-readable code via [`Error::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("intersection data is not ultrametric at indices ({i}, {j}, {k}): {detail}")]
    UltrametricViolation {
        i: usize,
        j: usize,
        k: usize,
        detail: String,
    },
    #[error("points {i} and {j} agree in all {truncation} known coefficients; their valuation is not determined")]
    IndistinguishableTruncation { i: usize, j: usize, truncation: usize },
    #[error("point {index} has negative valuation {valuation}")]
    NonIntegralPoint { index: usize, valuation: i64 },
    #[error("points {i} and {j} coincide")]
    DuplicatePoint { i: usize, j: usize },
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("cluster {members:?} at depth {depth} is not a contiguous interval")]
    NotCanonicallyOrdered { members: Vec<usize>, depth: u32 },
    #[error("generator index {index} outside 1..={rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("interval starting at {start} of length {len} does not fit in 1..={rank}")]
    IntervalOutOfRange { start: usize, len: usize, rank: usize },
    #[error("image of x{generator} is not a conjugate of a generator")]
    UnsupportedForm { generator: usize },
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("unknown built-in group {0:?}")]
    UnknownBuiltin(String),
    #[error("enumeration needs {tuples} tuples, above the cap of {cap}")]
    SizeLimit { tuples: u128, cap: u128 },
    #[error("group order {order} is divisible by the residue characteristic {p}")]
    PrimeToPViolation { order: usize, p: u64 },
    #[error("parameters too large: {0}")]
    ParametersTooLarge(String),
    #[error("could not resolve strand crossing near t = {t}; increase the sample count or move z0")]
    UnresolvedCrossing { t: f64 },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::UltrametricViolation { .. } => "ULTRAMETRIC_VIOLATION",
            Error::IndistinguishableTruncation { .. } => "INDISTINGUISHABLE_TRUNCATION",
            Error::NonIntegralPoint { .. } => "NON_INTEGRAL_POINT",
            Error::DuplicatePoint { .. } => "DUPLICATE_POINT",
            Error::MalformedInput(_) => "MALFORMED_INPUT",
            Error::NotCanonicallyOrdered { .. } => "NOT_CANONICALLY_ORDERED",
            Error::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::IntervalOutOfRange { .. } => "INTERVAL_OUT_OF_RANGE",
            Error::UnsupportedForm { .. } => "UNSUPPORTED_FORM",
            Error::NotAGroup(_) => "NOT_A_GROUP",
            Error::UnknownBuiltin(_) => "UNKNOWN_BUILTIN",
            Error::SizeLimit { .. } => "SIZE_LIMIT",
            Error::PrimeToPViolation { .. } => "PRIME_TO_P_VIOLATION",
            Error::ParametersTooLarge(_) => "PARAMETERS_TOO_LARGE",
            Error::UnresolvedCrossing { .. } => "UNRESOLVED_CROSSING",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
