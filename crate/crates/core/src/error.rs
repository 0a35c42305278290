use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level k = 0 is the trivial theory; SU(2)_k needs k >= 1")]
    TrivialLevel,

    #[error("invalid minimal-model labels (p = {p}, p' = {p_prime}): {reason}")]
    InvalidMinimalLabels { p: u32, p_prime: u32, reason: String },

    #[error("precision of {digits} digits is below the minimum of {minimum}")]
    PrecisionTooLow { digits: u32, minimum: u32 },

    #[error("sector 0 must be the vacuum (h = 0), found h = {found}")]
    MissingVacuum { found: String },

    #[error("S is not symmetric: residual {residual:e}")]
    NotSymmetric { residual: f64 },

    #[error("S is not unitary: residual {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("S^2 is not a permutation matrix: residual {residual:e}")]
    ConjugationNotPermutation { residual: f64 },

    #[error("(ST)^3 differs from S^2: residual {residual:e}")]
    ModularRelation { residual: f64 },

    #[error("Perron row of S is not strictly positive: S[{row}][{sector}] = {value:e}")]
    NegativePerronRow { row: usize, sector: usize, value: f64 },

    #[error("malformed model document: {0}")]
    InvalidDocument(String),

    #[error("Verlinde coefficient N^{tau}_({sigma},{rho}) = {value:e} is not a non-negative integer (residual {residual:e})")]
    IntegralityFailure {
        sigma: usize,
        rho: usize,
        tau: usize,
        value: f64,
        residual: f64,
    },

    #[error("no rational with denominator <= {max_den} reproduces commutant entry {value:e}; raise the precision")]
    RationalizationFailure { value: f64, max_den: i64 },

    #[error("search exceeded its budget of {budget} nodes")]
    SearchBudgetExceeded { budget: u64 },

    #[error("generator recursion left the non-negative integers at n^{sector} (entry ({row},{col}) = {value})")]
    NegativityFailure {
        sector: usize,
        row: usize,
        col: usize,
        value: i64,
    },

    #[error("generator spectral radius {radius} is not below 2")]
    SpectralRadiusTooLarge { radius: f64 },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("malformed nimrep: {0}")]
    InvalidNimrep(String),

    #[error("operation needs SU(2)_k modular data, got model {0:?}")]
    NotSu2(String),

    #[error("nimrep has {labels} boundary labels but tr Z = {trace}")]
    SizeMismatch { labels: usize, trace: usize },

    #[error("exponent {sector} occurs {multiplicity} times in Exp(Z); boundary states need extra data")]
    DegenerateExponents { sector: usize, multiplicity: usize },

    #[error("nimrep spectrum does not match the modular invariant: {0}")]
    SpectrumMismatch(String),

    #[error("truncation tail bound {tail_bound:e} exceeds the requested tolerance {tolerance:e}")]
    ConvergenceWarning { tail_bound: f64, tolerance: f64 },

    #[error("characters are only available for built-in model families (model {0:?})")]
    CharactersUnavailable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("invalid theta multiplicities: {0}")]
    InvalidTheta(String),

    #[error("invalid modular invariant: {0}")]
    InvalidInvariant(String),

    #[error("q-series division needs a leading coefficient of +1 or -1, found {0}")]
    NonUnitLeading(String),

    #[error("q-series operands are incompatible: {0}")]
    SeriesMismatch(String),

    #[error("document format version {found} is not supported (expected {expected}); migrate the file")]
    VersionMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
