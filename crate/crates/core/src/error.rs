use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural mismatch: {0}")]
    Mismatch(String),

    #[error("truncation weight {n} is below the minimum 2k = {min}")]
    TruncationTooLow { n: u32, min: u32 },

    #[error("type k = {0} is not supported (k must be at least 3)")]
    UnsupportedType(u32),

    #[error("monomial of weight {weight} exceeds truncation weight {n}")]
    WeightExceeded { weight: u32, n: u32 },

    #[error("not pre-normalized: {0}")]
    NotPrenormalized(String),

    #[error("series is not real: {0}")]
    NotReal(String),

    #[error("leading polynomial has no mixed terms (infinite type)")]
    InfiniteType,

    #[error("invariant L is undefined when e = k/2")]
    LUndefined,

    #[error("not exactly representable: {0}")]
    NotExactlyRepresentable(String),

    #[error("map violates the weight constraints: {0}")]
    MapForm(String),

    #[error("dilation factor must be nonzero")]
    ZeroDilation,

    #[error("{0} requires even k")]
    OddType(&'static str),

    #[error("hypersurface is not rigid (defining function depends on u)")]
    NotRigid,

    #[error("defining function depends on y")]
    NotYIndependent,

    #[error("hypersurface is tubular: {0}")]
    Tubular(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("series is zero")]
    ZeroSeries,

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
