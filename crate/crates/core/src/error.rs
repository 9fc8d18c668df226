use thiserror::Error;

/// Errors produced by the construction and verification routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus M_{index} = {value} is not divisible by 3")]
    ModulusNotMultipleOfThree { index: usize, value: u64 },
    #[error("moduli must be strictly increasing (M_{index} = {value} <= {previous})")]
    ModuliNotIncreasing {
        index: usize,
        value: u64,
        previous: u64,
    },
    #[error("partial product gamma_{index} is zero (M_{index} = 3)")]
    GammaVanishes { index: usize },
    #[error("basis level must be at least 1")]
    EmptyBasis,
    #[error("level {requested} exceeds basis length {available}")]
    LevelOutOfRange { requested: usize, available: usize },
    #[error("digit x_{index} = {digit} out of range [0, {bound})")]
    DigitOutOfRange { index: usize, digit: u64, bound: u64 },
    #[error("integer {value} is not below N_{level} = {bound}")]
    EncodingOutOfRange {
        value: String,
        level: usize,
        bound: String,
    },
    #[error("digit vector is not in the carry-free box (x_{index} = {digit} >= M_{index} - 3)")]
    NotInTildeBox { index: usize, digit: u64 },
    #[error("invalid pair ({a}, {b}) at level {k}")]
    InvalidSigma { a: usize, b: usize, k: usize },
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },
    #[error("multiplier must be 1 or 2, got {0}")]
    BadMultiplier(u32),
    #[error("sign assignment has no value for {0}")]
    EtaMissing(String),
    #[error("{0} is not a sum of two distinct prefix products")]
    NotInSparseSet(String),
    #[error("brute-force correlation at level {k} exceeds the feasibility guard k <= {limit}")]
    BruteInfeasible { k: usize, limit: usize },
    #[error("pair ({a}, {b}) covers every coordinate at level {k}; closed form not exact")]
    NoFreeCoordinate { a: usize, b: usize, k: usize },
    #[error("horizon {horizon} is beyond what a basis of length {len} can certify")]
    BasisTooShort { horizon: String, len: usize },
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("net has {count} members, above the sweep cap {cap}")]
    NetTooLarge { count: String, cap: u64 },
    #[error("enclosure too wide to decide at truncation J = {truncation}; raise J or the precision")]
    InsufficientPrecision { truncation: usize },
    #[error("no cut level k <= {available} satisfies 1/(M_(k+1) - 1) < eps/(10k)")]
    NoFeasibleCut { available: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
