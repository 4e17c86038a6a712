use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid posit configuration n={n}, es={es} (need 2 <= n <= 32, es <= 5)")]
    InvalidPositConfig { n: u32, es: u32 },
    #[error("invalid fixed-point configuration m={m}, f={f} (need 2 <= m <= 32, f < m)")]
    InvalidFxpConfig { m: u32, f: u32 },
    #[error("bit pattern {bits:#x} does not fit in {width} bits")]
    PatternTooWide { bits: u64, width: u32 },
    #[error("malformed bit string {0:?}")]
    MalformedBits(String),
    #[error("operand configurations differ")]
    ConfigMismatch,
    #[error("NaR (not a real) operand")]
    NotAReal,
    #[error("pattern is outside the normalized posit range")]
    OutOfNormalizedRange,
    #[error("enumeration refused for n={0} (limit is 16)")]
    EnumerationTooLarge(u32),
    #[error("fixed-point conversion overflowed")]
    Overflow,
    #[error("normalized conversion requires f = m - 1 (got m={m}, f={f})")]
    NormalizedFractionMismatch { m: u32, f: u32 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("weight encoding does not match the design")]
    WeightKindMismatch,
    #[error("inconsistent objective vectors: {0}")]
    InconsistentObjectives(String),
    #[error("reference point is dominated by a front point")]
    InvalidReference,
    #[error("design list is empty")]
    EmptyDesignList,
    #[error("no cost row for {0}")]
    MissingCost(String),
    #[error("cost table: {0}")]
    CostTable(String),
    #[error("unknown objective {0:?}")]
    UnknownObjective(String),
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

impl Error {
    pub(crate) fn parse(what: &'static str, input: &str) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
        }
    }
}
