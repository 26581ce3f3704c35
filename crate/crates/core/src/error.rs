use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("population must hold at least 3 cells, got {0}")]
    PopulationTooSmall(usize),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("rule number {0} is outside 0..=255")]
    RuleNumberOutOfRange(u32),
    #[error("invalid rule spec, expected FAMILY:DIRECTION[:h]")]
    InvalidRuleSpec,
    #[error("{name} must be a probability in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("directed shift needs an even population, got {0}")]
    OddDirectedShift(usize),
    #[error("{requested} swap pairs per step exceeds the cap of {cap}")]
    TooManySwaps { requested: usize, cap: usize },
    #[error("at least one step is required")]
    NoSteps,
    #[error("at least one replicate is required")]
    NoReplicates,
    #[error("median of an empty sequence")]
    EmptyInput,
    #[error("rule {0} appears more than once")]
    DuplicateRule(u8),
    #[error("mutation row for rule {0} has no reachable strategy")]
    UnreachableRow(u8),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
