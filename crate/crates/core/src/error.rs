use thiserror::Error;

use crate::completion::ExistenceReport;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("frame must have between 1 and 64 elements, got {0}")]
    FrameSize(usize),

    #[error("duplicate frame label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("subset {0:#b} has bits outside the frame")]
    SubsetOutOfFrame(u64),

    #[error("value {value} for {set} is outside [0, 1]")]
    ValueOutOfRange { set: String, value: String },

    #[error("cannot parse `{0}` as a rational number")]
    BadNumber(String),

    #[error("invalid mass assignment: {0}")]
    InvalidMass(String),

    #[error("invalid belief table: {0}")]
    InvalidBeliefTable(String),

    #[error("not a belief function: Möbius mass of {witness} is {mass}")]
    NotABeliefFunction { witness: String, mass: String },

    #[error("belief tables are limited to frames of at most {max} elements, got {got}")]
    TableTooLarge { max: usize, got: usize },

    #[error("belief of {smaller} ({smaller_value}) exceeds belief of its superset {larger} ({larger_value})")]
    MonotonicityViolation {
        smaller: String,
        smaller_value: String,
        larger: String,
        larger_value: String,
    },

    #[error("conflicting value for {set}: {reason}")]
    FixedValue { set: String, reason: String },

    #[error("set {0} is not a member of the family")]
    NotInFamily(String),

    #[error("stratum index {j} out of range 1..={max}")]
    StratumOutOfRange { j: usize, max: usize },

    #[error("family is not closed under intersection: {a} ∩ {b} is missing")]
    FamilyNotClosed { a: String, b: String },

    #[error("no belief function is compatible with the given values")]
    Infeasible(Box<ExistenceReport>),

    #[error("no belief function is compatible with the given values (condition fails at {at})")]
    Impossible {
        at: String,
        report: Box<ExistenceReport>,
    },

    #[error("focusing is not applicable: some existence condition fails")]
    FocusingInapplicable(Box<ExistenceReport>),

    #[error("optimal face enumeration needs {variables} variables, cap is {cap}")]
    CapExceeded { variables: usize, cap: usize },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("no question is pending")]
    NoPendingQuestion,

    #[error("cannot replay session: {0}")]
    Replay(String),

    #[error("linear program is malformed: {0}")]
    MalformedProgram(String),
}

pub type Result<T> = std::result::Result<T, Error>;
