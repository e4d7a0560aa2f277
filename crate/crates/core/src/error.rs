//! Error type shared by every stage of the pipeline.

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed netlist line.
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("net `{label}` is referenced but never driven")]
    UndefinedNet { label: String },

    #[error("line {line}: net `{label}` has more than one driver")]
    DuplicateDriver { label: String, line: usize },

    #[error("combinational cycle through net `{label}`")]
    CombinationalCycle { label: String },

    #[error("netlist is empty")]
    EmptyNetlist,

    #[error("vector width {found} does not match interface width {expected}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("invalid test vector `{0}`: only 0 and 1 are allowed")]
    InvalidVector(String),

    #[error("frame is empty")]
    EmptyFrame,

    #[error("fault list is empty")]
    EmptyFaultList,

    #[error("vector list is empty")]
    EmptyVectorList,

    #[error("population is empty")]
    EmptyPopulation,

    #[error("pbest memory is empty")]
    EmptyMemory,

    #[error("coverage of a report with zero faults is undefined")]
    ZeroFaults,

    #[error("exhaustive ordering supports at most {max} vectors, got {found}")]
    TooManyVectors { max: usize, found: usize },

    #[error("array lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("no capacitance entry for gate `{0}`")]
    MissingCapacitance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed capacitance table: {0}")]
    CapTable(String),
}
