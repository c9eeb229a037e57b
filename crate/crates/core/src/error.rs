use thiserror::Error;

/// Errors raised by the simulation and key-rate routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the allowed range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("subsystem index {index} out of range for a state with {count} subsystems")]
    SubsystemIndex { index: usize, count: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSelection(String),

    #[error("block length {0} is too short, at least 2 pulses are required")]
    BlockTooShort(usize),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the budget of {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("block length {n} is too large for exhaustive enumeration (max {max})")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("inconsistent channel statistics: {0}")]
    InconsistentStatistics(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerical machinery itself rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(what: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        return Err(Error::OutOfRange {
            what,
            value,
            min,
            max,
        });
    }
    Ok(())
}
