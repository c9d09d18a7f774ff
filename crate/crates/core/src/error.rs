use thiserror::Error;

use crate::schedule::AccessOrder;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("permutation is empty")]
    EmptyInput,
    #[error("index {0} appears more than once in the permutation")]
    DuplicateEntry(usize),
    #[error("value {0} is out of range for the permutation length")]
    OutOfRange(usize),
    #[error("parallelism {0} does not divide the block length {1}")]
    NonDivisorParallelism(usize, usize),
    #[error("parallelism must be between 1 and {max}, got {got}")]
    UnsupportedParallelism { got: usize, max: usize },
    #[error("solver invariant violated: {0}")]
    InvariantViolation(String),
    #[error("control schedule does not match the mapping under the requested objective")]
    ObjectiveIncompatible,
    #[error("repair did not converge within {0} steps")]
    RepairBudgetExhausted(usize),
    #[error("mapping is missing data {0:?}")]
    IncompleteMapping(Vec<usize>),
    #[error("control mismatch in {order:?} order at cycle {cycle}, PE {pe}")]
    ControlMismatch {
        order: AccessOrder,
        cycle: usize,
        pe: usize,
    },
    #[error("instance too large for exhaustive enumeration (L = {0}, X = {1})")]
    InstanceTooLarge(usize, usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
