use thiserror::Error;

/// Raised by [`crate::clock::FuelMeter::charge`] when a stage overruns its limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("out of fuel: {consumed} units against a limit of {limit}")]
pub struct OutOfFuel {
    pub consumed: u64,
    pub limit: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("punctuality violation at stage {stage}: consumed {consumed} > budget {limit}")]
    PunctualityViolation { stage: u64, consumed: u64, limit: u64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("promise violation: {0}")]
    PromiseViolation(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("inconsistent instance: {0}")]
    InstanceInconsistent(String),
    #[error("Hall's condition fails on {0:?}")]
    HallViolation(Vec<u64>),
    #[error("no extension ball found for open set {0} within the horizon")]
    DensityTimeout(usize),
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),
    #[error("the zero element has no type")]
    ZeroElement,
    #[error("value exceeds the machine range")]
    Overflow,
    #[error(transparent)]
    OutOfFuel(#[from] OutOfFuel),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn promise(msg: impl Into<String>) -> Self {
        Error::PromiseViolation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
