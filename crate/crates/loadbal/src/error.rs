use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("unknown machine id {0}")]
    UnknownMachine(usize),
    #[error("unknown job index {0}")]
    UnknownJob(usize),
    #[error("{0} must be positive")]
    NonPositive(String),
    #[error("negative charge")]
    NegativeCharge,
    #[error("schedule is not well-behaved: negative price increment at machine {machine}")]
    NotWellBehaved { machine: usize },
    #[error("no machine with finite price")]
    NoFinitePrice,
    #[error("instance must contain at least one machine")]
    NoMachines,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("value outside curve domain")]
    OutOfDomain,
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
