use thiserror::Error;

use crate::circuit::Violation;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Pauli letter {0:?}")]
    InvalidLetter(char),

    #[error("coefficient {re}+{im}i is not real")]
    NonRealCoefficient { re: f64, im: f64 },

    #[error("coefficient is not finite")]
    NonFiniteCoefficient,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown gate name {0:?}")]
    UnknownGate(String),

    #[error("invalid circuit: {}", join_violations(.0))]
    InvalidCircuit(Vec<Violation>),

    #[error("qubit count {n} exceeds the dense limit of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("light cone of {size} qubits exceeds the cap of {cap}")]
    LightConeTooLarge { size: usize, cap: usize },

    #[error("noise model {model} is not supported here (expected {expected})")]
    WrongNoiseModel { model: String, expected: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
