use std::path::PathBuf;

use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("assignment has {len} bits but variable {var} is referenced")]
    AssignmentTooShort { len: usize, var: u32 },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("N = {0} is even and cannot be written with odd (fixed-LSB) factors")]
    NotOddCapable(BigInt),

    #[error("N = {0} is too small to factor (need N >= 4)")]
    NumberTooSmall(BigInt),

    #[error("gadget requires a non-zero coefficient")]
    ZeroCoefficient,

    #[error("quartic gadget requires a positive coefficient, got {0}")]
    NonPositiveCoefficient(BigInt),

    #[error("gadget expects {expected} variables, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("cannot quadratize a polynomial of degree {0} (maximum is 4)")]
    UnsupportedDegree(usize),

    #[error("quartic term {vars:?} has negative coefficient {coeff}")]
    NegativeQuarticCoefficient { vars: Vec<u32>, coeff: BigInt },

    #[error("{vars} variables exceed the exhaustive limit of {limit}")]
    TooManyVariables { vars: usize, limit: usize },

    #[error("polynomial has no variables to sample")]
    EmptyPolynomial,

    #[error("invalid anneal schedule: {0}")]
    InvalidSchedule(String),

    #[error("block plan is empty")]
    NoBlocksInPlan,

    #[error("stage at bit level {level} has {ties} tied minima, exceeding the branch budget of {budget}")]
    StageMinimumAmbiguous { level: u32, ties: usize, budget: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported model format version {found:?} (expected {expected:?})")]
    VersionMismatch { found: String, expected: String },
}
