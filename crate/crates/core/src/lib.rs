//! Factoring bi-primes by minimizing `(p*q - N)^2` over binary encodings of
//! `p` and `q`.
//!
//! * [`poly`]: exact multilinear polynomials over binary variables.
//! * [`model`]: plain and block-offset factorization HUBOs.
//! * [`quadratize`]: cubic/quartic gadgets that turn a HUBO into a QUBO.
//! * [`solvers`]: exhaustive enumeration and simulated annealing.
//! * [`search`]: block search over factor ranges and bitwise decomposition.
//! * [`io`]: JSON model files, reports and the command-line front end.
//!
//! All coefficients and energies are arbitrary-precision integers.

pub mod error;
pub mod io;
pub mod model;
pub mod poly;
pub mod quadratize;
pub mod search;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{build_plain_hubo, build_range_hubo, FactorLayout, FactorModel};
pub use poly::{Assignment, BinaryPolynomial, VarId};
pub use quadratize::{quadratize_model, verify_reduction, ReductionLedger};
pub use solvers::{AnnealSchedule, Sample};
