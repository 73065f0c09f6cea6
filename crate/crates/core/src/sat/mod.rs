//! SAT solving, circuit encoding, equivalence checking and the oracle-guided
//! key-recovery loop.

mod attack;
mod cec;
mod cnf;
mod dimacs;
mod solver;

use thiserror::Error;

pub use attack::{complete_partial, sat_attack, substitute_key, DipTrace, SatAttackOptions, SatAttackOutcome};
pub use cec::{check_equivalence, Equivalence};
pub use cnf::{encode, CnfInstance, Encoder};
pub use dimacs::{parse_dimacs, write_dimacs};
pub use solver::{Lit, SatResult, Solver, Stats, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("DIMACS line {0}: {1}")]
    Dimacs(usize, String),
    #[error("circuit signatures differ: {0}")]
    Signature(String),
    #[error("solver budget exhausted")]
    Budget,
    #[error("no key satisfies the partial-key constraints together with the observed oracle responses")]
    WrongPartialKey,
    #[error("DIP budget of {0} exhausted")]
    DipBudget(usize),
    #[error("key width {got} does not match {expected} key inputs")]
    KeyWidth { expected: usize, got: usize },
    #[error("oracle: {0}")]
    Oracle(String),
}
