//! Cheating committers, the Monte Carlo attack harness and exact oracles.
//!
//! The two Alice laboratories may share anything agreed before the run and
//! relay everything they receive afterwards, but only at light speed: each
//! strategy decision is computed from a [`crate::netsim::CausalView`].

mod harness;
pub mod oracle;
mod strategy;

pub use harness::{
    exact_rate, run_attack, run_trial, trial_seeds, AttackError, AttackOutcome, AttackStrategy,
    TrialSeeds, UnknownStrategy,
};
pub use oracle::{is_oracle_sized, optimal_flip_success, oracle_size, OracleBudget, OracleError};
pub use strategy::OffsetGuess;
