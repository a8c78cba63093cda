//! Relativistic bit commitment between two pairs of separated laboratories.
//!
//! Alice commits a bit to Bob by answering Bob's random pairs of residues
//! modulo `N = 2^m` with `n_bit + key`. Each further round commits the
//! previous round's keys, bit by bit, from the opposite site, so the
//! commitment can be sustained indefinitely while neither of Alice's
//! laboratories ever learns in time what the other was asked. The unveiling
//! reveals the last round's keys and Bob decodes the chain backwards.
//!
//! - [`time`] and [`spacetime`]: exact times, sites and round windows.
//! - [`codec`]: the arithmetic of a single commitment and of a round.
//! - [`agents`]: honest Alice and Bob.
//! - [`netsim`]: the causal discrete-event simulator and transcript format.
//! - [`verifier`]: Bob's acceptance decision.
//! - [`adversary`]: cheating strategies, Monte Carlo attacks, exact oracles.
//! - [`analysis`]: tape and channel capacity accounting.
//! - [`cli`]: the `rbc` command line.

pub mod adversary;
pub mod agents;
pub mod analysis;
pub mod cli;
pub mod codec;
pub mod netsim;
pub mod spacetime;
pub mod time;
pub mod verifier;

pub use codec::{Bit, Modulus, Pair, Residue};
pub use spacetime::{ProtocolParams, Site, SpacetimeEvent};
pub use time::Seconds;
