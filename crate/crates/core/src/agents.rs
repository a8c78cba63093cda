//! Honest parties: Bob's challenge generators and Alice's committer.
//!
//! All randomness comes from seeded ChaCha8 streams:
//! - the shared tape is drawn from `ChaCha8Rng::seed_from_u64(alice_seed)`
//!   on stream 0, one `random_range(0..N)` per value;
//! - Bob at site `s` draws from `ChaCha8Rng::seed_from_u64(bob_seed)` on
//!   stream `s`, so the two Bob laboratories never share state.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{
    commit_round, round_payload_bits, segment_bounds, Bit, CodecError, CommitResponse, Modulus,
    Pair, PairChallenge, RandomTape, Residue,
};
use crate::netsim::{AliceStrategy, CausalView};
use crate::spacetime::{round_site, ProtocolParams, Site};
use crate::time::Seconds;

/// Identity of the deterministic generator, recorded in transcript headers.
pub const GENERATOR_ID: &str =
    "chacha8-rand0.9/tape=seed(alice),stream0;bob=seed(bob),stream(site)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("round {0} was already challenged by this Bob")]
    DuplicateChallenge(u32),
    #[error("round {round} runs at site {expected}, not at site {actual}")]
    WrongSite {
        round: u32,
        expected: Site,
        actual: Site,
    },
    #[error("challenge is for round {challenge}, expected round {expected}")]
    RoundMismatch { expected: u32, challenge: u32 },
    #[error("round {round} is beyond the {planned} planned rounds")]
    BeyondPlan { round: u32, planned: u32 },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Tape length needed for `rounds` rounds, or `None` if it would not fit in memory.
pub fn tape_len(m: u32, rounds: u32) -> Option<usize> {
    let seg = segment_bounds(rounds, m).ok()?;
    seg.start.checked_add(seg.count)
}

pub fn tape_from_seed(modulus: Modulus, len: usize, alice_seed: u64) -> RandomTape {
    let mut rng = ChaCha8Rng::seed_from_u64(alice_seed);
    rng.set_stream(0);
    RandomTape::generate(modulus, len, &mut rng)
}

/// State shared by both Alice laboratories: the bit, the tape and the plan.
#[derive(Clone, Debug)]
pub struct AliceState {
    params: ProtocolParams,
    committed_bit: Bit,
    tape: RandomTape,
    planned_rounds: u32,
}

impl AliceState {
    pub fn new(
        params: ProtocolParams,
        committed_bit: Bit,
        tape: RandomTape,
        planned_rounds: u32,
    ) -> Result<Self, AgentError> {
        if tape.modulus() != params.modulus() {
            return Err(CodecError::BadModulus(tape.modulus().bits()).into());
        }
        let needed =
            tape_len(params.m(), planned_rounds).ok_or(CodecError::Overflow(planned_rounds))?;
        if tape.len() < needed {
            return Err(CodecError::TapeTooShort {
                needed,
                available: tape.len(),
            }
            .into());
        }
        Ok(AliceState {
            params,
            committed_bit,
            tape,
            planned_rounds,
        })
    }

    /// Materializes the tape from `alice_seed`.
    pub fn from_seed(
        params: ProtocolParams,
        committed_bit: Bit,
        planned_rounds: u32,
        alice_seed: u64,
    ) -> Result<Self, AgentError> {
        let len =
            tape_len(params.m(), planned_rounds).ok_or(CodecError::Overflow(planned_rounds))?;
        let tape = tape_from_seed(params.modulus(), len, alice_seed);
        AliceState::new(params, committed_bit, tape, planned_rounds)
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn committed_bit(&self) -> Bit {
        self.committed_bit
    }

    pub fn tape(&self) -> &RandomTape {
        &self.tape
    }

    pub fn planned_rounds(&self) -> u32 {
        self.planned_rounds
    }

    /// Bits committed in round `k`: the bit itself in round 1, then the
    /// previous round's keys in binary.
    pub fn payload(&self, k: u32) -> Result<Vec<Bit>, CodecError> {
        if k == 1 {
            Ok(vec![self.committed_bit])
        } else {
            round_payload_bits(k, &self.tape)
        }
    }
}

/// One Bob laboratory.
#[derive(Clone, Debug)]
pub struct BobAgent {
    site: Site,
    rng: ChaCha8Rng,
    issued: BTreeSet<u32>,
}

impl BobAgent {
    pub fn new(bob_seed: u64, site: Site) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(bob_seed);
        rng.set_stream(u64::from(site.id()));
        BobAgent {
            site,
            rng,
            issued: BTreeSet::new(),
        }
    }

    pub fn site(&self) -> Site {
        self.site
    }

    /// Draws `m^(k-1)` pairs, each uniform over ordered pairs of distinct residues.
    pub fn challenge(&mut self, k: u32, modulus: Modulus) -> Result<PairChallenge, AgentError> {
        let expected = round_site(k);
        if expected != self.site {
            return Err(AgentError::WrongSite {
                round: k,
                expected,
                actual: self.site,
            });
        }
        if !self.issued.insert(k) {
            return Err(AgentError::DuplicateChallenge(k));
        }
        let count = segment_bounds(k, modulus.bits())?.count;
        let n = modulus.value();
        let pairs = (0..count)
            .map(|_| {
                let n0 = self.rng.random_range(0..n);
                let n1 = (n0 + 1 + self.rng.random_range(0..n - 1)) % n;
                Pair::new(n0, n1)
            })
            .collect();
        Ok(PairChallenge { round: k, pairs })
    }
}

/// Disclosure of the keys used in `round`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnveilMessage {
    pub round: u32,
    pub site: Site,
    pub completes_at: Seconds,
    pub revealed: Vec<Residue>,
}

/// Honest response to round `k`'s challenge.
pub fn alice_response(
    k: u32,
    challenge: &PairChallenge,
    state: &AliceState,
) -> Result<CommitResponse, AgentError> {
    if challenge.round != k {
        return Err(AgentError::RoundMismatch {
            expected: k,
            challenge: challenge.round,
        });
    }
    if k > state.planned_rounds {
        return Err(AgentError::BeyondPlan {
            round: k,
            planned: state.planned_rounds,
        });
    }
    let bits = state.payload(k)?;
    let keys = state.tape.segment(k)?;
    let values = commit_round(&bits, &challenge.pairs, keys, state.params.modulus())?;
    Ok(CommitResponse { round: k, values })
}

/// Honest unveiling of the keys used in `last_round`, sent from `site`.
///
/// Only the laboratory opposite the round may unveil it.
pub fn alice_unveil(
    last_round: u32,
    state: &AliceState,
    site: Site,
    completes_at: Seconds,
) -> Result<UnveilMessage, AgentError> {
    let expected = round_site(last_round).other();
    if site != expected {
        return Err(AgentError::WrongSite {
            round: last_round,
            expected,
            actual: site,
        });
    }
    if last_round > state.planned_rounds {
        return Err(AgentError::BeyondPlan {
            round: last_round,
            planned: state.planned_rounds,
        });
    }
    Ok(UnveilMessage {
        round: last_round,
        site,
        completes_at,
        revealed: state.tape.segment(last_round)?.to_vec(),
    })
}

/// The honest committer, driven through its causal view.
#[derive(Clone, Copy, Debug, Default)]
pub struct HonestAlice;

impl AliceStrategy for HonestAlice {
    fn respond(&self, alice: &AliceState, view: &CausalView<'_>, round: u32) -> Vec<Residue> {
        let challenge = view
            .own_challenge(round)
            .expect("the simulator only asks for a response once the challenge has arrived");
        alice_response(round, challenge, alice)
            .map(|r| r.values)
            .unwrap_or_default()
    }

    fn unveil(&self, alice: &AliceState, _view: &CausalView<'_>, round: u32) -> Vec<Residue> {
        alice
            .tape()
            .segment(round)
            .map(<[Residue]>::to_vec)
            .unwrap_or_default()
    }
}
