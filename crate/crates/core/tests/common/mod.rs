#![allow(dead_code)]

use rand::seq::IndexedMutRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbc::agents::HonestAlice;
use rbc::netsim::{run_protocol, SimConfig, Simulation, Transcript};
use rbc::{Bit, ProtocolParams, Seconds};

pub fn params(m: u32) -> ProtocolParams {
    ProtocolParams::new(
        m,
        Seconds::from_secs(1),
        Seconds::from_decimal(1, 4),
        Seconds::from_decimal(1, 3),
    )
    .unwrap()
}

pub fn honest_with(m: u32, rounds: u32, bit: Bit, seed: u64, config: &SimConfig) -> Simulation {
    run_protocol(
        params(m),
        rounds,
        bit,
        seed,
        seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 1,
        &HonestAlice,
        config,
    )
    .unwrap()
}

pub fn honest(m: u32, rounds: u32, bit: Bit, seed: u64) -> Simulation {
    honest_with(m, rounds, bit, seed, &SimConfig::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    /// Timestamps pushed outside their windows.
    Timing,
    Site,
    Shape,
    /// A response or revealed value replaced by another in-range residue.
    Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    ChallengeStartEarly,
    ChallengeEndLate,
    ResponseLate,
    UnveilPastDeadline,
    UnveilBeforeRound,
    AggregationEarly,
    HandshakeSlow,
    UnveilSite,
    RoundSite,
    DropPair,
    DropResponseValue,
    DropRevealed,
    ExtraRevealed,
    DropUnveil,
    DropResponse,
    DropLastRound,
    RenumberRound,
    DuplicatePair,
    ResponseOutOfRange,
    RevealedOutOfRange,
    ResponseValue,
    RevealedValue,
}

impl Mutation {
    pub const ALL: [Mutation; 22] = [
        Mutation::ChallengeStartEarly,
        Mutation::ChallengeEndLate,
        Mutation::ResponseLate,
        Mutation::UnveilPastDeadline,
        Mutation::UnveilBeforeRound,
        Mutation::AggregationEarly,
        Mutation::HandshakeSlow,
        Mutation::UnveilSite,
        Mutation::RoundSite,
        Mutation::DropPair,
        Mutation::DropResponseValue,
        Mutation::DropRevealed,
        Mutation::ExtraRevealed,
        Mutation::DropUnveil,
        Mutation::DropResponse,
        Mutation::DropLastRound,
        Mutation::RenumberRound,
        Mutation::DuplicatePair,
        Mutation::ResponseOutOfRange,
        Mutation::RevealedOutOfRange,
        Mutation::ResponseValue,
        Mutation::RevealedValue,
    ];

    pub fn class(self) -> Class {
        use Mutation::*;
        match self {
            ChallengeStartEarly | ChallengeEndLate | ResponseLate | UnveilPastDeadline
            | UnveilBeforeRound | AggregationEarly | HandshakeSlow => Class::Timing,
            UnveilSite | RoundSite => Class::Site,
            ResponseValue | RevealedValue => Class::Value,
            _ => Class::Shape,
        }
    }
}

fn positive_offset(rng: &mut ChaCha8Rng, scale: Seconds) -> Seconds {
    // at least one tick, up to `scale`
    Seconds::from_atto(rng.random_range(1..=scale.as_atto().max(1)))
}

fn other_residue(rng: &mut ChaCha8Rng, value: u64, n: u64) -> u64 {
    (value + rng.random_range(1..n)) % n
}

/// Applies `mutation` to a copy of `t` at a random location. Returns `None`
/// when the transcript has nothing to mutate for this kind.
pub fn mutate(t: &Transcript, mutation: Mutation, rng: &mut ChaCha8Rng) -> Option<Transcript> {
    let mut t = t.clone();
    let p = t.params;
    let n = p.modulus().value();
    let rounds = t.rounds.len();
    let k = rng.random_range(0..rounds);
    let w = p.round_window(k as u32 + 1);
    let scale = p.period();
    match mutation {
        Mutation::ChallengeStartEarly => {
            t.rounds[k].challenge.start = w.challenge_start - positive_offset(rng, scale)
        }
        Mutation::ChallengeEndLate => {
            t.rounds[k].challenge.end = w.challenge_end + positive_offset(rng, scale)
        }
        Mutation::ResponseLate => {
            t.rounds[k].response.as_mut()?.end = w.response_end + positive_offset(rng, scale);
        }
        Mutation::UnveilPastDeadline => {
            let u = t.unveils.choose_mut(rng)?;
            let deadline = p.unveil_deadline(u.round);
            u.completes_at = deadline + positive_offset(rng, scale) - Seconds::TICK;
        }
        Mutation::UnveilBeforeRound => {
            let u = t.unveils.choose_mut(rng)?;
            u.completes_at = p.round_window(u.round).challenge_start - positive_offset(rng, scale);
        }
        Mutation::AggregationEarly => {
            let agg = t.aggregation.as_mut()?;
            agg.time = agg.time - positive_offset(rng, scale);
        }
        Mutation::HandshakeSlow => {
            let h = t.handshake.choose_mut(rng)?;
            h.returned = h.sent + p.delta().times(2) + positive_offset(rng, scale);
        }
        Mutation::UnveilSite => {
            let u = t.unveils.choose_mut(rng)?;
            u.site = u.site.other();
        }
        Mutation::RoundSite => t.rounds[k].site = t.rounds[k].site.other(),
        Mutation::DropPair => {
            let pairs = &mut t.rounds[k].challenge.pairs;
            let j = rng.random_range(0..pairs.len());
            pairs.remove(j);
        }
        Mutation::DropResponseValue => {
            let values = &mut t.rounds[k].response.as_mut()?.values;
            let j = rng.random_range(0..values.len());
            values.remove(j);
        }
        Mutation::DropRevealed => {
            let u = t.unveils.choose_mut(rng)?;
            let j = rng.random_range(0..u.revealed.len());
            u.revealed.remove(j);
        }
        Mutation::ExtraRevealed => {
            let u = t.unveils.choose_mut(rng)?;
            u.revealed.push(rng.random_range(0..n));
        }
        Mutation::DropUnveil => {
            let j = rng.random_range(0..t.unveils.len());
            t.unveils.remove(j);
        }
        Mutation::DropResponse => t.rounds[k].response = None,
        Mutation::DropLastRound => {
            t.rounds.pop();
            if t.rounds.is_empty() {
                return None;
            }
        }
        Mutation::RenumberRound => t.rounds[k].k += rng.random_range(1..=3),
        Mutation::DuplicatePair => {
            let pairs = &mut t.rounds[k].challenge.pairs;
            let j = rng.random_range(0..pairs.len());
            pairs[j].n1 = pairs[j].n0;
        }
        Mutation::ResponseOutOfRange => {
            let values = &mut t.rounds[k].response.as_mut()?.values;
            let j = rng.random_range(0..values.len());
            values[j] += n * rng.random_range(1..=3);
        }
        Mutation::RevealedOutOfRange => {
            let u = t.unveils.choose_mut(rng)?;
            let j = rng.random_range(0..u.revealed.len());
            u.revealed[j] += n * rng.random_range(1..=3);
        }
        Mutation::ResponseValue => {
            let values = &mut t.rounds[k].response.as_mut()?.values;
            let j = rng.random_range(0..values.len());
            values[j] = other_residue(rng, values[j], n);
        }
        Mutation::RevealedValue => {
            let u = t.unveils.choose_mut(rng)?;
            let j = rng.random_range(0..u.revealed.len());
            u.revealed[j] = other_residue(rng, u.revealed[j], n);
        }
    }
    Some(t)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Upper confidence bound `p + sigmas * sqrt(p(1-p)/n)`.
pub fn binomial_bound(p: f64, trials: u64, sigmas: f64) -> f64 {
    p + sigmas * (p * (1.0 - p) / trials as f64).sqrt()
}
