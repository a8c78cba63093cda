//! Bob's acceptance logic, recomputed from the transcript alone.
//!
//! Checks run in a fixed order and the first failure names the verdict:
//!
//! 1. parameters (already enforced when a transcript is parsed);
//! 2. shape: abort marker, unveiling present, rounds consecutive from 1,
//!    round sites, per-round counts `m^(k-1)`, distinct pair members,
//!    residue ranges, then the unveiling's round and length;
//! 3. timing: handshake echoes within `2delta`, challenge and response
//!    windows (inclusive), unveil site, unveil completion in
//!    `[challenge_start(R), deadline(R))`, spacelike dual unveilings, and an
//!    aggregation event no earlier than the data could have been gathered;
//! 4. the backward chain decode down to the committed bit.

use serde::{Deserialize, Serialize};

use crate::agents::UnveilMessage;
use crate::codec::{decode_one, from_binary, segment_bounds, Bit, Modulus, Residue};
use crate::netsim::{aggregate_event, aggregate_event_at, RoundRecord, Transcript};
use crate::spacetime::{round_site, SpacetimeEvent};
use crate::time::Seconds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TimingViolation,
    SiteMismatch,
    CountMismatch,
    DuplicatePairMembers,
    DecodeMismatch,
    RangeError,
    IncompleteTranscript,
}

/// Where in the transcript a check failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub round: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub reason: RejectReason,
    pub position: Option<Position>,
    pub detail: String,
}

impl Rejection {
    fn new(reason: RejectReason, detail: impl Into<String>) -> Self {
        Rejection {
            reason,
            position: None,
            detail: detail.into(),
        }
    }

    fn at(mut self, round: u32, index: Option<usize>) -> Self {
        self.position = Some(Position { round, index });
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accept(Bit),
    Reject(Rejection),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// The aggregation event the verdict is issued at, when one exists.
    pub issued_at: Option<SpacetimeEvent>,
}

impl Verdict {
    pub fn accepted_bit(&self) -> Option<Bit> {
        match self.outcome {
            Outcome::Accept(b) => Some(b),
            Outcome::Reject(_) => None,
        }
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match &self.outcome {
            Outcome::Accept(_) => None,
            Outcome::Reject(r) => Some(r.reason),
        }
    }

    pub fn record(&self) -> VerdictRecord {
        let aggregation_time = self.issued_at.map(|e| e.time);
        match &self.outcome {
            Outcome::Accept(bit) => VerdictRecord {
                outcome: "accept".into(),
                bit: Some(*bit),
                reason: None,
                reject_position: None,
                detail: None,
                aggregation_time,
            },
            Outcome::Reject(r) => VerdictRecord {
                outcome: "reject".into(),
                bit: None,
                reason: Some(r.reason),
                reject_position: r.position,
                detail: Some(r.detail.clone()),
                aggregation_time,
            },
        }
    }
}

/// The JSON verdict printed by `rbc verify`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bit: Option<Bit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject_position: Option<Position>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub aggregation_time: Option<Seconds>,
}

/// First position at which the backward decode failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeFailure {
    pub round: u32,
    pub index: usize,
}

type Check = Result<(), Rejection>;

use RejectReason::*;

/// Decodes rounds `top` down to `stop + 1`, starting from `top`'s keys, and
/// returns the reconstructed keys of round `stop`.
fn unwind(
    rounds: &[RoundRecord],
    top: u32,
    top_keys: &[Residue],
    stop: u32,
    modulus: Modulus,
) -> Result<Vec<Residue>, DecodeFailure> {
    let m = modulus.bits() as usize;
    let mut keys = top_keys.to_vec();
    for k in (stop + 1..=top).rev() {
        let fail = |index| DecodeFailure { round: k, index };
        let record = rounds.get(k as usize - 1).ok_or(fail(0))?;
        let values = &record.response.as_ref().ok_or(fail(0))?.values;
        let pairs = &record.challenge.pairs;
        if values.len() != keys.len() || pairs.len() != keys.len() {
            return Err(fail(values.len().min(pairs.len()).min(keys.len())));
        }
        let mut bits = Vec::with_capacity(keys.len());
        for (j, ((&v, &pair), &key)) in values.iter().zip(pairs).zip(&keys).enumerate() {
            match decode_one(v, pair, key, modulus) {
                Ok(Some(bit)) => bits.push(bit),
                _ => return Err(fail(j)),
            }
        }
        if k == 1 {
            keys = bits.iter().map(|b| u64::from(b.as_u8())).collect();
        } else {
            if bits.len() % m != 0 {
                return Err(fail(bits.len()));
            }
            keys = bits.chunks(m).map(from_binary).collect();
        }
    }
    Ok(keys)
}

/// Recovers the committed bit from the keys revealed for the last round.
///
/// For k = R down to 2 each response is opened with its key; the opened bits,
/// read m at a time LSB first, are the keys of round k-1. Opening round 1
/// yields the bit.
pub fn backward_decode(
    rounds: &[RoundRecord],
    revealed: &[Residue],
    modulus: Modulus,
) -> Result<Bit, DecodeFailure> {
    let top = rounds.len() as u32;
    if top == 0 {
        return Err(DecodeFailure { round: 0, index: 0 });
    }
    let bits = unwind(rounds, top, revealed, 0, modulus)?;
    match bits.as_slice() {
        [b] => Ok(if *b == 1 { Bit::One } else { Bit::Zero }),
        _ => Err(DecodeFailure { round: 1, index: 0 }),
    }
}

fn check_rounds(t: &Transcript) -> Check {
    if let Some(why) = &t.abort {
        return Err(Rejection::new(
            IncompleteTranscript,
            format!("run aborted: {why}"),
        ));
    }
    if t.rounds.is_empty() {
        return Err(Rejection::new(IncompleteTranscript, "no commitment rounds"));
    }
    if t.unveils.is_empty() {
        return Err(Rejection::new(IncompleteTranscript, "no unveiling"));
    }
    let modulus = t.params.modulus();
    for (i, r) in t.rounds.iter().enumerate() {
        let k = i as u32 + 1;
        if r.k != k {
            return Err(Rejection::new(
                CountMismatch,
                format!("round {} recorded in position {k}", r.k),
            )
            .at(k, None));
        }
        if r.site != round_site(k) {
            return Err(
                Rejection::new(SiteMismatch, format!("round {k} ran at site {}", r.site))
                    .at(k, None),
            );
        }
        let Some(response) = &r.response else {
            return Err(
                Rejection::new(IncompleteTranscript, format!("round {k} has no response"))
                    .at(k, None),
            );
        };
        let expected = segment_bounds(k, modulus.bits())
            .map_err(|e| Rejection::new(CountMismatch, e.to_string()).at(k, None))?
            .count;
        if r.challenge.pairs.len() != expected {
            return Err(Rejection::new(
                CountMismatch,
                format!(
                    "round {k} has {} pairs, expected {expected}",
                    r.challenge.pairs.len()
                ),
            )
            .at(k, None));
        }
        if response.values.len() != expected {
            return Err(Rejection::new(
                CountMismatch,
                format!(
                    "round {k} has {} response values, expected {expected}",
                    response.values.len()
                ),
            )
            .at(k, None));
        }
        if let Some(j) = r.challenge.pairs.iter().position(|p| p.n0 == p.n1) {
            return Err(Rejection::new(
                DuplicatePairMembers,
                format!("round {k} pair {j} has equal members"),
            )
            .at(k, Some(j)));
        }
        if let Some(j) = r
            .challenge
            .pairs
            .iter()
            .position(|p| !modulus.contains(p.n0) || !modulus.contains(p.n1))
        {
            return Err(
                Rejection::new(RangeError, format!("round {k} pair {j} is out of range"))
                    .at(k, Some(j)),
            );
        }
        if let Some(j) = response.values.iter().position(|&v| !modulus.contains(v)) {
            return Err(Rejection::new(
                RangeError,
                format!("round {k} response value {j} is out of range"),
            )
            .at(k, Some(j)));
        }
    }
    Ok(())
}

fn check_unveil_shape(t: &Transcript, u: &UnveilMessage) -> Check {
    let modulus = t.params.modulus();
    let expected = segment_bounds(u.round.max(1), modulus.bits())
        .map_err(|e| Rejection::new(CountMismatch, e.to_string()))?
        .count;
    if u.revealed.len() != expected {
        return Err(Rejection::new(
            CountMismatch,
            format!(
                "unveiling of round {} reveals {} values, expected {expected}",
                u.round,
                u.revealed.len()
            ),
        )
        .at(u.round, None));
    }
    if let Some(j) = u.revealed.iter().position(|&v| !modulus.contains(v)) {
        return Err(
            Rejection::new(RangeError, format!("revealed value {j} is out of range"))
                .at(u.round, Some(j)),
        );
    }
    Ok(())
}

fn check_round_timing(t: &Transcript) -> Check {
    let p = &t.params;
    let max_echo = p.delta().times(2);
    for h in &t.handshake {
        let echo = h.returned - h.sent;
        if echo.is_negative() || echo > max_echo {
            return Err(Rejection::new(
                TimingViolation,
                format!(
                    "test signal at site {} echoed after {echo}, above 2delta = {max_echo}",
                    h.site
                ),
            ));
        }
    }
    for r in &t.rounds {
        let k = r.k;
        let w = p.round_window(k);
        let c = &r.challenge;
        let response_end = r.response.as_ref().map_or(Seconds::ZERO, |x| x.end);
        let problem = if c.start < w.challenge_start {
            Some(format!(
                "challenge starts at {} before {}",
                c.start, w.challenge_start
            ))
        } else if c.end < c.start {
            Some(format!(
                "challenge ends at {} before it starts at {}",
                c.end, c.start
            ))
        } else if c.end > w.challenge_end {
            Some(format!(
                "challenge completes at {} after {}",
                c.end, w.challenge_end
            ))
        } else if response_end < c.end {
            Some(format!(
                "response completes at {response_end} before the challenge at {}",
                c.end
            ))
        } else if response_end > w.response_end {
            Some(format!(
                "response completes at {response_end} after {}",
                w.response_end
            ))
        } else {
            None
        };
        if let Some(detail) = problem {
            return Err(
                Rejection::new(TimingViolation, format!("round {k}: {detail}")).at(k, None),
            );
        }
    }
    Ok(())
}

fn check_unveil_timing(t: &Transcript, u: &UnveilMessage) -> Check {
    let p = &t.params;
    let expected_site = round_site(u.round).other();
    if u.site != expected_site {
        return Err(Rejection::new(
            SiteMismatch,
            format!(
                "round {} must be unveiled at site {expected_site}, not {}",
                u.round, u.site
            ),
        )
        .at(u.round, None));
    }
    let earliest = p.round_window(u.round).challenge_start;
    let deadline = p.unveil_deadline(u.round);
    if u.completes_at < earliest || u.completes_at >= deadline {
        return Err(Rejection::new(
            TimingViolation,
            format!(
                "unveiling of round {} completes at {}, outside [{earliest}, {deadline})",
                u.round, u.completes_at
            ),
        )
        .at(u.round, None));
    }
    Ok(())
}

fn check_aggregation(t: &Transcript) -> Check {
    let Some(recorded) = t.aggregation else {
        return Err(Rejection::new(IncompleteTranscript, "no aggregation event"));
    };
    let earliest = aggregate_event_at(t, recorded.site)
        .ok_or_else(|| Rejection::new(IncompleteTranscript, "records missing at aggregation"))?;
    if recorded.time < earliest.time {
        return Err(Rejection::new(
            IncompleteTranscript,
            format!(
                "verdict requested at {} but the data cannot be at site {} before {}",
                recorded.time, recorded.site, earliest.time
            ),
        ));
    }
    Ok(())
}

fn decode_failure(f: DecodeFailure) -> Rejection {
    Rejection::new(
        DecodeMismatch,
        format!(
            "round {} position {} does not open to a valid commitment",
            f.round, f.index
        ),
    )
    .at(f.round, Some(f.index))
}

fn issued_at(t: &Transcript) -> Option<SpacetimeEvent> {
    t.aggregation.or_else(|| aggregate_event(t))
}

fn verdict(t: &Transcript, result: Result<Bit, Rejection>) -> Verdict {
    Verdict {
        outcome: match result {
            Ok(bit) => Outcome::Accept(bit),
            Err(r) => Outcome::Reject(r),
        },
        issued_at: issued_at(t),
    }
}

fn verify_single(t: &Transcript) -> Result<Bit, Rejection> {
    check_rounds(t)?;
    let [u] = t.unveils.as_slice() else {
        return Err(Rejection::new(
            CountMismatch,
            format!("{} unveilings present", t.unveils.len()),
        ));
    };
    let last = t.rounds.len() as u32;
    if u.round != last {
        return Err(Rejection::new(
            CountMismatch,
            format!(
                "unveiling names round {} but round {last} was the last committed",
                u.round
            ),
        )
        .at(u.round, None));
    }
    check_unveil_shape(t, u)?;
    check_round_timing(t)?;
    check_unveil_timing(t, u)?;
    check_aggregation(t)?;
    backward_decode(&t.rounds, &u.revealed, t.params.modulus()).map_err(decode_failure)
}

/// Verifies a transcript, dispatching to [`dual_unveil_check`] when both
/// Alice laboratories unveiled.
pub fn verify(t: &Transcript) -> Verdict {
    if t.unveils.len() == 2 {
        return dual_unveil_check(t);
    }
    verdict(t, verify_single(t))
}

fn verify_dual(t: &Transcript) -> Result<Bit, Rejection> {
    check_rounds(t)?;
    let last = t.rounds.len() as u32;
    if t.unveils.len() != 2 || last < 2 {
        return Err(Rejection::new(
            CountMismatch,
            format!(
                "dual unveiling needs two unveilings and two rounds, got {} and {last}",
                t.unveils.len()
            ),
        ));
    }
    let primary = t.unveils.iter().find(|u| u.round == last);
    let secondary = t.unveils.iter().find(|u| u.round + 1 == last);
    let (Some(primary), Some(secondary)) = (primary, secondary) else {
        return Err(Rejection::new(
            CountMismatch,
            format!("dual unveiling must cover rounds {last} and {}", last - 1),
        ));
    };
    check_unveil_shape(t, primary)?;
    check_unveil_shape(t, secondary)?;
    check_round_timing(t)?;
    check_unveil_timing(t, primary)?;
    check_unveil_timing(t, secondary)?;
    let a = SpacetimeEvent::new(primary.completes_at, primary.site);
    let b = SpacetimeEvent::new(secondary.completes_at, secondary.site);
    if !t.params.spacelike(a, b) {
        return Err(Rejection::new(
            TimingViolation,
            format!(
                "unveilings at {} and {} are not spacelike separated",
                a.time, b.time
            ),
        ));
    }
    check_aggregation(t)?;

    let modulus = t.params.modulus();
    let bit = backward_decode(&t.rounds, &primary.revealed, modulus).map_err(decode_failure)?;
    let implied =
        unwind(&t.rounds, last, &primary.revealed, last - 1, modulus).map_err(decode_failure)?;
    if let Some(j) = implied
        .iter()
        .zip(&secondary.revealed)
        .position(|(a, b)| a != b)
    {
        return Err(Rejection::new(
            DecodeMismatch,
            format!("the two unveilings disagree on round {} key {j}", last - 1),
        )
        .at(last - 1, Some(j)));
    }
    let other = backward_decode(&t.rounds[..last as usize - 1], &secondary.revealed, modulus)
        .map_err(decode_failure)?;
    if other != bit {
        return Err(Rejection::new(
            DecodeMismatch,
            "the two unveilings open different bits",
        ));
    }
    Ok(bit)
}

/// Both Alice laboratories unveiled at spacelike separated points: the site
/// opposite round R reveals round R's keys, round R's own site reveals round
/// R-1's. Each must verify on its own, the round R-1 keys implied by the
/// first must equal those revealed by the second, and both must open the
/// same bit.
pub fn dual_unveil_check(t: &Transcript) -> Verdict {
    verdict(t, verify_dual(t))
}
