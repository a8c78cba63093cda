//! Resource accounting: tape consumption, per-round traffic and how many
//! rounds a channel of given rate can sustain.
//!
//! Traffic counts protocol payload only. Each commitment in round `k` costs
//! a challenge of two `m`-bit numbers plus an `m`-bit response, and all of
//! round `k`'s traffic has to fit in one period `T`.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::spacetime::ProtocolParams;
use crate::time::Seconds;

const ATTO_PER_SEC: u64 = 1_000_000_000_000_000_000;

/// Keys consumed by `rounds` rounds: `(m^R - 1)/(m - 1)`.
pub fn tape_consumed(m: u32, rounds: u32) -> BigUint {
    let mut total = BigUint::zero();
    let mut width = BigUint::one();
    for _ in 0..rounds {
        total += &width;
        width *= m;
    }
    total
}

/// Payload bits exchanged in round `k`: `3 m * m^(k-1)`.
pub fn round_traffic_bits(m: u32, k: u32) -> BigUint {
    assert!(k >= 1, "rounds are numbered from 1");
    BigUint::from(3 * m) * BigUint::from(m).pow(k - 1)
}

fn fits(m: u32, k: u32, budget_atto: &BigUint) -> bool {
    round_traffic_bits(m, k) * ATTO_PER_SEC <= *budget_atto
}

/// `baud * T` in bit-attoseconds per second, i.e. the per-period bit budget
/// scaled by 10^18.
fn period_budget(params: &ProtocolParams, baud: u64) -> BigUint {
    let period = BigUint::try_from(params.period().as_atto()).expect("a valid period is positive");
    period * baud
}

/// Largest `R` whose round traffic fits in one period at `baud` bits per
/// second; 0 if not even round 1 fits.
pub fn max_practical_rounds(params: &ProtocolParams, baud: u64) -> u32 {
    let budget = period_budget(params, baud);
    let mut rounds = 0;
    while fits(params.m(), rounds + 1, &budget) {
        rounds += 1;
    }
    rounds
}

fn as_string<S: Serializer>(value: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrafficRow {
    pub round: u32,
    #[serde(serialize_with = "as_string")]
    pub bits: BigUint,
    pub fits: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapacityReport {
    pub m: u32,
    pub delta_x: Seconds,
    pub delta: Seconds,
    pub delta_t: Seconds,
    pub period: Seconds,
    pub baud: u64,
    /// Rounds 1 through `max_rounds + 1`, the last being the first that does not fit.
    pub traffic: Vec<TrafficRow>,
    #[serde(serialize_with = "as_string")]
    pub tape_consumed: BigUint,
    pub max_rounds: u32,
}

impl CapacityReport {
    pub fn new(params: &ProtocolParams, baud: u64) -> Self {
        let max_rounds = max_practical_rounds(params, baud);
        let budget = period_budget(params, baud);
        let traffic = (1..=max_rounds + 1)
            .map(|k| TrafficRow {
                round: k,
                bits: round_traffic_bits(params.m(), k),
                fits: fits(params.m(), k, &budget),
            })
            .collect();
        CapacityReport {
            m: params.m(),
            delta_x: params.delta_x(),
            delta: params.delta(),
            delta_t: params.delta_t(),
            period: params.period(),
            baud,
            traffic,
            tape_consumed: tape_consumed(params.m(), max_rounds),
            max_rounds,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let header = [
            ("m", self.m.to_string()),
            ("dx", format!("{} s", self.delta_x)),
            ("delta", format!("{} s", self.delta)),
            ("dt", format!("{} s", self.delta_t)),
            ("period", format!("{} s", self.period)),
            ("baud", format!("{} bit/s", self.baud)),
            ("max_rounds", self.max_rounds.to_string()),
            ("tape_consumed", self.tape_consumed.to_string()),
        ];
        let key_width = header.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &header {
            let _ = writeln!(out, "{k:<key_width$}  {v}");
        }
        out.push('\n');
        let bits: Vec<String> = self.traffic.iter().map(|r| r.bits.to_string()).collect();
        let round_w = self
            .traffic
            .iter()
            .map(|r| r.round.to_string().len())
            .max()
            .unwrap_or(0)
            .max(5);
        let bits_w = bits.iter().map(String::len).max().unwrap_or(0).max(4);
        let _ = writeln!(out, "{:>round_w$}  {:>bits_w$}  fits", "round", "bits");
        for (row, b) in self.traffic.iter().zip(&bits) {
            let fit = if row.fits { "yes" } else { "no" };
            let _ = writeln!(out, "{:>round_w$}  {:>bits_w$}  {fit}", row.round, b);
        }
        out
    }
}
