//! Exact optimal forgery success by exhaustive enumeration.
//!
//! The cheater commits honestly to `b` and then tries to unveil `1 - b`.
//! At the unveiling she knows her tape, her responses and the pairs of every
//! round before R (those have reached her site); the pairs of round R have
//! not. Every commitment slot is an independent game: Bob's pair and the
//! slot's key are uniform and independent of every other slot, so a slot
//! that must open to a different bit than it was committed to contributes
//! an independent factor.
//!
//! The value of a slot is computed by enumerating every (key, committed bit,
//! pair) configuration:
//! - in round R the cheater knows only the key and the committed bit, so
//!   the best revealed key is chosen per (key, bit) against every pair;
//! - in a known round, the cheater sees the pair and picks the forged key
//!   that opens the required bit; each binary digit of that key that differs
//!   from the true key becomes a round k+1 slot that must flip.
//!
//! The known-round step is exact only when at most one forged key opens the
//! required bit, which the enumeration checks as it goes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::codec::{commit_one, decode_one, Bit, CodecError, Modulus, Pair, Residue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle instance needs about {estimate} evaluations, above the budget of {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("at least one round is required")]
    NoRounds,
    #[error(transparent)]
    Modulus(#[from] CodecError),
    #[error("round {0}: more than one forged key opens the required bit")]
    AmbiguousForgery(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_evaluations: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_evaluations: 50_000_000,
        }
    }
}

/// Approximate number of decode evaluations for an `(m, rounds)` instance.
pub fn oracle_size(m: u32, rounds: u32) -> u128 {
    let n = 1u128.checked_shl(m).unwrap_or(u128::MAX);
    // two slot kinds x N keys x 2 bits x N(N-1) pairs x N candidate keys, per round
    n.saturating_mul(n)
        .saturating_mul(n)
        .saturating_mul(n.saturating_sub(1))
        .saturating_mul(4)
        .saturating_mul(u128::from(rounds))
}

pub fn is_oracle_sized(m: u32, rounds: u32, budget: OracleBudget) -> bool {
    rounds >= 1 && oracle_size(m, rounds) <= budget.max_evaluations
}

/// Success probabilities of one slot: opening a changed bit, or the original.
#[derive(Clone, Debug, PartialEq)]
struct SlotValue {
    flip: BigRational,
    keep: BigRational,
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn ordered_pairs(modulus: Modulus) -> Vec<Pair> {
    let n = modulus.value();
    (0..n)
        .flat_map(|n0| {
            (0..n)
                .filter(move |&n1| n1 != n0)
                .map(move |n1| Pair::new(n0, n1))
        })
        .collect()
}

const BITS: [Bit; 2] = [Bit::Zero, Bit::One];

fn opens_to(response: Residue, pair: Pair, key: Residue, modulus: Modulus) -> Option<Bit> {
    decode_one(response, pair, key, modulus).expect("enumerated values are in range")
}

/// A slot whose pair the cheater has not seen.
fn unseen_slot(modulus: Modulus) -> SlotValue {
    let n = modulus.value();
    let pairs = ordered_pairs(modulus);
    let value = |flip: bool| {
        let (mut wins, mut total) = (0u64, 0u64);
        for key in 0..n {
            for bit in BITS {
                let target = if flip { bit.flipped() } else { bit };
                let responses: Vec<(Pair, Residue)> = pairs
                    .iter()
                    .map(|&p| (p, commit_one(p, key, bit, modulus).expect("valid pair")))
                    .collect();
                let best = (0..n)
                    .map(|guess| {
                        responses
                            .iter()
                            .filter(|&&(p, r)| opens_to(r, p, guess, modulus) == Some(target))
                            .count() as u64
                    })
                    .max()
                    .unwrap_or(0);
                wins += best;
                total += responses.len() as u64;
            }
        }
        ratio(wins, total)
    };
    SlotValue {
        flip: value(true),
        keep: value(false),
    }
}

/// A slot whose pair the cheater has seen; `child` values the slots of the
/// next round that commit this slot's key.
fn seen_slot(modulus: Modulus, child: &SlotValue, round: u32) -> Result<SlotValue, OracleError> {
    let n = modulus.value();
    let m = modulus.bits();
    let pairs = ordered_pairs(modulus);
    // value of a forged key differing from the true key in h binary digits
    let by_distance: Vec<BigRational> = (0..=m)
        .map(|h| {
            let mut v = BigRational::one();
            for _ in 0..h {
                v *= &child.flip;
            }
            for _ in h..m {
                v *= &child.keep;
            }
            v
        })
        .collect();
    let value = |flip: bool| -> Result<BigRational, OracleError> {
        let mut sum = BigRational::zero();
        let mut total = 0u64;
        for key in 0..n {
            for bit in BITS {
                let target = if flip { bit.flipped() } else { bit };
                for &pair in &pairs {
                    let response = commit_one(pair, key, bit, modulus).expect("valid pair");
                    let mut options =
                        (0..n).filter(|&k| opens_to(response, pair, k, modulus) == Some(target));
                    let best = options.next();
                    if options.next().is_some() {
                        return Err(OracleError::AmbiguousForgery(round));
                    }
                    if let Some(forged) = best {
                        sum += &by_distance[(forged ^ key).count_ones() as usize];
                    }
                    total += 1;
                }
            }
        }
        Ok(sum / BigRational::from_integer(BigInt::from(total)))
    };
    Ok(SlotValue {
        flip: value(true)?,
        keep: value(false)?,
    })
}

/// Exact optimal probability that a cheater who committed honestly
/// unveils the opposite bit after `rounds` rounds with security parameter `m`.
pub fn optimal_flip_success(
    m: u32,
    rounds: u32,
    budget: OracleBudget,
) -> Result<BigRational, OracleError> {
    if rounds == 0 {
        return Err(OracleError::NoRounds);
    }
    let modulus = Modulus::new(m)?;
    let estimate = oracle_size(m, rounds);
    if estimate > budget.max_evaluations {
        return Err(OracleError::BudgetExceeded {
            estimate,
            budget: budget.max_evaluations,
        });
    }
    let mut value = unseen_slot(modulus);
    for k in (1..rounds).rev() {
        value = seen_slot(modulus, &value, k)?;
    }
    Ok(value.flip)
}

pub fn to_f64(p: &BigRational) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}
