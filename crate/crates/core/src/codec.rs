//! Commitment arithmetic modulo `N = 2^m`.
//!
//! A single bit is committed against a labelled pair `(n0, n1)` and a one-time
//! key as `n_bit + key mod N`. From round 2 on, each round commits the binary
//! forms of the keys the previous round consumed, so the number of
//! commitments grows by a factor of `m` per round.
//!
//! Tape indices are 0-based: the first shared random number is index 0.
//! Bits are paired LSB first within a number, numbers in ascending tape
//! order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spacetime::MAX_SECURITY_PARAMETER;

/// A value in `[0, N)`.
pub type Residue = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("security parameter m must be in 2..={MAX_SECURITY_PARAMETER}, got {0}")]
    BadModulus(u32),
    #[error("value {value} is outside [0, {modulus})")]
    OutOfRange { value: u64, modulus: u64 },
    #[error("pair has equal members ({0}, {0})")]
    DuplicatePair(Residue),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("round 1 carries the committed bit, not a tape payload")]
    NoPayloadForFirstRound,
    #[error("round index must be at least 1")]
    ZeroRound,
    #[error("random tape too short: need {needed} values, have {available}")]
    TapeTooShort { needed: usize, available: usize },
    #[error("round {0} is too large to address")]
    Overflow(u32),
}

/// The modulus `N = 2^m` for a security parameter `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    bits: u32,
}

impl Modulus {
    pub fn new(bits: u32) -> Result<Self, CodecError> {
        if (2..=MAX_SECURITY_PARAMETER).contains(&bits) {
            Ok(Modulus { bits })
        } else {
            Err(CodecError::BadModulus(bits))
        }
    }

    /// The security parameter `m`.
    pub fn bits(self) -> u32 {
        self.bits
    }

    /// `N`.
    pub fn value(self) -> u64 {
        1u64 << self.bits
    }

    pub fn contains(self, x: u64) -> bool {
        x < self.value()
    }

    pub fn check(self, x: u64) -> Result<Residue, CodecError> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(CodecError::OutOfRange {
                value: x,
                modulus: self.value(),
            })
        }
    }

    pub fn add(self, a: Residue, b: Residue) -> Residue {
        (a + b) & (self.value() - 1)
    }

    pub fn sub(self, a: Residue, b: Residue) -> Residue {
        a.wrapping_sub(b) & (self.value() - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn flipped(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn from_bool(b: bool) -> Bit {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }
}

impl From<Bit> for u8 {
    fn from(b: Bit) -> u8 {
        b.as_u8()
    }
}

impl TryFrom<u8> for Bit {
    type Error = String;
    fn try_from(v: u8) -> Result<Bit, String> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(format!("bit must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Bob's labelled pair. Serialized as `[n0, n1]`.
///
/// Members are public because transcripts must be able to carry malformed
/// pairs for the verifier to reject; [`Pair::check`] enforces the invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct Pair {
    pub n0: Residue,
    pub n1: Residue,
}

impl From<[u64; 2]> for Pair {
    fn from([n0, n1]: [u64; 2]) -> Pair {
        Pair { n0, n1 }
    }
}

impl From<Pair> for [u64; 2] {
    fn from(p: Pair) -> [u64; 2] {
        [p.n0, p.n1]
    }
}

impl Pair {
    pub fn new(n0: Residue, n1: Residue) -> Pair {
        Pair { n0, n1 }
    }

    pub fn select(self, bit: Bit) -> Residue {
        match bit {
            Bit::Zero => self.n0,
            Bit::One => self.n1,
        }
    }

    /// Both members in range and distinct.
    pub fn check(self, modulus: Modulus) -> Result<Pair, CodecError> {
        modulus.check(self.n0)?;
        modulus.check(self.n1)?;
        if self.n0 == self.n1 {
            return Err(CodecError::DuplicatePair(self.n0));
        }
        Ok(self)
    }
}

/// Bob's challenge for one round: `m^(k-1)` labelled pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairChallenge {
    pub round: u32,
    pub pairs: Vec<Pair>,
}

/// Alice's answer to a [`PairChallenge`], one residue per pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitResponse {
    pub round: u32,
    pub values: Vec<Residue>,
}

/// The random list shared by both Alice agents before the protocol starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomTape {
    modulus: Modulus,
    values: Vec<Residue>,
}

impl RandomTape {
    pub fn new(modulus: Modulus, values: Vec<Residue>) -> Result<Self, CodecError> {
        for &v in &values {
            modulus.check(v)?;
        }
        Ok(RandomTape { modulus, values })
    }

    /// Draws `len` independent uniform residues.
    pub fn generate<R: rand::Rng + ?Sized>(modulus: Modulus, len: usize, rng: &mut R) -> Self {
        let values = (0..len)
            .map(|_| rng.random_range(0..modulus.value()))
            .collect();
        RandomTape { modulus, values }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn values(&self) -> &[Residue] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The keys consumed by round `k`.
    pub fn segment(&self, k: u32) -> Result<&[Residue], CodecError> {
        let seg = segment_bounds(k, self.modulus.bits())?;
        let end = seg.start + seg.count;
        if end > self.values.len() {
            return Err(CodecError::TapeTooShort {
                needed: end,
                available: self.values.len(),
            });
        }
        Ok(&self.values[seg.start..end])
    }
}

/// `(n_bit + key) mod N`.
pub fn commit_one(
    pair: Pair,
    key: Residue,
    bit: Bit,
    modulus: Modulus,
) -> Result<Residue, CodecError> {
    let pair = pair.check(modulus)?;
    let key = modulus.check(key)?;
    Ok(modulus.add(pair.select(bit), key))
}

/// Inverts [`commit_one`]. `Ok(None)` means the response matches neither
/// pair member under this key.
pub fn decode_one(
    response: Residue,
    pair: Pair,
    key: Residue,
    modulus: Modulus,
) -> Result<Option<Bit>, CodecError> {
    let pair = pair.check(modulus)?;
    let response = modulus.check(response)?;
    let key = modulus.check(key)?;
    let n = modulus.sub(response, key);
    Ok(if n == pair.n0 {
        Some(Bit::Zero)
    } else if n == pair.n1 {
        Some(Bit::One)
    } else {
        None
    })
}

/// `[a_0, ..., a_{m-1}]` with `x = sum a_j 2^j`.
pub fn binary_form(x: Residue, m: u32) -> Result<Vec<Bit>, CodecError> {
    let modulus = Modulus::new(m)?;
    modulus.check(x)?;
    Ok((0..m).map(|j| Bit::from_bool((x >> j) & 1 == 1)).collect())
}

/// Inverse of [`binary_form`] for any slice of at most 64 bits.
pub fn from_binary(bits: &[Bit]) -> Residue {
    assert!(bits.len() <= 64);
    bits.iter()
        .enumerate()
        .fold(0, |acc, (j, b)| acc | (u64::from(b.as_u8()) << j))
}

/// Location of a round's keys on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub count: usize,
}

/// Round `k` uses `m^(k-1)` keys starting at `(m^(k-1) - 1)/(m - 1)`.
pub fn segment_bounds(k: u32, m: u32) -> Result<Segment, CodecError> {
    if k == 0 {
        return Err(CodecError::ZeroRound);
    }
    let m = m as usize;
    let mut start = 0usize;
    let mut count = 1usize;
    for _ in 1..k {
        start = start.checked_add(count).ok_or(CodecError::Overflow(k))?;
        count = count.checked_mul(m).ok_or(CodecError::Overflow(k))?;
    }
    start.checked_add(count).ok_or(CodecError::Overflow(k))?;
    Ok(Segment { start, count })
}

/// Bits committed in round `k >= 2`: the binary forms of round `k-1`'s keys.
pub fn round_payload_bits(k: u32, tape: &RandomTape) -> Result<Vec<Bit>, CodecError> {
    match k {
        0 => Err(CodecError::ZeroRound),
        1 => Err(CodecError::NoPayloadForFirstRound),
        _ => {
            let m = tape.modulus().bits();
            let mut bits = Vec::new();
            for &v in tape.segment(k - 1)? {
                bits.extend(binary_form(v, m)?);
            }
            Ok(bits)
        }
    }
}

/// Elementwise [`commit_one`].
pub fn commit_round(
    bits: &[Bit],
    pairs: &[Pair],
    keys: &[Residue],
    modulus: Modulus,
) -> Result<Vec<Residue>, CodecError> {
    if pairs.len() != bits.len() {
        return Err(CodecError::LengthMismatch {
            expected: bits.len(),
            found: pairs.len(),
        });
    }
    if keys.len() != bits.len() {
        return Err(CodecError::LengthMismatch {
            expected: bits.len(),
            found: keys.len(),
        });
    }
    bits.iter()
        .zip(pairs)
        .zip(keys)
        .map(|((&bit, &pair), &key)| commit_one(pair, key, bit, modulus))
        .collect()
}
