//! Site geometry and round scheduling in the agreed inertial frame (c = 1).
//!
//! Laboratory positions enter only through the two site ids, the nominal
//! separation `delta_x` and the placement tolerance `delta`. Every bound uses
//! worst-case placement inside the tolerance ball, so the exact coordinates of
//! a laboratory are never needed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Modulus;
use crate::time::Seconds;

/// Largest accepted security parameter; residues must fit comfortably in `u64`.
pub const MAX_SECURITY_PARAMETER: u32 = 32;

/// Upper bound on the site separation, keeping every schedulable time far
/// from the range of [`Seconds`].
pub const MAX_SEPARATION_SECS: i64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Site {
    One,
    Two,
}

impl Site {
    pub const BOTH: [Site; 2] = [Site::One, Site::Two];

    pub fn other(self) -> Site {
        match self {
            Site::One => Site::Two,
            Site::Two => Site::One,
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Site::One => 1,
            Site::Two => 2,
        }
    }
}

impl From<Site> for u8 {
    fn from(site: Site) -> u8 {
        site.id()
    }
}

impl TryFrom<u8> for Site {
    type Error = String;
    fn try_from(id: u8) -> Result<Self, String> {
        match id {
            1 => Ok(Site::One),
            2 => Ok(Site::Two),
            other => Err(format!("site id must be 1 or 2, got {other}")),
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Site of the k-th commitment round: odd rounds run at site 1, even at site 2.
pub fn round_site(k: u32) -> Site {
    assert!(k >= 1, "rounds are numbered from 1");
    if k % 2 == 1 {
        Site::One
    } else {
        Site::Two
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("security parameter m must be in 2..={MAX_SECURITY_PARAMETER}, got {0}")]
    SecurityParameter(u32),
    #[error("site separation must be positive, got {0}")]
    NonPositiveSeparation(Seconds),
    #[error("site separation {0} exceeds the supported maximum of {MAX_SEPARATION_SECS} s")]
    SeparationTooLarge(Seconds),
    #[error("placement tolerance must be non-negative, got {0}")]
    NegativeTolerance(Seconds),
    #[error("round window must be positive, got {0}")]
    NonPositiveWindow(Seconds),
    #[error("round period dx - 2dt - 3delta = {0} is not positive")]
    NonPositivePeriod(Seconds),
    #[error("placement tolerance {delta} must be below dx/10 (dx = {delta_x})")]
    ToleranceTooLarge { delta: Seconds, delta_x: Seconds },
    #[error("round window {delta_t} must be below dx/10 (dx = {delta_x})")]
    WindowTooLarge { delta_t: Seconds, delta_x: Seconds },
    #[error("rounds overlap: delta + 2dt = {busy} is not below the period {period}")]
    OverlappingRounds { busy: Seconds, period: Seconds },
}

/// Validated protocol parameters.
///
/// Construction enforces `dx > 10 delta`, `10 dt < dx`, a positive period
/// `T = dx - 2dt - 3delta` and `delta + 2dt < T`, so that round windows are
/// disjoint and every honest response lands before the unveil deadline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ProtocolParams {
    m: u32,
    delta_x: Seconds,
    delta: Seconds,
    delta_t: Seconds,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    m: u32,
    delta_x: Seconds,
    delta: Seconds,
    delta_t: Seconds,
}

impl TryFrom<RawParams> for ProtocolParams {
    type Error = ParamsError;
    fn try_from(raw: RawParams) -> Result<Self, ParamsError> {
        ProtocolParams::new(raw.m, raw.delta_x, raw.delta, raw.delta_t)
    }
}

impl From<ProtocolParams> for RawParams {
    fn from(p: ProtocolParams) -> RawParams {
        RawParams {
            m: p.m,
            delta_x: p.delta_x,
            delta: p.delta,
            delta_t: p.delta_t,
        }
    }
}

/// Time bounds of one commitment round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundWindow {
    /// Bob may start sending the challenge from here.
    pub challenge_start: Seconds,
    /// Bob's challenge must be complete by here.
    pub challenge_end: Seconds,
    /// Alice's response must be complete by here.
    pub response_end: Seconds,
}

impl ProtocolParams {
    pub fn new(
        m: u32,
        delta_x: Seconds,
        delta: Seconds,
        delta_t: Seconds,
    ) -> Result<Self, ParamsError> {
        if !(2..=MAX_SECURITY_PARAMETER).contains(&m) {
            return Err(ParamsError::SecurityParameter(m));
        }
        if !delta_x.is_positive() {
            return Err(ParamsError::NonPositiveSeparation(delta_x));
        }
        if delta_x > Seconds::from_secs(MAX_SEPARATION_SECS) {
            return Err(ParamsError::SeparationTooLarge(delta_x));
        }
        if delta.is_negative() {
            return Err(ParamsError::NegativeTolerance(delta));
        }
        if !delta_t.is_positive() {
            return Err(ParamsError::NonPositiveWindow(delta_t));
        }
        let params = ProtocolParams {
            m,
            delta_x,
            delta,
            delta_t,
        };
        let period = params.period();
        if !period.is_positive() {
            return Err(ParamsError::NonPositivePeriod(period));
        }
        if delta.times(10) >= delta_x {
            return Err(ParamsError::ToleranceTooLarge { delta, delta_x });
        }
        if delta_t.times(10) >= delta_x {
            return Err(ParamsError::WindowTooLarge { delta_t, delta_x });
        }
        let busy = delta + delta_t.times(2);
        if busy >= period {
            return Err(ParamsError::OverlappingRounds { busy, period });
        }
        Ok(params)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.m).expect("m validated at construction")
    }

    pub fn delta_x(&self) -> Seconds {
        self.delta_x
    }

    pub fn delta(&self) -> Seconds {
        self.delta
    }

    pub fn delta_t(&self) -> Seconds {
        self.delta_t
    }

    /// Round period `T = dx - 2dt - 3delta`.
    pub fn period(&self) -> Seconds {
        self.delta_x - self.delta_t.times(2) - self.delta.times(3)
    }

    /// Conservative lower bound `dx - 2delta` on any cross-site signal delay.
    pub fn min_cross_delay(&self) -> Seconds {
        self.delta_x - self.delta.times(2)
    }

    pub fn round_window(&self, k: u32) -> RoundWindow {
        assert!(k >= 1, "rounds are numbered from 1");
        let start = self.period().times(u64::from(k - 1));
        RoundWindow {
            challenge_start: start,
            challenge_end: start + self.delta_t,
            response_end: start + self.delta + self.delta_t.times(2),
        }
    }

    /// Time before which an unveiling of round `last_round` must complete.
    ///
    /// The unveiler sits at the site opposite the round; anything she emits
    /// strictly before this instant is outside the future light cone of the
    /// round's challenge.
    pub fn unveil_deadline(&self, last_round: u32) -> Seconds {
        assert!(last_round >= 1, "rounds are numbered from 1");
        self.period().times(u64::from(last_round - 1)) + self.min_cross_delay()
    }

    /// Whether two events are guaranteed causally disconnected.
    ///
    /// Same-site events are never reported spacelike since laboratory
    /// positions are only known to within `delta`.
    pub fn spacelike(&self, a: SpacetimeEvent, b: SpacetimeEvent) -> bool {
        a.site != b.site && (a.time - b.time).abs() < self.min_cross_delay()
    }
}

/// A point in the agreed frame, located at one of the two sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub time: Seconds,
    pub site: Site,
}

impl SpacetimeEvent {
    pub fn new(time: Seconds, site: Site) -> Self {
        SpacetimeEvent { time, site }
    }
}
