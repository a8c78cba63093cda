//! The transcript: the complete timed record of one protocol run, and its
//! versioned JSON file format.
//!
//! Residues are JSON integers; times are decimal strings holding exact
//! values (see [`Seconds`]). A transcript written by [`Transcript::to_json`]
//! parses and re-serializes to identical bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::UnveilMessage;
use crate::codec::{Pair, Residue};
use crate::spacetime::{ProtocolParams, Site, SpacetimeEvent};
use crate::time::Seconds;

pub const TRANSCRIPT_VERSION: &str = "rbc-transcript/1";

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("malformed transcript: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported transcript version {0:?} (expected {TRANSCRIPT_VERSION:?})")]
    Version(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeRecord {
    pub start: Seconds,
    pub end: Seconds,
    pub pairs: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub end: Seconds,
    pub values: Vec<Residue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub k: u32,
    pub site: Site,
    pub challenge: ChallengeRecord,
    /// Absent when the run aborted before Alice answered.
    pub response: Option<ResponseRecord>,
}

/// A test-signal echo between the Bob and Alice laboratories at one site.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandshakeRecord {
    pub site: Site,
    pub sent: Seconds,
    pub returned: Seconds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: String,
    pub generator: String,
    pub params: ProtocolParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub handshake: Vec<HandshakeRecord>,
    pub rounds: Vec<RoundRecord>,
    pub unveils: Vec<UnveilMessage>,
    pub aggregation: Option<SpacetimeEvent>,
    pub abort: Option<String>,
}

impl Transcript {
    pub fn new(params: ProtocolParams, generator: impl Into<String>) -> Self {
        Transcript {
            version: TRANSCRIPT_VERSION.to_string(),
            generator: generator.into(),
            params,
            handshake: Vec::new(),
            rounds: Vec::new(),
            unveils: Vec::new(),
            aggregation: None,
            abort: None,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("transcripts always serialize");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, TranscriptError> {
        let t: Transcript = serde_json::from_str(text)?;
        if t.version != TRANSCRIPT_VERSION {
            return Err(TranscriptError::Version(t.version));
        }
        Ok(t)
    }

    /// Default aggregation site: where the (first) unveiling was received.
    pub fn default_hq(&self) -> Option<Site> {
        self.unveils.first().map(|u| u.site)
    }
}

/// Earliest event at `hq` by which every round record and every unveiling
/// can have arrived there.
///
/// Data completed at `hq` counts as present on completion; data from the
/// other site arrives `dx - 2delta` later, the earliest physics allows.
/// Returns `None` while the transcript has no unveiling or an unanswered round.
pub fn aggregate_event_at(transcript: &Transcript, hq: Site) -> Option<SpacetimeEvent> {
    if transcript.unveils.is_empty() {
        return None;
    }
    let cross = transcript.params.min_cross_delay();
    let arrival = |at: Seconds, from: Site| if from == hq { at } else { at + cross };
    let mut latest = Seconds::ZERO;
    for round in &transcript.rounds {
        let response = round.response.as_ref()?;
        latest = latest
            .max(arrival(round.challenge.end, round.site))
            .max(arrival(response.end, round.site));
    }
    for u in &transcript.unveils {
        latest = latest.max(arrival(u.completes_at, u.site));
    }
    Some(SpacetimeEvent::new(latest, hq))
}

/// [`aggregate_event_at`] the default HQ site.
pub fn aggregate_event(transcript: &Transcript) -> Option<SpacetimeEvent> {
    aggregate_event_at(transcript, transcript.default_hq()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::round_site;

    fn params() -> ProtocolParams {
        ProtocolParams::new(
            2,
            Seconds::from_secs(1),
            Seconds::from_decimal(5, 3),
            Seconds::from_decimal(1, 2),
        )
        .unwrap()
    }

    fn round(k: u32, end: Seconds) -> RoundRecord {
        RoundRecord {
            k,
            site: round_site(k),
            challenge: ChallengeRecord {
                start: Seconds::ZERO,
                end: Seconds::ZERO,
                pairs: vec![Pair::new(1, 2)],
            },
            response: Some(ResponseRecord {
                end,
                values: vec![0],
            }),
        }
    }

    #[test]
    fn aggregation_waits_for_remote_records() {
        let p = params();
        let mut t = Transcript::new(p, "test");
        let resp_end = Seconds::from_decimal(25, 3);
        t.rounds.push(round(1, resp_end));
        assert_eq!(aggregate_event(&t), None);
        t.unveils.push(UnveilMessage {
            round: 1,
            site: Site::Two,
            completes_at: resp_end,
            revealed: vec![3],
        });
        let agg = aggregate_event(&t).unwrap();
        assert_eq!(
            agg,
            SpacetimeEvent::new(resp_end + p.min_cross_delay(), Site::Two)
        );
    }

    #[test]
    fn aggregation_with_everything_local_is_latest_completion() {
        let mut t = Transcript::new(params(), "test");
        t.rounds.push(round(1, Seconds::from_decimal(25, 3)));
        t.unveils.push(UnveilMessage {
            round: 1,
            site: Site::One,
            completes_at: Seconds::from_decimal(4, 2),
            revealed: vec![3],
        });
        assert_eq!(
            aggregate_event(&t).unwrap(),
            SpacetimeEvent::new(Seconds::from_decimal(4, 2), Site::One)
        );
    }

    #[test]
    fn unanswered_round_blocks_aggregation() {
        let mut t = Transcript::new(params(), "test");
        let mut r = round(1, Seconds::ZERO);
        r.response = None;
        t.rounds.push(r);
        t.unveils.push(UnveilMessage {
            round: 1,
            site: Site::Two,
            completes_at: Seconds::ZERO,
            revealed: vec![],
        });
        assert_eq!(aggregate_event(&t), None);
    }

    #[test]
    fn rejects_unknown_version_and_truncation() {
        let mut t = Transcript::new(params(), "test");
        t.version = "rbc-transcript/0".into();
        let text = serde_json::to_string(&t).unwrap();
        assert!(matches!(
            Transcript::from_json(&text),
            Err(TranscriptError::Version(_))
        ));
        let good = Transcript::new(params(), "test").to_json();
        assert!(matches!(
            Transcript::from_json(&good[..good.len() / 2]),
            Err(TranscriptError::Json(_))
        ));
    }

    #[test]
    fn invalid_params_fail_to_parse() {
        let text = Transcript::new(params(), "test")
            .to_json()
            .replace("\"0.01\"", "\"0.5\"");
        assert!(Transcript::from_json(&text).is_err());
    }
}
