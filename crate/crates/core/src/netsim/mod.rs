//! Deterministic discrete-event simulation of the two-site protocol.
//!
//! A single-threaded event loop ordered by (time, site, sequence number)
//! drives Bob's challenges, message deliveries and the unveiling. Messages
//! between sites take exactly `dx - 2delta`, the earliest arrival physics
//! permits; same-site messages take a configurable delay in `[0, 2delta]`.
//! Alice strategies only ever see a [`CausalView`].

mod network;
mod sim;
mod transcript;

pub use network::{
    Agent, AliceStrategy, CausalView, Network, Party, Payload, TimedMessage, Transit,
};
pub use sim::{
    replay_decisions, run_honest, run_protocol, DecisionKind, DecisionRecord, ReplayMismatch,
    SimConfig, SimError, Simulation,
};
pub use transcript::{
    aggregate_event, aggregate_event_at, ChallengeRecord, HandshakeRecord, ResponseRecord,
    RoundRecord, Transcript, TranscriptError, TRANSCRIPT_VERSION,
};
