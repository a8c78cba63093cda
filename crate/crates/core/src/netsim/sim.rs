use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::network::{Agent, AliceStrategy, Network, Party, Payload};
use super::transcript::{
    aggregate_event_at, ChallengeRecord, HandshakeRecord, ResponseRecord, RoundRecord, Transcript,
};
use crate::agents::{AgentError, AliceState, BobAgent, UnveilMessage, GENERATOR_ID};
use crate::codec::{Bit, CommitResponse, Residue};
use crate::spacetime::{round_site, ProtocolParams, Site};
use crate::time::Seconds;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("at least one round is required")]
    NoRounds,
    #[error("dual unveiling needs at least two rounds")]
    DualNeedsTwoRounds,
    #[error("intra-site delay {delay} is outside [0, 2delta = {max}]")]
    IntraDelay { delay: Seconds, max: Seconds },
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Clone, Debug, Default)]
pub struct SimConfig {
    /// Same-site delivery delay; defaults to `delta`.
    pub intra_delay: Option<Seconds>,
    /// Both Alice laboratories unveil: the site opposite round R unveils
    /// round R, and round R's own site unveils round R-1.
    pub dual_unveil: bool,
    /// Where Bob aggregates; defaults to the (first) unveilee's site.
    pub hq_site: Option<Site>,
    /// Record a test-signal echo at each site at t = 0.
    pub handshake: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecisionKind {
    Respond(u32),
    Unveil(u32),
}

/// One strategy output together with the log position it was made at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionRecord {
    pub agent: Agent,
    pub at: Seconds,
    pub log_len: usize,
    pub kind: DecisionKind,
    pub output: Vec<Residue>,
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub transcript: Transcript,
    pub network: Network,
    pub decisions: Vec<DecisionRecord>,
    pub alice: AliceState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    BobChallenge(u32),
    BobProbe,
    Deliver(usize),
    Unveil(u32),
}

/// Queue entries order by (time, site, sequence number).
type Scheduled = Reverse<(Seconds, Site, u64, Action)>;

struct Engine<'s> {
    params: ProtocolParams,
    strategy: &'s dyn AliceStrategy,
    alice: AliceState,
    bobs: [BobAgent; 2],
    network: Network,
    queue: BinaryHeap<Scheduled>,
    next_seq: u64,
    transcript: Transcript,
    decisions: Vec<DecisionRecord>,
}

impl Engine<'_> {
    fn schedule(&mut self, at: Seconds, site: Site, action: Action) {
        self.queue.push(Reverse((at, site, self.next_seq, action)));
        self.next_seq += 1;
    }

    fn abort(&mut self, reason: String) {
        self.transcript.abort = Some(reason);
        self.queue.clear();
    }

    fn run(&mut self) {
        while let Some(Reverse((now, site, _, action))) = self.queue.pop() {
            match action {
                Action::BobChallenge(k) => self.bob_challenge(k, now),
                Action::BobProbe => {
                    let idx = self.network.send(
                        Agent::bob(site),
                        Agent::alice(site),
                        now,
                        Payload::TestSignal { echo: false },
                        false,
                    );
                    self.deliver_later(idx);
                }
                Action::Deliver(idx) => self.deliver(idx, now),
                Action::Unveil(round) => self.unveil(round, site, now),
            }
        }
    }

    fn deliver_later(&mut self, idx: usize) {
        let msg = self.network.message(idx);
        let (at, site) = (msg.earliest_arrival, msg.to.site);
        self.schedule(at, site, Action::Deliver(idx));
    }

    fn bob_challenge(&mut self, k: u32, now: Seconds) {
        let site = round_site(k);
        let challenge = self.bobs[usize::from(site.id() - 1)]
            .challenge(k, self.params.modulus())
            .expect("each round is challenged once, at its own site");
        let end = now + self.params.delta_t();
        self.transcript.rounds.push(RoundRecord {
            k,
            site,
            challenge: ChallengeRecord {
                start: now,
                end,
                pairs: challenge.pairs.clone(),
            },
            response: None,
        });
        let idx = self.network.send(
            Agent::bob(site),
            Agent::alice(site),
            end,
            Payload::Challenge(challenge),
            false,
        );
        self.deliver_later(idx);
    }

    fn deliver(&mut self, idx: usize, now: Seconds) {
        let msg = self.network.message(idx).clone();
        match msg.to.party {
            Party::Bob => {
                if let Payload::TestSignal { echo: true } = msg.payload {
                    self.transcript.handshake.push(HandshakeRecord {
                        site: msg.to.site,
                        sent: Seconds::ZERO,
                        returned: now,
                    });
                }
            }
            Party::Alice => {
                let site = msg.to.site;
                if self.strategy.relays() && !msg.relayed {
                    let copy = self.network.send(
                        Agent::alice(site),
                        Agent::alice(site.other()),
                        now,
                        msg.payload.clone(),
                        true,
                    );
                    self.deliver_later(copy);
                }
                if msg.relayed {
                    return;
                }
                match &msg.payload {
                    Payload::Challenge(c) => self.respond(c.round, site, now),
                    Payload::TestSignal { echo: false } => {
                        let idx = self.network.send(
                            Agent::alice(site),
                            Agent::bob(site),
                            now,
                            Payload::TestSignal { echo: true },
                            false,
                        );
                        self.deliver_later(idx);
                    }
                    _ => {}
                }
            }
        }
    }

    fn decide(&mut self, agent: Agent, now: Seconds, kind: DecisionKind) -> Vec<Residue> {
        let log_len = self.network.len();
        let view = self.network.causal_view_prefix(agent, now, log_len);
        let output = match kind {
            DecisionKind::Respond(k) => self.strategy.respond(&self.alice, &view, k),
            DecisionKind::Unveil(k) => self.strategy.unveil(&self.alice, &view, k),
        };
        self.decisions.push(DecisionRecord {
            agent,
            at: now,
            log_len,
            kind,
            output: output.clone(),
        });
        output
    }

    fn well_formed(&self, values: &[Residue], round: u32) -> Result<(), String> {
        let expected = self
            .alice
            .tape()
            .segment(round)
            .map(<[_]>::len)
            .unwrap_or(0);
        if values.len() != expected {
            return Err(format!(
                "{} values where {expected} were expected",
                values.len()
            ));
        }
        let modulus = self.params.modulus();
        if let Some(v) = values.iter().find(|&&v| !modulus.contains(v)) {
            return Err(format!("value {v} is outside [0, {})", modulus.value()));
        }
        Ok(())
    }

    fn respond(&mut self, k: u32, site: Site, now: Seconds) {
        let values = self.decide(Agent::alice(site), now, DecisionKind::Respond(k));
        if let Err(why) = self.well_formed(&values, k) {
            self.abort(format!("malformed round {k} response: {why}"));
            return;
        }
        let end = now + self.params.delta_t();
        let window_end = self.params.round_window(k).response_end;
        if end > window_end {
            self.abort(format!(
                "round {k} response would complete at {end}, after its window closes at {window_end}"
            ));
            return;
        }
        let record = self
            .transcript
            .rounds
            .iter_mut()
            .find(|r| r.k == k)
            .expect("challenge recorded before the response");
        record.response = Some(ResponseRecord {
            end,
            values: values.clone(),
        });
        let idx = self.network.send(
            Agent::alice(site),
            Agent::bob(site),
            end,
            Payload::Response(CommitResponse { round: k, values }),
            false,
        );
        self.deliver_later(idx);
    }

    fn unveil(&mut self, round: u32, site: Site, now: Seconds) {
        let values = self.decide(Agent::alice(site), now, DecisionKind::Unveil(round));
        if let Err(why) = self.well_formed(&values, round) {
            self.abort(format!("malformed unveiling of round {round}: {why}"));
            return;
        }
        let completes_at = now + self.params.delta_t();
        let deadline = self.params.unveil_deadline(round);
        if completes_at >= deadline {
            self.abort(format!(
                "unveiling of round {round} would complete at {completes_at}, not before the deadline {deadline}"
            ));
            return;
        }
        let message = UnveilMessage {
            round,
            site,
            completes_at,
            revealed: values,
        };
        self.transcript.unveils.push(message.clone());
        let idx = self.network.send(
            Agent::alice(site),
            Agent::bob(site),
            completes_at,
            Payload::Unveil(message),
            false,
        );
        self.deliver_later(idx);
    }
}

/// Runs `rounds` commitment rounds followed by the unveiling.
///
/// Honest Bob challenges at the start of each round window; Alice answers as
/// soon as a challenge arrives, taking `dt` to transmit. The unveiler at the
/// site opposite round R starts transmitting at `response_end(R) - dt`. A
/// missed deadline or malformed strategy output ends the run with an abort
/// reason in the transcript rather than an error.
pub fn run_protocol(
    params: ProtocolParams,
    rounds: u32,
    bit: Bit,
    alice_seed: u64,
    bob_seed: u64,
    strategy: &dyn AliceStrategy,
    config: &SimConfig,
) -> Result<Simulation, SimError> {
    if rounds == 0 {
        return Err(SimError::NoRounds);
    }
    if config.dual_unveil && rounds < 2 {
        return Err(SimError::DualNeedsTwoRounds);
    }
    let intra_delay = config.intra_delay.unwrap_or(params.delta());
    let network = Network::new(params, intra_delay).ok_or(SimError::IntraDelay {
        delay: intra_delay,
        max: params.delta().times(2),
    })?;
    let alice = AliceState::from_seed(params, bit, rounds, alice_seed)?;

    let mut engine = Engine {
        params,
        strategy,
        alice,
        bobs: [
            BobAgent::new(bob_seed, Site::One),
            BobAgent::new(bob_seed, Site::Two),
        ],
        network,
        queue: BinaryHeap::new(),
        next_seq: 0,
        transcript: Transcript::new(params, GENERATOR_ID),
        decisions: Vec::new(),
    };

    if config.handshake {
        for site in Site::BOTH {
            engine.schedule(Seconds::ZERO, site, Action::BobProbe);
        }
    }
    for k in 1..=rounds {
        engine.schedule(
            params.round_window(k).challenge_start,
            round_site(k),
            Action::BobChallenge(k),
        );
    }
    let last = params.round_window(rounds);
    engine.schedule(
        last.response_end - params.delta_t(),
        round_site(rounds).other(),
        Action::Unveil(rounds),
    );
    if config.dual_unveil {
        engine.schedule(
            last.challenge_start,
            round_site(rounds),
            Action::Unveil(rounds - 1),
        );
    }

    engine.run();

    if engine.transcript.abort.is_none() {
        let hq = config
            .hq_site
            .or_else(|| engine.transcript.default_hq())
            .expect("a completed run has an unveiling");
        engine.transcript.aggregation = aggregate_event_at(&engine.transcript, hq);
    }
    // keep the primary unveiling first regardless of emission order
    engine
        .transcript
        .unveils
        .sort_by_key(|u| std::cmp::Reverse(u.round));

    Ok(Simulation {
        transcript: engine.transcript,
        network: engine.network,
        decisions: engine.decisions,
        alice: engine.alice,
    })
}

/// [`run_protocol`] with the honest strategy and default configuration.
pub fn run_honest(
    params: ProtocolParams,
    rounds: u32,
    bit: Bit,
    alice_seed: u64,
    bob_seed: u64,
) -> Result<Simulation, SimError> {
    run_protocol(
        params,
        rounds,
        bit,
        alice_seed,
        bob_seed,
        &crate::agents::HonestAlice,
        &SimConfig::default(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("decision {index} ({kind:?} at {at}) replayed to a different output")]
pub struct ReplayMismatch {
    pub index: usize,
    pub kind: DecisionKind,
    pub at: Seconds,
}

/// Re-runs every recorded decision against the causal view rebuilt from the
/// final message log and checks the output is unchanged. Since the view is
/// rebuilt from the whole log, this also shows nothing logged after a
/// decision had reached the deciding laboratory in time to matter. Returns
/// the number of decisions replayed.
pub fn replay_decisions(
    sim: &Simulation,
    strategy: &dyn AliceStrategy,
) -> Result<usize, ReplayMismatch> {
    for (index, d) in sim.decisions.iter().enumerate() {
        let view = sim.network.causal_view(d.agent, d.at);
        let output = match d.kind {
            DecisionKind::Respond(k) => strategy.respond(&sim.alice, &view, k),
            DecisionKind::Unveil(k) => strategy.unveil(&sim.alice, &view, k),
        };
        if output != d.output {
            return Err(ReplayMismatch {
                index,
                kind: d.kind,
                at: d.at,
            });
        }
    }
    Ok(sim.decisions.len())
}
