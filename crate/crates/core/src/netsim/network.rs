use serde::{Deserialize, Serialize};

use crate::agents::{AliceState, UnveilMessage};
use crate::codec::{CommitResponse, PairChallenge, Residue};
use crate::spacetime::{ProtocolParams, Site, SpacetimeEvent};
use crate::time::Seconds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

/// One laboratory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Agent {
    pub party: Party,
    pub site: Site,
}

impl Agent {
    pub fn alice(site: Site) -> Agent {
        Agent {
            party: Party::Alice,
            site,
        }
    }

    pub fn bob(site: Site) -> Agent {
        Agent {
            party: Party::Bob,
            site,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Challenge(PairChallenge),
    Response(CommitResponse),
    Unveil(UnveilMessage),
    /// Placement probe; `echo` marks the reply.
    TestSignal {
        echo: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transit {
    SameSite,
    CrossSite,
}

/// A message in flight or delivered. Only [`Network::send`] creates these.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedMessage {
    pub seq: u64,
    pub payload: Payload,
    pub from: Agent,
    pub to: Agent,
    /// Where and when the transmission completed.
    pub sent: SpacetimeEvent,
    pub earliest_arrival: Seconds,
    /// A copy forwarded between the two Alice laboratories.
    pub relayed: bool,
}

impl TimedMessage {
    pub fn transit(&self) -> Transit {
        if self.from.site == self.to.site {
            Transit::SameSite
        } else {
            Transit::CrossSite
        }
    }
}

/// The append-only message log of one run.
#[derive(Clone, Debug)]
pub struct Network {
    params: ProtocolParams,
    intra_delay: Seconds,
    messages: Vec<TimedMessage>,
}

impl Network {
    /// `intra_delay` must lie in `[0, 2delta]`, the range a test-signal echo
    /// allows.
    pub fn new(params: ProtocolParams, intra_delay: Seconds) -> Option<Self> {
        if intra_delay.is_negative() || intra_delay > params.delta().times(2) {
            return None;
        }
        Some(Network {
            params,
            intra_delay,
            messages: Vec::new(),
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn intra_delay(&self) -> Seconds {
        self.intra_delay
    }

    /// Logs a message whose transmission completes at `at` and returns its index.
    pub fn send(
        &mut self,
        from: Agent,
        to: Agent,
        at: Seconds,
        payload: Payload,
        relayed: bool,
    ) -> usize {
        let delay = if from.site == to.site {
            self.intra_delay
        } else {
            self.params.min_cross_delay()
        };
        let seq = self.messages.len() as u64;
        self.messages.push(TimedMessage {
            seq,
            payload,
            from,
            to,
            sent: SpacetimeEvent::new(at, from.site),
            earliest_arrival: at + delay,
            relayed,
        });
        self.messages.len() - 1
    }

    pub fn message(&self, index: usize) -> &TimedMessage {
        &self.messages[index]
    }

    pub fn messages(&self) -> &[TimedMessage] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Everything addressed to `agent` that has arrived by `now`.
    pub fn causal_view(&self, agent: Agent, now: Seconds) -> CausalView<'_> {
        self.causal_view_prefix(agent, now, self.messages.len())
    }

    /// As [`Network::causal_view`], restricted to the first `log_len` messages
    /// (the log as it stood at some earlier decision).
    pub fn causal_view_prefix(&self, agent: Agent, now: Seconds, log_len: usize) -> CausalView<'_> {
        let messages = self.messages[..log_len]
            .iter()
            .filter(|m| m.to == agent && m.earliest_arrival <= now)
            .collect();
        CausalView {
            agent,
            now,
            messages,
        }
    }
}

/// What one laboratory can know at one instant. Strategies see nothing else.
///
/// Only the network builds views, so a strategy cannot widen its own:
///
/// ```compile_fail,E0451
/// use rbc::netsim::{Agent, CausalView};
/// use rbc::{Seconds, Site};
/// let view = CausalView { agent: Agent::alice(Site::One), now: Seconds::ZERO, messages: Vec::new() };
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalView<'a> {
    agent: Agent,
    now: Seconds,
    messages: Vec<&'a TimedMessage>,
}

impl<'a> CausalView<'a> {
    pub fn agent(&self) -> Agent {
        self.agent
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    pub fn messages(&self) -> impl Iterator<Item = &'a TimedMessage> + '_ {
        self.messages.iter().copied()
    }

    /// A challenge for `round` delivered directly by the local Bob.
    pub fn own_challenge(&self, round: u32) -> Option<&'a PairChallenge> {
        self.messages().find_map(|m| match &m.payload {
            Payload::Challenge(c) if c.round == round && !m.relayed => Some(c),
            _ => None,
        })
    }

    /// A challenge for `round`, received directly or relayed from the partner.
    pub fn challenge(&self, round: u32) -> Option<&'a PairChallenge> {
        self.messages().find_map(|m| match &m.payload {
            Payload::Challenge(c) if c.round == round => Some(c),
            _ => None,
        })
    }
}

/// How an Alice laboratory behaves. Implementations receive only the causal
/// view of the laboratory making the decision, plus the state both Alices
/// agreed before the run.
///
/// Outputs must be a function of `(alice, view, round)` alone; the replay
/// check in [`super::replay_decisions`] holds every run to that.
pub trait AliceStrategy: Send + Sync {
    /// Residues answering round `round`'s challenge.
    fn respond(&self, alice: &AliceState, view: &CausalView<'_>, round: u32) -> Vec<Residue>;

    /// Residues revealed when unveiling round `round`.
    fn unveil(&self, alice: &AliceState, view: &CausalView<'_>, round: u32) -> Vec<Residue>;

    /// Whether the two Alice laboratories forward everything they receive to
    /// each other (at light speed). Colluding cheaters do.
    fn relays(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Pair;

    fn params() -> ProtocolParams {
        ProtocolParams::new(
            2,
            Seconds::from_secs(1),
            Seconds::from_decimal(5, 3),
            Seconds::from_decimal(1, 2),
        )
        .unwrap()
    }

    fn challenge() -> Payload {
        Payload::Challenge(PairChallenge {
            round: 1,
            pairs: vec![Pair::new(0, 1)],
        })
    }

    #[test]
    fn cross_site_visibility_boundary() {
        let p = params();
        let mut net = Network::new(p, p.delta()).unwrap();
        net.send(
            Agent::alice(Site::One),
            Agent::alice(Site::Two),
            Seconds::ZERO,
            challenge(),
            true,
        );
        let dest = Agent::alice(Site::Two);
        let arrival = p.min_cross_delay();
        assert_eq!(net.message(0).transit(), Transit::CrossSite);
        assert_eq!(
            net.causal_view(dest, arrival - Seconds::TICK)
                .messages()
                .count(),
            0
        );
        assert_eq!(net.causal_view(dest, arrival).messages().count(), 1);
        // never visible to anyone else
        assert_eq!(
            net.causal_view(Agent::bob(Site::Two), arrival)
                .messages()
                .count(),
            0
        );
    }

    #[test]
    fn same_site_delivery_after_intra_delay() {
        let p = params();
        let mut net = Network::new(p, p.delta()).unwrap();
        let sent = Seconds::from_decimal(1, 2);
        net.send(
            Agent::bob(Site::One),
            Agent::alice(Site::One),
            sent,
            challenge(),
            false,
        );
        let view = net.causal_view(Agent::alice(Site::One), sent + p.delta());
        assert!(view.own_challenge(1).is_some());
        assert!(net
            .causal_view(Agent::alice(Site::One), sent)
            .own_challenge(1)
            .is_none());
    }

    #[test]
    fn relayed_copies_are_not_own_challenges() {
        let p = params();
        let mut net = Network::new(p, Seconds::ZERO).unwrap();
        net.send(
            Agent::alice(Site::One),
            Agent::alice(Site::Two),
            Seconds::ZERO,
            challenge(),
            true,
        );
        let view = net.causal_view(Agent::alice(Site::Two), Seconds::from_secs(5));
        assert!(view.own_challenge(1).is_none());
        assert!(view.challenge(1).is_some());
    }

    #[test]
    fn intra_delay_is_bounded_by_echo_time() {
        let p = params();
        assert!(Network::new(p, p.delta().times(2)).is_some());
        assert!(Network::new(p, p.delta().times(2) + Seconds::TICK).is_none());
        assert!(Network::new(p, -Seconds::TICK).is_none());
    }

    #[test]
    fn prefix_views_ignore_later_log_entries() {
        let p = params();
        let mut net = Network::new(p, Seconds::ZERO).unwrap();
        net.send(
            Agent::bob(Site::One),
            Agent::alice(Site::One),
            Seconds::ZERO,
            challenge(),
            false,
        );
        let dest = Agent::alice(Site::One);
        assert_eq!(
            net.causal_view_prefix(dest, Seconds::ZERO, 0)
                .messages()
                .count(),
            0
        );
        assert_eq!(
            net.causal_view_prefix(dest, Seconds::ZERO, 1)
                .messages()
                .count(),
            1
        );
    }
}
