use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::oracle::{optimal_flip_success, to_f64, OracleBudget};
use super::strategy::OffsetGuess;
use crate::agents::HonestAlice;
use crate::codec::Bit;
use crate::netsim::{run_protocol, AliceStrategy, SimConfig, SimError};
use crate::spacetime::ProtocolParams;
use crate::verifier::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// Flip the committed bit by guessing the unseen offsets.
    OffsetGuess,
    /// Honest play scored against the committed bit.
    HonestRelabel,
}

impl AttackStrategy {
    pub const ALL: [AttackStrategy; 2] =
        [AttackStrategy::OffsetGuess, AttackStrategy::HonestRelabel];

    pub fn name(self) -> &'static str {
        match self {
            AttackStrategy::OffsetGuess => "offset-guess",
            AttackStrategy::HonestRelabel => "honest-relabel",
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?} (expected offset-guess or honest-relabel)")]
pub struct UnknownStrategy(pub String);

impl FromStr for AttackStrategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackStrategy::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub strategy: AttackStrategy,
    pub m: u32,
    pub rounds: u32,
    pub trials: u64,
    /// Trials in which the verifier accepted the target bit.
    pub successes: u64,
    pub success_rate: f64,
    /// Binomial standard error of `success_rate`.
    pub std_error: f64,
    /// Exact target probability, when the instance is small enough to compute.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_exact: Option<String>,
}

impl AttackOutcome {
    /// Whether the observed rate lies within `sigmas` binomial standard
    /// deviations of `p`.
    pub fn within(&self, p: f64, sigmas: f64) -> bool {
        let sd = (p * (1.0 - p) / self.trials as f64).sqrt();
        (self.success_rate - p).abs() <= sigmas * sd
    }
}

/// Seeds and bit for trial `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSeeds {
    pub alice_seed: u64,
    pub bob_seed: u64,
    pub cheat_seed: u64,
    pub bit: Bit,
}

pub fn trial_seeds(seed: u64, index: u64) -> TrialSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    TrialSeeds {
        alice_seed: rng.random(),
        bob_seed: rng.random(),
        cheat_seed: rng.random(),
        bit: Bit::from_bool(rng.random()),
    }
}

/// Runs one trial; returns whether the verifier accepted the strategy's target.
pub fn run_trial(
    params: ProtocolParams,
    rounds: u32,
    strategy: AttackStrategy,
    seeds: TrialSeeds,
) -> Result<bool, SimError> {
    let (target, sim) = match strategy {
        AttackStrategy::HonestRelabel => {
            let cfg = SimConfig::default();
            let sim = run_protocol(
                params,
                rounds,
                seeds.bit,
                seeds.alice_seed,
                seeds.bob_seed,
                &HonestAlice,
                &cfg,
            )?;
            (seeds.bit, sim)
        }
        AttackStrategy::OffsetGuess => {
            let target = seeds.bit.flipped();
            let cheat: &dyn AliceStrategy = &OffsetGuess::new(target, seeds.cheat_seed);
            let cfg = SimConfig::default();
            let sim = run_protocol(
                params,
                rounds,
                seeds.bit,
                seeds.alice_seed,
                seeds.bob_seed,
                cheat,
                &cfg,
            )?;
            (target, sim)
        }
    };
    Ok(verify(&sim.transcript).accepted_bit() == Some(target))
}

/// Exact success probability of `strategy`'s target, if computable within the budget.
pub fn exact_rate(m: u32, rounds: u32, strategy: AttackStrategy) -> Option<BigRational> {
    match strategy {
        AttackStrategy::HonestRelabel => Some(BigRational::from_integer(1.into())),
        AttackStrategy::OffsetGuess => {
            optimal_flip_success(m, rounds, OracleBudget::default()).ok()
        }
    }
}

/// Runs `trials` independent attack simulations in parallel. Trial `i`
/// derives its seeds from `seed` on stream `i`, so the result does not
/// depend on scheduling.
pub fn run_attack(
    params: ProtocolParams,
    rounds: u32,
    strategy: AttackStrategy,
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome, AttackError> {
    if trials == 0 {
        return Err(AttackError::NoTrials);
    }
    let successes = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(params, rounds, strategy, trial_seeds(seed, i)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let rate = successes as f64 / trials as f64;
    let exact = exact_rate(params.m(), rounds, strategy);
    Ok(AttackOutcome {
        strategy,
        m: params.m(),
        rounds,
        trials,
        successes,
        success_rate: rate,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        oracle_rate: exact.as_ref().map(to_f64),
        oracle_exact: exact.map(|p| p.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::Seconds;

    fn params(m: u32) -> ProtocolParams {
        ProtocolParams::new(
            m,
            Seconds::from_secs(1),
            Seconds::from_decimal(1, 4),
            Seconds::from_decimal(1, 3),
        )
        .unwrap()
    }

    #[test]
    fn names_round_trip() {
        for s in AttackStrategy::ALL {
            assert_eq!(s.name().parse::<AttackStrategy>().unwrap(), s);
            assert_eq!(
                serde_json::to_string(&s).unwrap(),
                format!("\"{}\"", s.name())
            );
        }
        assert!("unknown".parse::<AttackStrategy>().is_err());
    }

    #[test]
    fn honest_relabel_always_succeeds() {
        let out = run_attack(params(2), 3, AttackStrategy::HonestRelabel, 50, 9).unwrap();
        assert_eq!(out.successes, 50);
        assert_eq!(out.success_rate, 1.0);
        assert_eq!(out.oracle_exact.as_deref(), Some("1"));
    }

    #[test]
    fn attack_is_reproducible() {
        let a = run_attack(params(2), 2, AttackStrategy::OffsetGuess, 200, 4).unwrap();
        let b = run_attack(params(2), 2, AttackStrategy::OffsetGuess, 200, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.successes <= a.trials);
    }

    #[test]
    fn zero_trials_refused() {
        assert_eq!(
            run_attack(params(2), 1, AttackStrategy::OffsetGuess, 0, 0),
            Err(AttackError::NoTrials)
        );
    }
}
