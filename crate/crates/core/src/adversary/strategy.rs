use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{alice_response, AliceState, HonestAlice};
use crate::codec::{binary_form, Bit, Modulus, Residue};
use crate::netsim::{AliceStrategy, CausalView};

/// Cheating Alice that commits honestly and then tries to unveil `target`.
///
/// Everything the unveiler can know is used: the rounds whose pairs have
/// reached her (through the partner laboratory's relay) let her compute the
/// unique forged chain of keys down to round R-1. Round R's pairs are still
/// outside her past, so every round-R position whose committed bit must
/// change is revealed as `true_key + d` with `d` a uniformly guessed nonzero
/// offset. Positions that need no change reveal the true key.
#[derive(Clone, Copy, Debug)]
pub struct OffsetGuess {
    pub target: Bit,
    /// Pre-agreed seed for the offset guesses.
    pub seed: u64,
}

impl OffsetGuess {
    pub fn new(target: Bit, seed: u64) -> Self {
        OffsetGuess { target, seed }
    }

    /// Forged keys for round `last - 1` that open `target` through the known
    /// rounds, or `None` if some needed challenge is not in view.
    fn forged_chain(
        &self,
        alice: &AliceState,
        view: &CausalView<'_>,
        last: u32,
    ) -> Option<Vec<Residue>> {
        let modulus = alice.params().modulus();
        let m = modulus.bits();
        let first = view.challenge(1)?;
        let response = alice_response(1, first, alice).ok()?.values;
        let mut forged = vec![modulus.sub(response[0], first.pairs[0].select(self.target))];
        for k in 2..last {
            let challenge = view.challenge(k)?;
            let response = alice_response(k, challenge, alice).ok()?.values;
            let bits = forged
                .iter()
                .map(|&key| binary_form(key, m))
                .collect::<Result<Vec<_>, _>>()
                .ok()?
                .concat();
            forged = bits
                .iter()
                .zip(&challenge.pairs)
                .zip(&response)
                .map(|((&bit, pair), &value)| modulus.sub(value, pair.select(bit)))
                .collect();
        }
        Some(forged)
    }
}

fn nonzero_offset(rng: &mut ChaCha8Rng, modulus: Modulus) -> Residue {
    1 + rng.random_range(0..modulus.value() - 1)
}

impl AliceStrategy for OffsetGuess {
    fn respond(&self, alice: &AliceState, view: &CausalView<'_>, round: u32) -> Vec<Residue> {
        HonestAlice.respond(alice, view, round)
    }

    fn unveil(&self, alice: &AliceState, view: &CausalView<'_>, round: u32) -> Vec<Residue> {
        let honest = HonestAlice.unveil(alice, view, round);
        if self.target == alice.committed_bit() {
            return honest;
        }
        let modulus = alice.params().modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::from(round));

        // bits the round-R keys must open to, versus the bits they do open to
        let (wanted, actual) = if round == 1 {
            (vec![self.target], vec![alice.committed_bit()])
        } else {
            let Some(forged) = self.forged_chain(alice, view, round) else {
                return honest;
            };
            let wanted = forged
                .iter()
                .flat_map(|&key| binary_form(key, modulus.bits()).unwrap_or_default())
                .collect::<Vec<_>>();
            let Ok(actual) = alice.payload(round) else {
                return honest;
            };
            (wanted, actual)
        };
        honest
            .iter()
            .zip(wanted.iter().zip(&actual))
            .map(|(&key, (w, a))| {
                if w == a {
                    key
                } else {
                    modulus.add(key, nonzero_offset(&mut rng, modulus))
                }
            })
            .collect()
    }

    fn relays(&self) -> bool {
        true
    }
}
