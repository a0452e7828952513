use sha2::{Digest, Sha256};

use super::{Bet, Bettor};
use crate::bits::BitString;
use crate::capital::Capital;

/// A fair strategy whose bets are a hash of `(seed, history)`. Stakes are
/// `k/2^precision` with `1 ≤ k < 2^precision`, so capital never reaches 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashBettor {
    pub seed: u64,
    pub precision: u32,
}

impl HashBettor {
    pub fn new(seed: u64) -> Self {
        Self { seed, precision: 3 }
    }
}

impl Bettor for HashBettor {
    fn bet(&self, history: &BitString) -> Option<Bet> {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update((history.len() as u64).to_le_bytes());
        h.update(history.to_string().as_bytes());
        let digest = h.finalize();
        let word = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let span = (1u64 << self.precision) - 1;
        let k = 1 + (word >> 1) % span;
        Some(Bet {
            on: word & 1 == 1,
            stake: Capital::dyadic(k, self.precision as u64),
        })
    }

    fn name(&self) -> String {
        format!("hash({})", self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{validate_fairness, Betting, BettingStrategy};

    #[test]
    fn fair_positive_and_seeded() {
        let d = Betting(HashBettor::new(7));
        assert!(validate_fairness(&d, 8).unwrap());
        assert!(BitString::all_of_len(8).all(|w| !d.capital(&w).is_zero()));
        let e = Betting(HashBettor::new(8));
        assert!(BitString::all_of_len(6).any(|w| d.capital(&w) != e.capital(&w)));
    }
}
