//! Betting strategies with exact dyadic capital, and the combinators that move
//! capital between a pair of sequences and their interleaving.

mod combinators;
mod last_index;
mod oracle;
mod pool;
mod random;

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bits::BitString;
use crate::capital::{Capital, CapitalError};

pub use combinators::{
    lift_interleave, project_average, savings_transform, split_h_g, LiftInterleave, Projected,
    Savings, SplitG, SplitH, PROJECTION_CAP,
};
pub use last_index::{is_strongly_influenced, Anchor, CopyBettor, LastIndexBettor, Predictor};
pub use oracle::{
    resilience_check, validate_oracle_fairness, ConstantOracle, CopyOracle, OracleBetting,
    OracleBettor, OracleStrategy, OracleTape, OracleTranscript, Probe, ResilienceEntry,
    ResilienceReport,
};
pub use pool::{
    honesty_horizon, machine_pool, Extension, MachineBettor, MachineOracleBettor, Mixture,
    OracleMixture, Pool,
};
pub use random::HashBettor;

/// Longest domain `validate_fairness` will sweep.
pub const FAIRNESS_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MartingaleError {
    #[error("capital vanished before position {at}; the ratio is undefined")]
    DivisionByZero { at: usize },
    #[error("ratio at position {at} is not dyadic")]
    NonDyadic { at: usize },
    #[error("depth {requested} exceeds the cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("oracle holds {have} bits but {need} are required")]
    OracleTooShort { need: usize, have: usize },
    #[error("lengths differ: {a} and {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("predictor is not strongly influenced by its last index")]
    NotStronglyInfluenced,
    #[error("anchor targets position {target} before its source {source_pos}")]
    BadAnchor { source_pos: usize, target: usize },
}

impl MartingaleError {
    pub(crate) fn from_ratio(e: CapitalError, at: usize) -> Self {
        match e {
            CapitalError::DivisionByZero => MartingaleError::DivisionByZero { at },
            _ => MartingaleError::NonDyadic { at },
        }
    }
}

/// A deterministic capital function on histories.
pub trait BettingStrategy: Send + Sync {
    fn capital(&self, w: &BitString) -> Capital;

    /// Capital after each prefix `w↾0 … w↾|w|`.
    fn trajectory(&self, w: &BitString) -> Vec<Capital> {
        w.prefixes().map(|p| self.capital(&p)).collect()
    }

    fn name(&self) -> String;
}

/// A stake on the next bit: capital is multiplied by `1 + stake` if the bit is
/// `on`, by `1 − stake` otherwise. `stake` lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bet {
    pub on: bool,
    pub stake: Capital,
}

impl Bet {
    pub fn all_in(on: bool) -> Self {
        Bet {
            on,
            stake: Capital::one(),
        }
    }

    pub fn apply(&self, capital: &Capital, bit: bool) -> Capital {
        let factor = if bit == self.on {
            Capital::one() + self.stake.clone()
        } else {
            Capital::one()
                .checked_sub(&self.stake)
                .expect("stake is at most 1")
        };
        capital * &factor
    }
}

/// Strategies given as one bet per history; capital is the running product.
pub trait Bettor: Send + Sync {
    fn bet(&self, history: &BitString) -> Option<Bet>;
    fn name(&self) -> String;
}

/// Adapts a [`Bettor`] to a capital function.
#[derive(Debug, Clone)]
pub struct Betting<B>(pub B);

impl<B: Bettor> BettingStrategy for Betting<B> {
    fn capital(&self, w: &BitString) -> Capital {
        self.trajectory(w).pop().expect("trajectory is nonempty")
    }

    fn trajectory(&self, w: &BitString) -> Vec<Capital> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut cap = Capital::one();
        out.push(cap.clone());
        for n in 0..w.len() {
            if let Some(bet) = self.0.bet(&w.slice(0, n)) {
                cap = bet.apply(&cap, w.bit(n));
            }
            out.push(cap.clone());
        }
        out
    }

    fn name(&self) -> String {
        self.0.name()
    }
}

impl<T: BettingStrategy + ?Sized> BettingStrategy for std::sync::Arc<T> {
    fn capital(&self, w: &BitString) -> Capital {
        (**self).capital(w)
    }

    fn trajectory(&self, w: &BitString) -> Vec<Capital> {
        (**self).trajectory(w)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Constant;

impl BettingStrategy for Constant {
    fn capital(&self, _: &BitString) -> Capital {
        Capital::one()
    }

    fn name(&self) -> String {
        "constant".into()
    }
}

/// Explicit values on finitely many histories; every other history takes the
/// value of its longest listed prefix.
#[derive(Debug, Clone, Default)]
pub struct TableStrategy {
    values: HashMap<BitString, Capital>,
}

impl TableStrategy {
    pub fn new(entries: impl IntoIterator<Item = (BitString, Capital)>) -> Self {
        let mut values: HashMap<_, _> = entries.into_iter().collect();
        values.entry(BitString::new()).or_insert_with(Capital::one);
        Self { values }
    }
}

impl BettingStrategy for TableStrategy {
    fn capital(&self, w: &BitString) -> Capital {
        (0..=w.len())
            .rev()
            .find_map(|n| self.values.get(&w.slice(0, n)))
            .cloned()
            .expect("λ is always listed")
    }

    fn name(&self) -> String {
        "table".into()
    }
}

/// `d(w0) + d(w1) = 2·d(w)` for every `w` shorter than `depth`.
pub fn validate_fairness(d: &dyn BettingStrategy, depth: usize) -> Result<bool, MartingaleError> {
    if depth > FAIRNESS_CAP {
        return Err(MartingaleError::CapExceeded {
            requested: depth,
            cap: FAIRNESS_CAP,
        });
    }
    Ok((0..depth).flat_map(BitString::all_of_len).all(|w| {
        let mut w0 = w.clone();
        w0.push(false);
        let mut w1 = w.clone();
        w1.push(true);
        d.capital(&w0) + d.capital(&w1) == d.capital(&w).double()
    }))
}

/// First position at which capital exceeds a level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdHit {
    pub level: Capital,
    pub position: Option<usize>,
}

/// Levels `2, 4, …, 2^k`.
pub fn doubling_levels(k: u32) -> Vec<Capital> {
    (1..=k).map(|i| Capital::pow2(i as i64)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartingaleTranscript {
    /// `prefix_values[n]` is the capital after `n` bits.
    pub prefix_values: Vec<Capital>,
    /// Oracle positions read while computing each value.
    pub oracle_reads: Vec<Vec<usize>>,
    pub threshold_hits: Vec<ThresholdHit>,
}

impl MartingaleTranscript {
    pub fn new(
        prefix_values: Vec<Capital>,
        oracle_reads: Vec<Vec<usize>>,
        levels: &[Capital],
    ) -> Self {
        let threshold_hits = levels
            .iter()
            .map(|level| ThresholdHit {
                level: level.clone(),
                position: prefix_values.iter().position(|v| v > level),
            })
            .collect();
        Self {
            prefix_values,
            oracle_reads,
            threshold_hits,
        }
    }

    /// `0 <= value(n) <= 2·value(n−1)` at every step.
    pub fn step_bound_holds(&self) -> bool {
        self.prefix_values.windows(2).all(|w| w[1] <= w[0].double())
    }

    pub fn final_value(&self) -> &Capital {
        self.prefix_values.last().expect("transcripts start at λ")
    }

    pub fn first_crossing(&self, level: &Capital) -> Option<usize> {
        self.prefix_values.iter().position(|v| v > level)
    }

    /// `prefix_len,numerator,exponent,oracle_reads`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prefix_len,numerator,exponent,oracle_reads\n");
        for (n, v) in self.prefix_values.iter().enumerate() {
            let reads = self.oracle_reads.get(n).map_or(String::new(), |r| {
                r.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
            });
            writeln!(out, "{n},{},{},{reads}", v.numerator(), v.exponent())
                .expect("write to string");
        }
        out
    }
}

/// Replays a plain strategy along `x`.
pub fn play(d: &dyn BettingStrategy, x: &BitString, levels: &[Capital]) -> MartingaleTranscript {
    let values = d.trajectory(x);
    let reads = vec![Vec::new(); values.len()];
    MartingaleTranscript::new(values, reads, levels)
}
