use std::collections::BTreeMap;

use super::{Bet, Bettor, MartingaleError};
use crate::bits::BitString;
use crate::machine::ExecBudget;

/// Longest window on which [`is_strongly_influenced`] checks every input.
const INFLUENCE_CHECK_LEN: usize = 10;

/// Maps a window of `B` to a guess for one bit of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predictor {
    /// The window's last bit.
    LastBit,
    /// XOR of the window.
    Parity,
}

impl Predictor {
    pub fn predict(self, window: &BitString) -> bool {
        match self {
            Predictor::LastBit => window.get(window.len().wrapping_sub(1)).unwrap_or(false),
            Predictor::Parity => window.count_ones() % 2 == 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Predictor::LastBit => "last-bit",
            Predictor::Parity => "parity",
        }
    }

    /// The bit `x` with `predict(window ++ x) = target`, if exactly one exists.
    pub fn solve(self, window: &BitString, target: bool) -> Option<bool> {
        let mut hits = [false, true].into_iter().filter(|&x| {
            let mut w = window.clone();
            w.push(x);
            self.predict(&w) == target
        });
        let x = hits.next()?;
        hits.next().is_none().then_some(x)
    }
}

/// Flipping the last bit of any nonempty window flips the prediction.
/// Checked on every window up to a fixed length.
pub fn is_strongly_influenced(f: Predictor) -> bool {
    (1..=INFLUENCE_CHECK_LEN)
        .flat_map(BitString::all_of_len)
        .all(|mut w| {
            let before = f.predict(&w);
            let last = w.len() - 1;
            w.set(last, !w.bit(last));
            f.predict(&w) != before
        })
}

/// `A[source]` is predicted from `B[window_start ..= target]`; the bet is on
/// `B[target]`, at position `2·target + 1` of `A⊎B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub source: usize,
    pub target: usize,
    pub window_start: usize,
}

/// Plays on `A⊎B`. Flat everywhere except at the B-positions named by an
/// anchor, where it stakes everything on the bit that makes the predictor
/// agree with the already-seen `A[source]`.
#[derive(Debug, Clone)]
pub struct LastIndexBettor {
    predictor: Predictor,
    by_target: BTreeMap<usize, Anchor>,
}

impl LastIndexBettor {
    pub fn new(
        predictor: Predictor,
        anchors: impl IntoIterator<Item = Anchor>,
    ) -> Result<Self, MartingaleError> {
        if !is_strongly_influenced(predictor) {
            return Err(MartingaleError::NotStronglyInfluenced);
        }
        let mut by_target = BTreeMap::new();
        for a in anchors {
            if a.target < a.source || a.window_start > a.target || by_target.contains_key(&a.target)
            {
                return Err(MartingaleError::BadAnchor {
                    source_pos: a.source,
                    target: a.target,
                });
            }
            by_target.insert(a.target, a);
        }
        Ok(Self {
            predictor,
            by_target,
        })
    }

    /// Anchors `i ↦ i + c·t(i)` for every `i` in `sources`, each with window
    /// `B[i − c·t(i) ..= i + c·t(i)]` clamped at 0.
    pub fn time_bound(
        predictor: Predictor,
        bound: &ExecBudget,
        sources: impl IntoIterator<Item = usize>,
    ) -> Result<Self, MartingaleError> {
        let anchors = sources.into_iter().map(|i| {
            let reach = bound.factor.saturating_mul(bound.bound.eval(i as u64)) as usize;
            Anchor {
                source: i,
                target: i + reach,
                window_start: i.saturating_sub(reach),
            }
        });
        Self::new(predictor, anchors)
    }

    pub fn anchors(&self) -> impl Iterator<Item = &Anchor> {
        self.by_target.values()
    }

    /// Positions of `A⊎B` where a bet is placed.
    pub fn bet_positions(&self) -> Vec<usize> {
        self.by_target.keys().map(|&e| 2 * e + 1).collect()
    }
}

impl Bettor for LastIndexBettor {
    fn bet(&self, history: &BitString) -> Option<Bet> {
        let m = history.len();
        if m.is_multiple_of(2) {
            return None;
        }
        let anchor = self.by_target.get(&(m / 2))?;
        let a_i = history.bit(2 * anchor.source);
        let window: BitString = (anchor.window_start..anchor.target)
            .map(|j| history.bit(2 * j + 1))
            .collect();
        self.predictor.solve(&window, a_i).map(Bet::all_in)
    }

    fn name(&self) -> String {
        format!(
            "last-index({}, {} anchors)",
            self.predictor.name(),
            self.by_target.len()
        )
    }
}

/// Stakes everything on `x[target] = x[source]` for each listed pair; flat
/// elsewhere.
#[derive(Debug, Clone, Default)]
pub struct CopyBettor {
    by_target: BTreeMap<usize, usize>,
}

impl CopyBettor {
    /// `(source, target)` pairs with `source < target`.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, MartingaleError> {
        let mut by_target = BTreeMap::new();
        for (source, target) in pairs {
            if source >= target || by_target.insert(target, source).is_some() {
                return Err(MartingaleError::BadAnchor {
                    source_pos: source,
                    target,
                });
            }
        }
        Ok(Self { by_target })
    }
}

impl Bettor for CopyBettor {
    fn bet(&self, history: &BitString) -> Option<Bet> {
        let source = *self.by_target.get(&history.len())?;
        Some(Bet::all_in(history.bit(source)))
    }

    fn name(&self) -> String {
        format!("copy({} pairs)", self.by_target.len())
    }
}
