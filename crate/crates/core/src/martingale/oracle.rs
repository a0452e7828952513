use std::collections::BTreeMap;
use std::sync::Arc;

use super::honesty_horizon;
use super::{Bet, MartingaleError, MartingaleTranscript, FAIRNESS_CAP};
use crate::bits::BitString;
use crate::capital::Capital;
use crate::machine::ExecBudget;

/// Read access to an oracle prefix, logging every position touched together
/// with the step that touched it.
#[derive(Debug, Clone)]
pub struct OracleTape<'a> {
    tape: &'a BitString,
    step: usize,
    reads: Vec<(usize, usize)>,
}

impl<'a> OracleTape<'a> {
    pub fn new(tape: &'a BitString) -> Self {
        Self {
            tape,
            step: 0,
            reads: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tape.is_empty()
    }

    /// Tags subsequent reads with `step`.
    pub fn set_step(&mut self, step: usize) {
        self.step = step;
    }

    pub fn read(&mut self, pos: usize) -> Option<bool> {
        let bit = self.tape.get(pos)?;
        self.reads.push((self.step, pos));
        Some(bit)
    }

    /// `tape[start, end)` clamped to the tape, logged position by position.
    pub fn read_range(&mut self, start: usize, end: usize) -> BitString {
        (start..end.min(self.tape.len()))
            .map(|i| self.read(i).expect("clamped"))
            .collect()
    }

    /// `tape[start, end)` clamped, without logging. Callers that hand the
    /// window to an interpreter log its actual reads with [`Self::record`].
    pub(crate) fn unlogged(&self, start: usize, end: usize) -> BitString {
        let end = end.min(self.tape.len());
        self.tape.slice(start.min(end), end)
    }

    pub(crate) fn record(&mut self, pos: usize) {
        self.reads.push((self.step, pos));
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Same tape and step, empty log.
    pub(crate) fn clone_empty(&self) -> OracleTape<'a> {
        OracleTape {
            tape: self.tape,
            step: self.step,
            reads: Vec::new(),
        }
    }

    pub(crate) fn take_reads(self) -> Vec<(usize, usize)> {
        self.reads
    }

    /// Distinct positions read at each step `0..steps`.
    pub fn reads_by_step(&self, steps: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); steps];
        for &(s, p) in &self.reads {
            if let Some(slot) = out.get_mut(s) {
                slot.push(p);
            }
        }
        for slot in &mut out {
            slot.sort_unstable();
            slot.dedup();
        }
        out
    }

    pub fn max_read(&self) -> Option<usize> {
        self.reads.iter().map(|&(_, p)| p).max()
    }
}

/// A capital function on histories with oracle access.
pub trait OracleStrategy: Send + Sync {
    fn capital(&self, x: &BitString, tape: &mut OracleTape) -> Result<Capital, MartingaleError>;
    fn name(&self) -> String;
}

/// An oracle strategy given as one bet per history. `bet` is asked for the
/// bit at position `history.len()`.
pub trait OracleBettor: Send + Sync {
    fn bet(&self, history: &BitString, tape: &mut OracleTape) -> Option<Bet>;
    fn name(&self) -> String;
}

#[derive(Debug, Clone)]
pub struct OracleBetting<B>(pub B);

impl<B: OracleBettor> OracleBetting<B> {
    pub fn trajectory(&self, x: &BitString, tape: &mut OracleTape) -> Vec<Capital> {
        let mut out = Vec::with_capacity(x.len() + 1);
        let mut cap = Capital::one();
        out.push(cap.clone());
        for n in 0..x.len() {
            tape.set_step(n + 1);
            if let Some(bet) = self.0.bet(&x.slice(0, n), tape) {
                cap = bet.apply(&cap, x.bit(n));
            }
            out.push(cap.clone());
        }
        out
    }
}

impl<B: OracleBettor> OracleStrategy for OracleBetting<B> {
    fn capital(&self, x: &BitString, tape: &mut OracleTape) -> Result<Capital, MartingaleError> {
        Ok(self.trajectory(x, tape).pop().expect("nonempty"))
    }

    fn name(&self) -> String {
        self.0.name()
    }
}

impl<T: OracleStrategy + ?Sized> OracleStrategy for Arc<T> {
    fn capital(&self, x: &BitString, tape: &mut OracleTape) -> Result<Capital, MartingaleError> {
        (**self).capital(x, tape)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// `d^Y(x0) + d^Y(x1) = 2·d^Y(x)` for one fixed oracle `Y` and every `x`
/// shorter than `depth`.
pub fn validate_oracle_fairness(
    d: &dyn OracleStrategy,
    oracle: &BitString,
    depth: usize,
) -> Result<bool, MartingaleError> {
    if depth > FAIRNESS_CAP {
        return Err(MartingaleError::CapExceeded {
            requested: depth,
            cap: FAIRNESS_CAP,
        });
    }
    let eval = |x: &BitString| d.capital(x, &mut OracleTape::new(oracle));
    for x in (0..depth).flat_map(BitString::all_of_len) {
        let mut x0 = x.clone();
        x0.push(false);
        let mut x1 = x.clone();
        x1.push(true);
        if eval(&x0)? + eval(&x1)? != eval(&x)?.double() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantOracle;

impl OracleStrategy for ConstantOracle {
    fn capital(&self, _: &BitString, _: &mut OracleTape) -> Result<Capital, MartingaleError> {
        Ok(Capital::one())
    }

    fn name(&self) -> String {
        "constant".into()
    }
}

/// Bets `x_n = Y[source(n)]` for the listed positions. With a window, a
/// source beyond the honesty horizon of `n` is not read and no bet is made.
#[derive(Debug, Clone, Default)]
pub struct CopyOracle {
    pub by_target: BTreeMap<usize, usize>,
    pub window: Option<ExecBudget>,
}

impl OracleBettor for CopyOracle {
    fn bet(&self, history: &BitString, tape: &mut OracleTape) -> Option<Bet> {
        let n = history.len();
        let source = *self.by_target.get(&n)?;
        if self
            .window
            .is_some_and(|w| source >= honesty_horizon(&w, n))
        {
            return None;
        }
        tape.read(source).map(Bet::all_in)
    }

    fn name(&self) -> String {
        match self.window {
            Some(w) => format!("copy-oracle({} pairs, window {w})", self.by_target.len()),
            None => format!("copy-oracle({} pairs)", self.by_target.len()),
        }
    }
}

/// Oracle strategy replay with per-step read log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTranscript {
    pub transcript: MartingaleTranscript,
}

impl OracleTranscript {
    /// Replays `d` on every prefix of `x` against `oracle`. Step `n` covers
    /// the evaluation of `d(x↾n)`.
    pub fn replay(
        d: &dyn OracleStrategy,
        x: &BitString,
        oracle: &BitString,
        levels: &[Capital],
    ) -> Result<Self, MartingaleError> {
        let mut values = Vec::with_capacity(x.len() + 1);
        let mut reads = Vec::with_capacity(x.len() + 1);
        for n in 0..=x.len() {
            let mut tape = OracleTape::new(oracle);
            values.push(d.capital(&x.slice(0, n), &mut tape)?);
            let mut all: Vec<usize> = tape.reads.iter().map(|&(_, p)| p).collect();
            all.sort_unstable();
            all.dedup();
            reads.push(all);
        }
        Ok(Self {
            transcript: MartingaleTranscript::new(values, reads, levels),
        })
    }

    /// Every read made while evaluating `x↾n` lies below `horizon(n)`.
    pub fn within(&self, horizon: impl Fn(usize) -> usize) -> bool {
        self.transcript
            .oracle_reads
            .iter()
            .enumerate()
            .all(|(n, r)| r.iter().all(|&p| p < horizon(n)))
    }
}

/// Which clauses of the resilient-pair definition a strategy is audited in.
#[derive(Clone)]
pub struct Probe {
    pub strategy: Arc<dyn OracleStrategy>,
    /// Bets on `A↾n` with oracle `B↾n−1`.
    pub as_h: bool,
    /// Bets on `B↾n` with oracle `A↾n`.
    pub as_g: bool,
}

impl Probe {
    pub fn both(strategy: Arc<dyn OracleStrategy>) -> Self {
        Self {
            strategy,
            as_h: true,
            as_g: true,
        }
    }

    pub fn h(strategy: Arc<dyn OracleStrategy>) -> Self {
        Self {
            strategy,
            as_h: true,
            as_g: false,
        }
    }

    pub fn g(strategy: Arc<dyn OracleStrategy>) -> Self {
        Self {
            strategy,
            as_h: false,
            as_g: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResilienceEntry {
    pub name: String,
    /// `max_n h^{b↾n−1}(a↾n)`.
    pub max_h: Option<Capital>,
    /// `max_n g^{a↾n}(b↾n)`.
    pub max_g: Option<Capital>,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResilienceReport {
    pub threshold: Capital,
    pub entries: Vec<ResilienceEntry>,
}

impl ResilienceReport {
    pub fn violated(&self) -> bool {
        self.entries.iter().any(|e| e.violation)
    }
}

/// Records the largest capital each probe reaches in its clauses and flags
/// the ones exceeding `threshold`.
pub fn resilience_check(
    a: &BitString,
    b: &BitString,
    pool: &[Probe],
    threshold: &Capital,
) -> Result<ResilienceReport, MartingaleError> {
    if a.len() != b.len() {
        return Err(MartingaleError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let mut entries = Vec::with_capacity(pool.len());
    for probe in pool {
        let d = &probe.strategy;
        let mut max_h = probe.as_h.then(Capital::zero);
        let mut max_g = probe.as_g.then(Capital::zero);
        for n in 0..=a.len() {
            if let Some(m) = max_h.as_mut() {
                let oracle = b.slice(0, n.saturating_sub(1));
                *m = m
                    .clone()
                    .max(d.capital(&a.slice(0, n), &mut OracleTape::new(&oracle))?);
            }
            if let Some(m) = max_g.as_mut() {
                let oracle = a.slice(0, n);
                *m = m
                    .clone()
                    .max(d.capital(&b.slice(0, n), &mut OracleTape::new(&oracle))?);
            }
        }
        let violation = [&max_h, &max_g]
            .into_iter()
            .flatten()
            .any(|m| m > threshold);
        entries.push(ResilienceEntry {
            name: d.name(),
            max_h,
            max_g,
            violation,
        });
    }
    Ok(ResilienceReport {
        threshold: threshold.clone(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    #[test]
    fn constant_pool_is_resilient() {
        let pool = vec![Probe::both(Arc::new(ConstantOracle))];
        let r =
            resilience_check(&bits("0110"), &bits("1010"), &pool, &Capital::from_int(2)).unwrap();
        assert!(!r.violated());
        let r = resilience_check(&bits("0110"), &bits("1010"), &pool, &Capital::zero()).unwrap();
        assert!(r.violated());
        assert!(resilience_check(&bits("0"), &bits(""), &pool, &Capital::one()).is_err());
    }

    #[test]
    fn tape_logs_reads_per_step() {
        let oracle = bits("10110");
        let mut tape = OracleTape::new(&oracle);
        tape.set_step(1);
        assert_eq!(tape.read(2), Some(true));
        tape.set_step(2);
        assert_eq!(tape.read_range(3, 9), bits("10"));
        assert_eq!(tape.read(7), None);
        assert_eq!(tape.reads_by_step(3), vec![vec![], vec![2], vec![3, 4]]);
        assert_eq!(tape.max_read(), Some(4));
    }
}
