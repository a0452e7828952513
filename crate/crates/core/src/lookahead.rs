//! Betting with lookahead: a strategy may query positions ahead of the one it
//! bets on. Every queried position enters a ledger and can never be bet on.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::bits::BitString;
use crate::capital::Capital;
use crate::machine::ExecBudget;
use crate::martingale::{honesty_horizon, Bet, Bettor, MartingaleTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Query outside `{0..n−2} ∪ {n..c·t(n)}`.
    WindowBound,
    /// Query of the position being bet on.
    NoReveal,
    /// Bet on a position already in the ledger.
    ForbiddenBet,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::WindowBound => "window bound",
            Rule::NoReveal => "no-reveal",
            Rule::ForbiddenBet => "forbidden bet",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{rule} violated at step {step} (position {position})")]
pub struct ProtocolViolation {
    pub rule: Rule,
    pub step: usize,
    pub position: usize,
}

/// Positions revealed so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryLedger {
    revealed: BTreeSet<usize>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.revealed.contains(&pos)
    }

    pub fn extend(&mut self, positions: impl IntoIterator<Item = usize>) {
        self.revealed.extend(positions);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.revealed.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.revealed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.revealed.is_empty()
    }

    pub fn is_subset(&self, other: &QueryLedger) -> bool {
        self.revealed.is_subset(&other.revealed)
    }
}

/// What a strategy may look at during one step.
pub trait Query {
    /// A position of the sequence being bet on.
    fn query(&mut self, pos: usize) -> Option<bool>;
    /// A position of the oracle, if the strategy has one.
    fn oracle(&mut self, pos: usize) -> Option<bool>;
}

/// A fair strategy in the lookahead game. `step` is called with the history
/// `x↾n−1` and decides the bet on `x_{n−1}`.
pub trait LookaheadStrategy: Send + Sync {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet>;
    /// Queries at step `n` must stay below `c·t(n) + 1`.
    fn window(&self) -> ExecBudget;
    fn name(&self) -> String;
}

/// The referee's view of one step.
struct Window<'a> {
    x: &'a BitString,
    oracle: Option<&'a BitString>,
    step: usize,
    horizon: usize,
    queried: Vec<usize>,
    oracle_reads: Vec<usize>,
    violation: Option<ProtocolViolation>,
}

impl Window<'_> {
    fn flag(&mut self, rule: Rule, position: usize) {
        self.violation.get_or_insert(ProtocolViolation {
            rule,
            step: self.step,
            position,
        });
    }
}

impl Query for Window<'_> {
    fn query(&mut self, pos: usize) -> Option<bool> {
        if pos + 1 == self.step {
            self.flag(Rule::NoReveal, pos);
            return None;
        }
        if pos >= self.step && pos >= self.horizon {
            self.flag(Rule::WindowBound, pos);
            return None;
        }
        self.queried.push(pos);
        self.x.get(pos)
    }

    fn oracle(&mut self, pos: usize) -> Option<bool> {
        if pos >= self.horizon {
            self.flag(Rule::WindowBound, pos);
            return None;
        }
        self.oracle_reads.push(pos);
        self.oracle?.get(pos)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerStep {
    pub step: usize,
    /// Position bet on, if a bet was placed.
    pub bet: Option<usize>,
    pub queried: Vec<usize>,
    pub oracle_reads: Vec<usize>,
    /// Ledger after this step.
    pub ledger: QueryLedger,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookaheadTranscript {
    /// `values[n]` is the capital after `n` bits.
    pub values: Vec<Capital>,
    /// One entry per step `1..=|x|`.
    pub trail: Vec<LedgerStep>,
}

impl LookaheadTranscript {
    pub fn ledger_monotone(&self) -> bool {
        self.trail
            .windows(2)
            .all(|w| w[0].ledger.is_subset(&w[1].ledger))
    }

    /// No step bet on a position revealed before it, and none read the
    /// position it bet on.
    pub fn rules_hold(&self) -> bool {
        let mut before = QueryLedger::new();
        for s in &self.trail {
            if s.queried.contains(&(s.step - 1)) || s.bet.is_some_and(|p| before.contains(p)) {
                return false;
            }
            before = s.ledger.clone();
        }
        true
    }

    pub fn first_crossing(&self, level: &Capital) -> Option<usize> {
        self.values.iter().position(|v| v > level)
    }

    pub fn transcript(&self, levels: &[Capital]) -> MartingaleTranscript {
        let mut reads = vec![Vec::new()];
        reads.extend(self.trail.iter().map(|s| s.oracle_reads.clone()));
        MartingaleTranscript::new(self.values.clone(), reads, levels)
    }

    /// `step,bet_positions,queried_positions`.
    pub fn to_csv(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let mut out = String::from("step,bet_positions,queried_positions\n");
        for s in &self.trail {
            let bet = s.bet.map_or(String::new(), |p| p.to_string());
            writeln!(out, "{},{bet},{}", s.step, join(&s.queried)).expect("write to string");
        }
        out
    }
}

/// Referees `d` on `x`. The first rule broken aborts the replay.
pub fn play(
    d: &dyn LookaheadStrategy,
    x: &BitString,
    oracle: Option<&BitString>,
) -> Result<LookaheadTranscript, ProtocolViolation> {
    let budget = d.window();
    let mut ledger = QueryLedger::new();
    let mut cap = Capital::one();
    let mut values = vec![cap.clone()];
    let mut trail = Vec::with_capacity(x.len());
    for n in 1..=x.len() {
        let mut w = Window {
            x,
            oracle,
            step: n,
            horizon: honesty_horizon(&budget, n),
            queried: Vec::new(),
            oracle_reads: Vec::new(),
            violation: None,
        };
        let bet = d.step(&x.slice(0, n - 1), &mut w);
        if let Some(v) = w.violation {
            return Err(v);
        }
        if bet.is_some() && ledger.contains(n - 1) {
            return Err(ProtocolViolation {
                rule: Rule::ForbiddenBet,
                step: n,
                position: n - 1,
            });
        }
        if let Some(b) = &bet {
            cap = b.apply(&cap, x.bit(n - 1));
        }
        values.push(cap.clone());
        w.queried.sort_unstable();
        w.queried.dedup();
        w.oracle_reads.sort_unstable();
        w.oracle_reads.dedup();
        ledger.extend(w.queried.iter().copied());
        trail.push(LedgerStep {
            step: n,
            bet: bet.map(|_| n - 1),
            queried: w.queried,
            oracle_reads: w.oracle_reads,
            ledger: ledger.clone(),
        });
    }
    Ok(LookaheadTranscript { values, trail })
}

/// Exact fairness on every sequence of length `depth`: the bet at step `n`
/// does not depend on `x_{n−1}`, and flipping `x_{n−1}` averages the capital
/// after step `n` to the capital before it.
pub fn validate_lookahead_fairness(
    d: &dyn LookaheadStrategy,
    depth: usize,
) -> Result<bool, ProtocolViolation> {
    for x in BitString::all_of_len(depth) {
        let t = play(d, &x, None)?;
        for n in 1..=depth {
            let mut y = x.clone();
            y.set(n - 1, !x.bit(n - 1));
            let u = play(d, &y, None)?;
            if t.trail[n - 1].bet != u.trail[n - 1].bet
                || &t.values[n] + &u.values[n] != &t.values[n - 1] + &u.values[n - 1]
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A plain bettor in the lookahead game; never queries.
#[derive(Debug, Clone)]
pub struct NoLookahead<B>(pub B);

impl<B: Bettor> LookaheadStrategy for NoLookahead<B> {
    fn step(&self, history: &BitString, _: &mut dyn Query) -> Option<Bet> {
        self.0.bet(history)
    }

    fn window(&self) -> ExecBudget {
        ExecBudget::quadratic(1)
    }

    fn name(&self) -> String {
        self.0.name()
    }
}

/// On odd steps `n`, reads `x_n` and stakes everything on `x_{n−1} ≠ x_n`;
/// even steps are forbidden by the previous query and stay flat.
#[derive(Debug, Clone, Copy, Default)]
pub struct PeekAndBet;

impl LookaheadStrategy for PeekAndBet {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
        let n = history.len() + 1;
        if n.is_multiple_of(2) {
            return None;
        }
        q.query(n).map(|next| Bet::all_in(!next))
    }

    fn window(&self) -> ExecBudget {
        ExecBudget::quadratic(1)
    }

    fn name(&self) -> String {
        "peek-and-bet".into()
    }
}

/// Reads `x_n` at step `n`, then bets on it at step `n + 1`: a forbidden bet.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyPeek;

impl LookaheadStrategy for GreedyPeek {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
        let n = history.len() + 1;
        let next = q.query(n);
        (n > 1).then(|| Bet::all_in(next.unwrap_or(false)))
    }

    fn window(&self) -> ExecBudget {
        ExecBudget::quadratic(1)
    }

    fn name(&self) -> String {
        "greedy-peek".into()
    }
}

/// Bets `x_n = Y_{n+shift}`, reading the oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleShift {
    pub shift: usize,
}

impl LookaheadStrategy for OracleShift {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
        q.oracle(history.len() + self.shift).map(Bet::all_in)
    }

    fn window(&self) -> ExecBudget {
        ExecBudget::quadratic(1)
    }

    fn name(&self) -> String {
        format!("oracle-shift({})", self.shift)
    }
}

/// Translates an inner strategy's positions into the interleaved game.
struct Mapped<'q> {
    inner: &'q mut dyn Query,
    query: fn(usize) -> usize,
    oracle: Option<fn(usize) -> usize>,
}

impl Query for Mapped<'_> {
    fn query(&mut self, pos: usize) -> Option<bool> {
        self.inner.query((self.query)(pos))
    }

    fn oracle(&mut self, pos: usize) -> Option<bool> {
        self.inner.query((self.oracle?)(pos))
    }
}

/// Window of the lifted game: `(2c+1)·t` covers every doubled position.
fn lifted_window(inner: ExecBudget) -> ExecBudget {
    ExecBudget {
        bound: inner.bound,
        factor: inner.factor.saturating_mul(2).saturating_add(1),
    }
}

fn odd_bits(w: &BitString) -> BitString {
    w.iter().skip(1).step_by(2).collect()
}

fn even_bits(w: &BitString) -> BitString {
    w.iter().step_by(2).collect()
}

/// Plays `h` on the B-positions of `A⊎B`; flat on A-positions. `h`'s query
/// of `i` becomes a query of `2i + 1`.
#[derive(Debug, Clone)]
pub struct LiftB<H>(pub H);

pub fn lift_lookahead_b<H: LookaheadStrategy>(h: H) -> LiftB<H> {
    LiftB(h)
}

impl<H: LookaheadStrategy> LookaheadStrategy for LiftB<H> {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
        if history.len().is_multiple_of(2) {
            return None;
        }
        let mut inner = Mapped {
            inner: q,
            query: |i| 2 * i + 1,
            oracle: None,
        };
        self.0.step(&odd_bits(history), &mut inner)
    }

    fn window(&self) -> ExecBudget {
        lifted_window(self.0.window())
    }

    fn name(&self) -> String {
        format!("lift-b({})", self.0.name())
    }
}

/// Plays the oracle strategy `g` on the A-positions of `A⊎B` with `B` as its
/// oracle; flat on B-positions. Queries of `i` become `2i`, oracle reads of
/// `j` become queries of `2j + 1`.
#[derive(Debug, Clone)]
pub struct LiftCond<G>(pub G);

pub fn lift_lookahead_cond<G: LookaheadStrategy>(g: G) -> LiftCond<G> {
    LiftCond(g)
}

impl<G: LookaheadStrategy> LookaheadStrategy for LiftCond<G> {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
        if history.len() % 2 == 1 {
            return None;
        }
        let mut inner = Mapped {
            inner: q,
            query: |i| 2 * i,
            oracle: Some(|j| 2 * j + 1),
        };
        self.0.step(&even_bits(history), &mut inner)
    }

    fn window(&self) -> ExecBudget {
        lifted_window(self.0.window())
    }

    fn name(&self) -> String {
        format!("lift-cond({})", self.0.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{bits, interleave};
    use crate::martingale::HashBettor;

    #[test]
    fn never_querying_matches_plain_replay() {
        let x = bits("01101001");
        let t = play(&NoLookahead(HashBettor::new(3)), &x, None).unwrap();
        assert!(t.trail.iter().all(|s| s.ledger.is_empty()));
        let plain = crate::martingale::Betting(HashBettor::new(3));
        assert_eq!(
            t.values,
            crate::martingale::BettingStrategy::trajectory(&plain, &x)
        );
    }

    #[test]
    fn greedy_peek_is_caught() {
        let e = play(&GreedyPeek, &bits("0101"), None).unwrap_err();
        assert_eq!(
            e,
            ProtocolViolation {
                rule: Rule::ForbiddenBet,
                step: 2,
                position: 1
            }
        );
    }

    #[test]
    fn peek_and_bet_doubles_when_permitted() {
        let x = bits("01010101");
        let t = play(&PeekAndBet, &x, None).unwrap();
        let expected: Vec<u64> = vec![1, 2, 2, 4, 4, 8, 8, 16, 16];
        assert_eq!(
            t.values,
            expected
                .into_iter()
                .map(Capital::from_int)
                .collect::<Vec<_>>()
        );
        assert!(t.ledger_monotone() && t.rules_hold());
        assert!(t
            .to_csv()
            .starts_with("step,bet_positions,queried_positions\n1,0,1\n2,,\n"));
    }

    #[test]
    fn reveal_and_window_violations() {
        struct Peeker(usize);
        impl LookaheadStrategy for Peeker {
            fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
                q.query(history.len() + self.0);
                None
            }
            fn window(&self) -> ExecBudget {
                ExecBudget::quadratic(1)
            }
            fn name(&self) -> String {
                "peeker".into()
            }
        }
        assert_eq!(
            play(&Peeker(0), &bits("01"), None).unwrap_err().rule,
            Rule::NoReveal
        );
        assert_eq!(
            play(&Peeker(3), &bits("01"), None).unwrap_err().rule,
            Rule::WindowBound
        );
        assert!(play(&Peeker(1), &bits("0110"), None).is_ok());
    }

    #[test]
    fn lifts_map_positions() {
        let a = bits("0000");
        let b = bits("1010");
        let w = interleave(&a, &b).unwrap();
        let t = play(&lift_lookahead_b(PeekAndBet), &w, None).unwrap();
        assert_eq!(t.values[2], Capital::from_int(2));
        assert!(t
            .trail
            .iter()
            .flat_map(|s| s.ledger.iter())
            .all(|p| p % 2 == 1));
        let a = bits("0110");
        let b = bits("1011");
        let w = interleave(&a, &b).unwrap();
        let t = play(&lift_lookahead_cond(OracleShift { shift: 1 }), &w, None).unwrap();
        let g = play(&OracleShift { shift: 1 }, &a, Some(&b)).unwrap();
        for n in 0..=a.len() {
            assert_eq!(t.values[(2 * n).saturating_sub(1)], g.values[n]);
        }
        assert_eq!(g.trail[0].oracle_reads, vec![1]);
        assert_eq!(t.trail[0].queried, vec![3]);
    }

    #[test]
    fn fixtures_are_fair() {
        assert!(validate_lookahead_fairness(&PeekAndBet, 6).unwrap());
        assert!(validate_lookahead_fairness(&lift_lookahead_b(PeekAndBet), 6).unwrap());
    }
}
