use proptest::prelude::*;
use vanlam_core::bits::{interleave, BitString};
use vanlam_core::capital::Capital;
use vanlam_core::lookahead::{
    lift_lookahead_b, lift_lookahead_cond, play, validate_lookahead_fairness, LookaheadStrategy,
    NoLookahead, OracleShift, PeekAndBet, Query,
};
use vanlam_core::machine::ExecBudget;
use vanlam_core::martingale::{Bet, Bettor, HashBettor};

/// Peeks at `x_n` on odd steps and bets on `x_{n−1}` with a hashed stake that
/// depends on the peeked bit; stays flat on even steps, whose position the
/// previous peek revealed. Also reads one past position per step.
#[derive(Debug, Clone, Copy)]
struct HashPeek(u64);

impl LookaheadStrategy for HashPeek {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
        let n = history.len() + 1;
        if n >= 3 {
            q.query((self.0 as usize + n) % (n - 1));
        }
        if n.is_multiple_of(2) {
            return None;
        }
        let mut seen = history.clone();
        seen.push(q.query(n).unwrap_or(false));
        HashBettor::new(self.0).bet(&seen)
    }

    fn window(&self) -> ExecBudget {
        ExecBudget::quadratic(1)
    }

    fn name(&self) -> String {
        format!("hash-peek({})", self.0)
    }
}

/// Reads oracle bit `n − 1` and bets on `x_{n−1}` with a hashed stake.
#[derive(Debug, Clone, Copy)]
struct HashOracle(u64);

impl LookaheadStrategy for HashOracle {
    fn step(&self, history: &BitString, q: &mut dyn Query) -> Option<Bet> {
        let mut seen = history.clone();
        seen.push(q.oracle(history.len()).unwrap_or(false));
        HashBettor::new(self.0).bet(&seen)
    }

    fn window(&self) -> ExecBudget {
        ExecBudget::quadratic(1)
    }

    fn name(&self) -> String {
        format!("hash-oracle({})", self.0)
    }
}

fn levels() -> Vec<Capital> {
    let mut out = vec![Capital::dyadic(3, 1), Capital::dyadic(5, 2)];
    out.extend((0..4).map(Capital::pow2));
    out
}

#[test]
fn both_lifts_are_fair_to_depth_eight() {
    for seed in 0..3 {
        assert!(validate_lookahead_fairness(&HashPeek(seed), 8).unwrap());
        assert!(validate_lookahead_fairness(&lift_lookahead_b(HashPeek(seed)), 8).unwrap());
        assert!(validate_lookahead_fairness(
            &lift_lookahead_b(NoLookahead(HashBettor::new(seed))),
            8
        )
        .unwrap());
        assert!(validate_lookahead_fairness(&lift_lookahead_cond(HashOracle(seed)), 8).unwrap());
        assert!(validate_lookahead_fairness(&lift_lookahead_cond(HashPeek(seed)), 8).unwrap());
    }
    assert!(
        validate_lookahead_fairness(&lift_lookahead_cond(OracleShift { shift: 1 }), 8).unwrap()
    );
}

fn pairs(n: usize) -> impl Iterator<Item = (BitString, BitString)> {
    BitString::all_of_len(n)
        .flat_map(move |a| BitString::all_of_len(n).map(move |b| (a.clone(), b)))
}

#[test]
fn lift_b_crossings_land_at_even_positions() {
    for seed in 0..4 {
        for (a, b) in pairs(5) {
            let h = play(&HashPeek(seed), &b, None).unwrap();
            let d = play(
                &lift_lookahead_b(HashPeek(seed)),
                &interleave(&a, &b).unwrap(),
                None,
            )
            .unwrap();
            assert!(d.ledger_monotone() && d.rules_hold());
            for k in 0..=b.len() {
                assert_eq!(d.values[2 * k], h.values[k]);
            }
            for level in levels() {
                assert_eq!(
                    d.first_crossing(&level),
                    h.first_crossing(&level).map(|m| 2 * m),
                    "level {level}"
                );
            }
        }
    }
}

#[test]
fn lift_cond_crossings_land_at_odd_positions() {
    for seed in 0..4 {
        for (a, b) in pairs(5) {
            let g = play(&HashOracle(seed), &a, Some(&b)).unwrap();
            let d = play(
                &lift_lookahead_cond(HashOracle(seed)),
                &interleave(&a, &b).unwrap(),
                None,
            )
            .unwrap();
            assert!(d.ledger_monotone() && d.rules_hold());
            for level in levels() {
                assert_eq!(
                    d.first_crossing(&level),
                    g.first_crossing(&level).map(|m| 2 * m - 1),
                    "level {level}"
                );
            }
        }
    }
}

#[test]
fn lifted_queries_stay_on_their_half() {
    let (a, b) = (BitString::ones(6), BitString::zeros(6));
    let w = interleave(&a, &b).unwrap();
    let t = play(&lift_lookahead_b(HashPeek(7)), &w, None).unwrap();
    assert!(t
        .trail
        .iter()
        .flat_map(|s| s.queried.iter())
        .all(|p| p % 2 == 1));
    let t = play(&lift_lookahead_cond(HashPeek(7)), &w, None).unwrap();
    assert!(t
        .trail
        .iter()
        .flat_map(|s| s.queried.iter())
        .all(|p| p % 2 == 0));
}

proptest! {
    #[test]
    fn replays_never_break_the_protocol(seed in 0u64..1000, x in proptest::collection::vec(any::<bool>(), 0..24)) {
        let x: BitString = x.into_iter().collect();
        let strategies: [&dyn LookaheadStrategy; 3] = [&HashPeek(seed), &PeekAndBet, &lift_lookahead_b(HashPeek(seed))];
        for d in strategies {
            let t = play(d, &x, None).unwrap();
            prop_assert!(t.ledger_monotone());
            prop_assert!(t.rules_hold());
        }
    }
}
