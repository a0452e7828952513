use std::sync::Arc;

use super::{
    Bet, BettingStrategy, Bettor, MartingaleError, OracleBettor, OracleStrategy, OracleTape,
};
use crate::bits::BitString;
use crate::capital::Capital;
use crate::machine::{
    run, run_traced, ExecBudget, MachineConfig, MachineError, Program, ProgramSpace,
};
use crate::par::{self, Execution};

/// A program read as a bettor: the conditional is the history reversed (so
/// offset 0 is the latest bit). Empty output means no bet; otherwise the
/// first output bit is the prediction and the stake is `2^{1−|output|}`.
#[derive(Debug, Clone)]
pub struct MachineBettor {
    pub program: Program,
    pub budget: Option<ExecBudget>,
}

fn bet_from_output(out: &BitString) -> Option<Bet> {
    let on = out.get(0)?;
    Some(Bet {
        on,
        stake: Capital::pow2(1 - out.len() as i64),
    })
}

impl Bettor for MachineBettor {
    fn bet(&self, history: &BitString) -> Option<Bet> {
        let outcome = run(&self.program, &history.reversed(), self.budget.as_ref());
        bet_from_output(outcome.output.as_ref().filter(|_| outcome.halted())?)
    }

    fn name(&self) -> String {
        format!("m{}", self.program.code())
    }
}

/// A program betting on `x_n` with the oracle window `Y[n, c·t(n)]` as its
/// conditional. Only positions the run actually reads are logged.
#[derive(Debug, Clone)]
pub struct MachineOracleBettor {
    pub program: Program,
    pub honesty: ExecBudget,
}

/// One past the last oracle position an honest strategy may read while
/// betting on position `n`: `c·t(n) + 1`.
pub fn honesty_horizon(honesty: &ExecBudget, n: usize) -> usize {
    honesty
        .factor
        .saturating_mul(honesty.bound.eval(n as u64))
        .saturating_add(1) as usize
}

impl OracleBettor for MachineOracleBettor {
    fn bet(&self, history: &BitString, tape: &mut OracleTape) -> Option<Bet> {
        let n = history.len();
        let window = tape.unlogged(n, honesty_horizon(&self.honesty, n));
        let (outcome, reads) = run_traced(&self.program, &window, None);
        for r in reads {
            tape.record(n + r);
        }
        bet_from_output(outcome.output.as_ref().filter(|_| outcome.halted())?)
    }

    fn name(&self) -> String {
        format!("o{}", self.program.code())
    }
}

/// Weighted capitals `2^{−ℓ}·d(w)` of every component plus the idle mass.
#[derive(Debug, Clone)]
struct Weighted {
    parts: Vec<Capital>,
    rest: Capital,
}

impl Weighted {
    fn start(weights: &[usize]) -> Self {
        let parts: Vec<Capital> = weights
            .iter()
            .map(|&l| Capital::pow2(-(l as i64)))
            .collect();
        let used: Capital = parts.iter().cloned().sum();
        let rest = Capital::one()
            .checked_sub(&used)
            .expect("Kraft sum at most 1");
        Self { parts, rest }
    }

    fn total(&self) -> Capital {
        self.parts.iter().cloned().sum::<Capital>() + self.rest.clone()
    }

    fn after(&self, bets: &[Option<Bet>], bit: bool) -> Vec<Capital> {
        self.parts
            .iter()
            .zip(bets)
            .map(|(c, b)| match b {
                Some(b) => b.apply(c, bit),
                None => c.clone(),
            })
            .collect()
    }

    fn push(&mut self, bets: &[Option<Bet>], bit: bool) {
        self.parts = self.after(bets, bit);
    }

    fn total_after(&self, bets: &[Option<Bet>], bit: bool) -> Capital {
        self.after(bets, bit).into_iter().sum::<Capital>() + self.rest.clone()
    }
}

/// Capital values along a greedily chosen extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub block: BitString,
    /// Mixture value before the block and after each of its bits.
    pub values: Vec<Capital>,
}

/// `D(w) = Σ 2^{−ℓ_p}·d_p(w) + (1 − Σ 2^{−ℓ_p})` over a weighted pool. Fair
/// whenever every component is, and dominates `2^{−ℓ_p}·d_p`.
#[derive(Clone, Default)]
pub struct Mixture {
    parts: Vec<(usize, Arc<dyn Bettor>)>,
    exec: Execution,
}

impl Mixture {
    /// `parts` pairs each bettor with its weight exponent; the weights must
    /// satisfy Kraft's inequality.
    pub fn new(parts: Vec<(usize, Arc<dyn Bettor>)>, exec: Execution) -> Self {
        Self { parts, exec }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = &Arc<dyn Bettor>> {
        self.parts.iter().map(|(_, b)| b)
    }

    fn bets(&self, history: &BitString) -> Vec<Option<Bet>> {
        par::map(self.exec, &self.parts, |(_, b)| b.bet(history))
    }

    fn replay(&self, w: &BitString) -> (Weighted, Vec<Capital>) {
        let weights: Vec<usize> = self.parts.iter().map(|(l, _)| *l).collect();
        let mut state = Weighted::start(&weights);
        let mut values = vec![state.total()];
        for n in 0..w.len() {
            let bets = self.bets(&w.slice(0, n));
            state.push(&bets, w.bit(n));
            values.push(state.total());
        }
        (state, values)
    }

    /// Extends `prefix` by `len` bits, each time taking 0 when that does not
    /// raise the mixture and 1 otherwise. Fairness makes every step
    /// non-increasing.
    pub fn extend_greedy(&self, prefix: &BitString, len: usize) -> Extension {
        let (mut state, values) = self.replay(prefix);
        let mut w = prefix.clone();
        let mut values = vec![values.last().expect("nonempty").clone()];
        for _ in 0..len {
            let bets = self.bets(&w);
            let bit = state.total_after(&bets, false) > *values.last().expect("nonempty");
            state.push(&bets, bit);
            w.push(bit);
            values.push(state.total());
        }
        Extension {
            block: w.slice(prefix.len(), w.len()),
            values,
        }
    }
}

impl BettingStrategy for Mixture {
    fn capital(&self, w: &BitString) -> Capital {
        self.replay(w).0.total()
    }

    fn trajectory(&self, w: &BitString) -> Vec<Capital> {
        self.replay(w).1
    }

    fn name(&self) -> String {
        format!("mixture[{}]", self.parts.len())
    }
}

/// The oracle analogue of [`Mixture`].
#[derive(Clone, Default)]
pub struct OracleMixture {
    parts: Vec<(usize, Arc<dyn OracleBettor>)>,
    exec: Execution,
}

impl OracleMixture {
    pub fn new(parts: Vec<(usize, Arc<dyn OracleBettor>)>, exec: Execution) -> Self {
        Self { parts, exec }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Bets of every component at `history`, each against its own view of
    /// the tape; all reads are merged into `tape`.
    fn bets(&self, history: &BitString, tape: &mut OracleTape) -> Vec<Option<Bet>> {
        let results = par::map(self.exec, &self.parts, |(_, b)| {
            let mut own = tape.clone_empty();
            let bet = b.bet(history, &mut own);
            (bet, own.take_reads())
        });
        results
            .into_iter()
            .map(|(bet, reads)| {
                for (_, p) in reads {
                    tape.record(p);
                }
                bet
            })
            .collect()
    }

    fn replay(&self, x: &BitString, tape: &mut OracleTape) -> (Weighted, Vec<Capital>) {
        let weights: Vec<usize> = self.parts.iter().map(|(l, _)| *l).collect();
        let mut state = Weighted::start(&weights);
        let mut values = vec![state.total()];
        for n in 0..x.len() {
            tape.set_step(n + 1);
            let bets = self.bets(&x.slice(0, n), tape);
            state.push(&bets, x.bit(n));
            values.push(state.total());
        }
        (state, values)
    }

    /// Greedy non-increasing extension of `prefix` against `oracle`.
    pub fn extend_greedy(&self, prefix: &BitString, len: usize, oracle: &BitString) -> Extension {
        let mut tape = OracleTape::new(oracle);
        let (mut state, values) = self.replay(prefix, &mut tape);
        let mut x = prefix.clone();
        let mut values = vec![values.last().expect("nonempty").clone()];
        for _ in 0..len {
            tape.set_step(x.len() + 1);
            let bets = self.bets(&x, &mut tape);
            let bit = state.total_after(&bets, false) > *values.last().expect("nonempty");
            state.push(&bets, bit);
            x.push(bit);
            values.push(state.total());
        }
        Extension {
            block: x.slice(prefix.len(), x.len()),
            values,
        }
    }

    /// Capital after every prefix of `x`.
    pub fn trajectory(&self, x: &BitString, tape: &mut OracleTape) -> Vec<Capital> {
        self.replay(x, tape).1
    }
}

impl OracleStrategy for OracleMixture {
    fn capital(&self, x: &BitString, tape: &mut OracleTape) -> Result<Capital, MartingaleError> {
        Ok(self.replay(x, tape).0.total())
    }

    fn name(&self) -> String {
        format!("oracle-mixture[{}]", self.parts.len())
    }
}

/// Every machine-derived bettor whose code is at most `cap` bits, in both
/// the plain and the oracle reading.
#[derive(Debug, Clone)]
pub struct Pool {
    pub cap: usize,
    pub plain: Vec<MachineBettor>,
    pub oracle: Vec<MachineOracleBettor>,
}

impl Pool {
    pub fn mixture(&self, exec: Execution) -> Mixture {
        let parts = self
            .plain
            .iter()
            .map(|b| (b.program.len(), Arc::new(b.clone()) as Arc<dyn Bettor>))
            .collect();
        Mixture::new(parts, exec)
    }

    pub fn oracle_mixture(&self, exec: Execution) -> OracleMixture {
        let parts = self
            .oracle
            .iter()
            .map(|b| {
                (
                    b.program.len(),
                    Arc::new(b.clone()) as Arc<dyn OracleBettor>,
                )
            })
            .collect();
        OracleMixture::new(parts, exec)
    }

    pub fn len(&self) -> usize {
        self.plain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plain.is_empty()
    }
}

/// Plain bettors run under `budget`; oracle bettors see the window allowed
/// by `honesty`.
pub fn machine_pool(
    cfg: &MachineConfig,
    cap: usize,
    budget: Option<ExecBudget>,
    honesty: ExecBudget,
) -> Result<Pool, MachineError> {
    let space = ProgramSpace::build(cfg, cap)?;
    let programs: Vec<Program> = space.iter().cloned().collect();
    Ok(Pool {
        cap,
        plain: programs
            .iter()
            .map(|p| MachineBettor {
                program: p.clone(),
                budget,
            })
            .collect(),
        oracle: programs
            .into_iter()
            .map(|program| MachineOracleBettor { program, honesty })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::martingale::{validate_fairness, Betting};

    fn pool() -> Pool {
        machine_pool(
            &MachineConfig::builtin(),
            8,
            Some(ExecBudget::quadratic(4)),
            ExecBudget::quadratic(1),
        )
        .unwrap()
    }

    #[test]
    fn literal_bettors_predict_their_first_bit() {
        let b = MachineBettor {
            program: Program::literal(&bits("1")),
            budget: None,
        };
        assert_eq!(b.bet(&bits("00")), Some(Bet::all_in(true)));
        let b = MachineBettor {
            program: Program::literal(&bits("011")),
            budget: None,
        };
        assert_eq!(
            b.bet(&bits("")),
            Some(Bet {
                on: false,
                stake: Capital::dyadic(1, 2)
            })
        );
        let quiet = MachineBettor {
            program: Program::literal(&bits("")),
            budget: None,
        };
        assert_eq!(quiet.bet(&bits("1")), None);
    }

    #[test]
    fn mixture_is_fair_and_greedy_never_gains() {
        let pool = pool();
        assert!(!pool.is_empty());
        let d = pool.mixture(Execution::Sequential);
        assert!(validate_fairness(&d, 5).unwrap());
        let ext = d.extend_greedy(&bits("01"), 10);
        assert_eq!(ext.block.len(), 10);
        assert!(ext.values.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(
            ext.values,
            d.trajectory(&bits("01").concat(&ext.block))[2..].to_vec()
        );
        let par = pool
            .mixture(Execution::Parallel)
            .extend_greedy(&bits("01"), 10);
        assert_eq!(par, ext);
        for b in pool.plain.iter().take(20) {
            assert!(validate_fairness(&Betting(b.clone()), 4).unwrap());
        }
    }

    #[test]
    fn greedy_against_all_in_on_zero_picks_ones() {
        struct Zeros;
        impl Bettor for Zeros {
            fn bet(&self, _: &BitString) -> Option<Bet> {
                Some(Bet::all_in(false))
            }
            fn name(&self) -> String {
                "zeros".into()
            }
        }
        let d = Mixture::new(vec![(1, Arc::new(Zeros))], Execution::Sequential);
        let chosen = d.extend_greedy(&bits(""), 6).block;
        // Brute force: least block whose every step leaves the mixture flat or lower.
        let oracle = BitString::all_of_len(6)
            .find(|x| d.trajectory(x).windows(2).all(|w| w[1] <= w[0]))
            .unwrap();
        assert_eq!(chosen, oracle);
        assert_eq!(chosen, bits("100000"));
        assert_eq!(
            Mixture::default().extend_greedy(&bits("1"), 4).block,
            bits("0000")
        );
    }

    #[test]
    fn oracle_bettors_read_inside_their_window() {
        let copy = MachineOracleBettor {
            program: Program::copy_cond(1, 0),
            honesty: ExecBudget::quadratic(1),
        };
        let oracle = bits("0110100");
        let mut tape = OracleTape::new(&oracle);
        tape.set_step(3);
        assert_eq!(copy.bet(&bits("01"), &mut tape), Some(Bet::all_in(true)));
        assert_eq!(tape.reads_by_step(4)[3], vec![2]);
        let d = pool().oracle_mixture(Execution::Sequential);
        let mut tape = OracleTape::new(&oracle);
        let ext = d.extend_greedy(&bits(""), 7, &oracle);
        assert!(ext.values.windows(2).all(|w| w[1] <= w[0]));
        let values = d.trajectory(&ext.block, &mut tape);
        assert_eq!(values, ext.values);
        for (n, reads) in tape.reads_by_step(8).iter().enumerate().skip(1) {
            let horizon = honesty_horizon(&ExecBudget::quadratic(1), n - 1);
            assert!(
                reads.iter().all(|&p| p >= n - 1 && p < horizon),
                "step {n}: {reads:?}"
            );
        }
    }
}
