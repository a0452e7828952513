use std::sync::Arc;

use super::{BettingStrategy, MartingaleError, OracleStrategy, OracleTape};
use crate::bits::{interleave, BitString};
use crate::capital::Capital;

/// Longest σ `project_average` will sum over.
pub const PROJECTION_CAP: usize = 16;

/// Bets on the B-positions of `A⊎B` exactly as `d_B` bets on `B`; flat on
/// A-positions.
#[derive(Debug, Clone)]
pub struct LiftInterleave<M>(pub M);

pub fn lift_interleave<M: BettingStrategy>(d_b: M) -> LiftInterleave<M> {
    LiftInterleave(d_b)
}

impl<M: BettingStrategy> BettingStrategy for LiftInterleave<M> {
    fn capital(&self, w: &BitString) -> Capital {
        self.0.capital(&w.deinterleave().1)
    }

    fn name(&self) -> String {
        format!("lift({})", self.0.name())
    }
}

/// `2^{-|σ|} Σ_{|τ|=|σ|} d_AB(τ⊎σ)`.
pub fn project_average(
    d_ab: &dyn BettingStrategy,
    sigma: &BitString,
) -> Result<Capital, MartingaleError> {
    if sigma.len() > PROJECTION_CAP {
        return Err(MartingaleError::CapExceeded {
            requested: sigma.len(),
            cap: PROJECTION_CAP,
        });
    }
    let total: Capital = BitString::all_of_len(sigma.len())
        .map(|tau| d_ab.capital(&interleave(&tau, sigma).expect("equal lengths")))
        .sum();
    Ok(total.scale_pow2(-(sigma.len() as i64)))
}

/// The map `σ ↦ project_average(d_AB, σ)` as a strategy on B.
#[derive(Debug, Clone)]
pub struct Projected<M>(pub M);

impl<M: BettingStrategy> BettingStrategy for Projected<M> {
    fn capital(&self, w: &BitString) -> Capital {
        project_average(&self.0, w).expect("projection within cap")
    }

    fn name(&self) -> String {
        format!("project({})", self.0.name())
    }
}

/// Betting part `f` and bank `s` after a history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Savings {
    pub f: Capital,
    pub s: Capital,
}

/// Runs the savings-account recurrence along every prefix of `w`: `f`
/// follows `d`'s ratios until it reaches 2, then the excess over 1 moves
/// into `s` and `f` restarts at 1.
pub fn savings_transform(
    d: &dyn BettingStrategy,
    w: &BitString,
) -> Result<Vec<Savings>, MartingaleError> {
    let caps = d.trajectory(w);
    let two = Capital::from_int(2);
    let mut state = Savings {
        f: Capital::one(),
        s: Capital::zero(),
    };
    let mut out = vec![state.clone()];
    for n in 1..caps.len() {
        let f = state
            .f
            .mul_ratio(&caps[n], &caps[n - 1])
            .map_err(|e| MartingaleError::from_ratio(e, n))?;
        state = if f >= two {
            let excess = f.checked_sub(&Capital::one()).expect("f >= 2");
            Savings {
                f: Capital::one(),
                s: &state.s + &excess,
            }
        } else {
            Savings { f, s: state.s }
        };
        out.push(state.clone());
    }
    Ok(out)
}

/// The odd-step factor of `d`: `h^Y(X↾n) = d(λ)·Π_{k≤n} d(X⊎Y↾2k−1) / d(X⊎Y↾2k−2)`.
/// Reads `Y↾n−1` from the oracle.
#[derive(Clone)]
pub struct SplitH(pub Arc<dyn BettingStrategy>);

/// The even-step factor: `g^X(Y↾n) = d(λ)·Π_{k≤n} d(X⊎Y↾2k) / d(X⊎Y↾2k−1)`.
/// Reads `X↾n` from the oracle.
#[derive(Clone)]
pub struct SplitG(pub Arc<dyn BettingStrategy>);

pub fn split_h_g(d: Arc<dyn BettingStrategy>) -> (SplitH, SplitG) {
    (SplitH(d.clone()), SplitG(d))
}

fn read_prefix(tape: &mut OracleTape, len: usize) -> Result<BitString, MartingaleError> {
    (0..len)
        .map(|i| {
            tape.read(i).ok_or(MartingaleError::OracleTooShort {
                need: len,
                have: tape.len(),
            })
        })
        .collect()
}

/// `start · Π caps[k]/caps[k−1]` over the chosen steps `k`.
fn ratio_product(
    start: Capital,
    caps: &[Capital],
    mut steps: impl Iterator<Item = usize>,
) -> Result<Capital, MartingaleError> {
    steps.try_fold(start, |acc, k| {
        acc.mul_ratio(&caps[k], &caps[k - 1])
            .map_err(|e| MartingaleError::from_ratio(e, k))
    })
}

impl OracleStrategy for SplitH {
    fn capital(&self, x: &BitString, tape: &mut OracleTape) -> Result<Capital, MartingaleError> {
        let n = x.len();
        if n == 0 {
            return Ok(self.0.capital(&BitString::new()));
        }
        tape.set_step(n);
        let y = read_prefix(tape, n - 1)?;
        let joined = interleave(x, &y).expect("|x| = |y| + 1");
        let caps = self.0.trajectory(&joined);
        ratio_product(caps[0].clone(), &caps, (1..=n).map(|k| 2 * k - 1))
    }

    fn name(&self) -> String {
        format!("h({})", self.0.name())
    }
}

impl OracleStrategy for SplitG {
    fn capital(&self, y: &BitString, tape: &mut OracleTape) -> Result<Capital, MartingaleError> {
        let n = y.len();
        if n == 0 {
            return Ok(self.0.capital(&BitString::new()));
        }
        tape.set_step(n);
        let x = read_prefix(tape, n)?;
        let joined = interleave(&x, y).expect("equal lengths");
        let caps = self.0.trajectory(&joined);
        ratio_product(caps[0].clone(), &caps, (1..=n).map(|k| 2 * k))
    }

    fn name(&self) -> String {
        format!("g({})", self.0.name())
    }
}
