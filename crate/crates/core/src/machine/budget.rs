use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MachineError;

/// The built-in time bounds `t`, all monotone with `t(n) >= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeBound {
    /// `t(n) = n²`
    #[serde(rename = "n2")]
    Quadratic,
    /// `t(n) = n·⌈log₂(n+2)⌉`
    #[serde(rename = "nlogn")]
    NLogN,
    /// `t(n) = 2n`
    #[serde(rename = "2n")]
    Linear,
}

impl TimeBound {
    pub fn eval(self, n: u64) -> u64 {
        match self {
            TimeBound::Quadratic => n.saturating_mul(n),
            TimeBound::NLogN => n.saturating_mul(ceil_log2(n + 2)),
            TimeBound::Linear => n.saturating_mul(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeBound::Quadratic => "n2",
            TimeBound::NLogN => "nlogn",
            TimeBound::Linear => "2n",
        }
    }

    pub const ALL: [TimeBound; 3] = [TimeBound::Quadratic, TimeBound::NLogN, TimeBound::Linear];
}

fn ceil_log2(x: u64) -> u64 {
    debug_assert!(x >= 1);
    64 - (x - 1).leading_zeros() as u64
}

impl FromStr for TimeBound {
    type Err = MachineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n2" | "n^2" | "quadratic" => Ok(TimeBound::Quadratic),
            "nlogn" | "n log n" => Ok(TimeBound::NLogN),
            "2n" | "linear" => Ok(TimeBound::Linear),
            other => Err(MachineError::UnknownTimeBound(other.to_string())),
        }
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A step allowance of `factor · (t(n) + 1)` where `n` is the output length.
///
/// The `+ 1` is the additive constant hidden in `O(t(n))`; without it no
/// program could emit the empty string or a single bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecBudget {
    pub bound: TimeBound,
    pub factor: u64,
}

impl ExecBudget {
    pub fn new(bound: TimeBound, factor: u64) -> Result<Self, MachineError> {
        if factor == 0 {
            return Err(MachineError::ZeroFactor);
        }
        Ok(Self { bound, factor })
    }

    /// `t(n) = n²`, `c = 4`: the default complexity budget.
    pub fn quadratic(factor: u64) -> Self {
        Self {
            bound: TimeBound::Quadratic,
            factor: factor.max(1),
        }
    }

    pub fn limit(&self, n: u64) -> u64 {
        self.factor
            .saturating_mul(self.bound.eval(n).saturating_add(1))
    }

    /// True when `self` allows at least as many steps as `other` at every
    /// length up to `max_n`.
    pub fn dominates(&self, other: &ExecBudget, max_n: u64) -> bool {
        (0..=max_n).all(|n| self.limit(n) >= other.limit(n))
    }

    /// Checks monotonicity and `t(n) >= n` on `0..=max_n`.
    pub fn validate(&self, max_n: u64) -> Result<(), MachineError> {
        let mut prev = 0;
        for n in 0..=max_n {
            let t = self.bound.eval(n);
            if t < n || t < prev {
                return Err(MachineError::BadTimeBound {
                    name: self.bound.name(),
                    at: n,
                });
            }
            prev = t;
        }
        Ok(())
    }

    /// Parses `name` or `name*c`, e.g. `n2*4`.
    pub fn parse(s: &str) -> Result<Self, MachineError> {
        let (name, factor) = match s.split_once('*') {
            Some((n, c)) => (
                n.trim(),
                c.trim()
                    .parse()
                    .map_err(|_| MachineError::BadBudget(s.into()))?,
            ),
            None => (s.trim(), 1),
        };
        ExecBudget::new(name.parse()?, factor)
    }
}

impl fmt::Display for ExecBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}", self.bound, self.factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_are_superlinear_and_monotone() {
        for b in TimeBound::ALL {
            ExecBudget::new(b, 1).unwrap().validate(4096).unwrap();
        }
        assert_eq!(TimeBound::NLogN.eval(6), 6 * 3);
        assert_eq!(TimeBound::NLogN.eval(0), 0);
        assert_eq!(TimeBound::Quadratic.eval(5), 25);
        assert_eq!(TimeBound::Linear.eval(5), 10);
    }

    #[test]
    fn parse_budget() {
        assert_eq!(ExecBudget::parse("n2*4").unwrap(), ExecBudget::quadratic(4));
        assert_eq!(ExecBudget::parse("2n").unwrap().factor, 1);
        assert!(ExecBudget::parse("cubic").is_err());
        assert!(ExecBudget::parse("n2*0").is_err());
        assert_eq!(ExecBudget::quadratic(4).to_string(), "n2*4");
    }

    #[test]
    fn domination() {
        let small = ExecBudget::new(TimeBound::Linear, 1).unwrap();
        let big = ExecBudget::quadratic(4);
        assert!(big.dominates(&small, 100));
        assert!(!small.dominates(&big, 100));
    }
}
