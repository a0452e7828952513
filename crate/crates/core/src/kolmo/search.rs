//! Certified lower bounds and the incompressible-witness search.

use std::collections::HashMap;

use super::{ComplexityTable, GrammarSolver, KolmoError};
use crate::bits::BitString;
use crate::machine::{run, ExecBudget, MachineConfig, Program, ProgramSpace};
use crate::par::Execution;

/// Longest string `find_incompressible` will build.
pub const WITNESS_LEN_CAP: usize = 256;
/// Prefix visits allowed in one depth-first witness search.
pub const SEARCH_NODE_LIMIT: usize = 1 << 16;

/// What an engine can certify about `K_T(target | conditional)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimate {
    /// Certified: no program shorter than this outputs the target in budget.
    pub lower: usize,
    /// A replayed witness, when one was found.
    pub witness: Option<Program>,
}

impl Estimate {
    pub fn value(&self) -> Option<usize> {
        self.witness
            .as_ref()
            .map(Program::len)
            .filter(|&v| v == self.lower)
    }

    /// `Some(true)` if certified `>= bound`, `Some(false)` if a witness
    /// shorter than `bound` exists, `None` if neither is known.
    pub fn at_least(&self, bound: usize) -> Option<bool> {
        if self.lower >= bound {
            Some(true)
        } else if self.witness.as_ref().is_some_and(|w| w.len() < bound) {
            Some(false)
        } else {
            None
        }
    }
}

/// A complexity oracle.
#[derive(Debug)]
pub enum Engine {
    /// Exhaustive enumeration up to the space's cap, with one cached table per
    /// conditional and budget.
    Enumeration {
        space: ProgramSpace,
        exec: Execution,
        tables: HashMap<(BitString, Option<ExecBudget>), ComplexityTable>,
    },
    /// Exact unbounded `K` from the grammar; the canonical witness is replayed
    /// under the budget for the upper side.
    Grammar(GrammarSolver),
}

impl Engine {
    pub fn enumeration(space: ProgramSpace, exec: Execution) -> Self {
        Engine::Enumeration {
            space,
            exec,
            tables: HashMap::new(),
        }
    }

    pub fn grammar(cfg: &MachineConfig) -> Self {
        Engine::Grammar(GrammarSolver::new(cfg))
    }

    pub fn config(&self) -> &MachineConfig {
        match self {
            Engine::Enumeration { space, .. } => space.config(),
            Engine::Grammar(s) => s.config(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Enumeration { .. } => "enumeration",
            Engine::Grammar(_) => "grammar",
        }
    }

    pub fn estimate(
        &mut self,
        target: &BitString,
        conditional: &BitString,
        budget: Option<&ExecBudget>,
    ) -> Estimate {
        match self {
            Engine::Enumeration {
                space,
                exec,
                tables,
            } => {
                let table = tables
                    .entry((conditional.clone(), budget.copied()))
                    .or_insert_with(|| ComplexityTable::build(space, conditional, budget, *exec));
                match table.get(target) {
                    Some(p) => Estimate {
                        lower: p.len(),
                        witness: Some(p.clone()),
                    },
                    None => Estimate {
                        lower: table.cap() + 1,
                        witness: None,
                    },
                }
            }
            Engine::Grammar(solver) => {
                let opt = solver.solve(target, conditional);
                let program = solver.witness(target, conditional);
                let replays = run(&program, conditional, budget).produced(target);
                Estimate {
                    lower: opt.len,
                    witness: replays.then_some(program),
                }
            }
        }
    }
}

/// Depth-first search, in lexicographic order, for the first string of length
/// `len` all of whose nonempty prefixes pass `accept`.
pub fn first_extension<F>(len: usize, mut accept: F) -> Result<Option<BitString>, KolmoError>
where
    F: FnMut(&BitString) -> bool,
{
    let mut visits = 0usize;
    // candidates are checked when popped; children go on in reverse so the
    // 0-branch is explored first
    let mut stack = vec![BitString::new()];
    while let Some(prefix) = stack.pop() {
        if !prefix.is_empty() {
            visits += 1;
            if visits > SEARCH_NODE_LIMIT {
                return Err(KolmoError::SearchLimit {
                    limit: SEARCH_NODE_LIMIT,
                });
            }
            if !accept(&prefix) {
                continue;
            }
        }
        if prefix.len() == len {
            return Ok(Some(prefix));
        }
        for b in [true, false] {
            let mut next = prefix.clone();
            next.push(b);
            stack.push(next);
        }
    }
    Ok(None)
}

/// First `ρ` of length `len`, lexicographically, such that every prefix `δ`
/// has certified `K_T(δ | conditional) >= |δ| − slack`.
pub fn find_incompressible(
    engine: &mut Engine,
    len: usize,
    conditional: &BitString,
    slack: usize,
    budget: Option<&ExecBudget>,
) -> Result<BitString, KolmoError> {
    if len > WITNESS_LEN_CAP {
        return Err(KolmoError::LengthCap {
            len,
            cap: WITNESS_LEN_CAP,
        });
    }
    let found = first_extension(len, |delta| {
        let bound = delta.len().saturating_sub(slack);
        engine.estimate(delta, conditional, budget).at_least(bound) == Some(true)
    })?;
    found.ok_or(KolmoError::NoWitness { len, slack })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileEntry {
    pub n: usize,
    pub estimate: Estimate,
}

/// Complexity of every prefix `x↾n`, `n = 0..=|x|`.
pub fn incompressibility_profile(
    engine: &mut Engine,
    x: &BitString,
    conditional: &BitString,
    budget: Option<&ExecBudget>,
) -> Result<Vec<ProfileEntry>, KolmoError> {
    if x.len() > WITNESS_LEN_CAP {
        return Err(KolmoError::LengthCap {
            len: x.len(),
            cap: WITNESS_LEN_CAP,
        });
    }
    Ok((0..=x.len())
        .map(|n| ProfileEntry {
            n,
            estimate: engine.estimate(&x.slice(0, n), conditional, budget),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    #[test]
    fn first_extension_is_lexicographic() {
        // reject any prefix containing "00"
        let got = first_extension(5, |p| p.find(&bits("00")).is_none()).unwrap();
        assert_eq!(got, Some(bits("01010")));
        let none = first_extension(3, |p| p.len() < 2).unwrap();
        assert_eq!(none, None);
        assert_eq!(first_extension(0, |_| false).unwrap(), Some(bits("")));
    }
}
