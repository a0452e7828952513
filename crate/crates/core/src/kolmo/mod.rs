//! Plain, conditional and time-bounded complexity on the reference machine.
//!
//! Two engines answer the same questions. [`complexity`] enumerates every code
//! up to a cap and is the ground truth at small scale. [`GrammarSolver`]
//! computes unbounded `K(x | c)` exactly for long targets; since a time bound
//! only removes witnesses, its value is also a lower bound on `K_T`.

mod grammar;
mod search;

use std::collections::HashMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::BitString;
use crate::machine::{run, ExecBudget, MachineError, Program, ProgramSpace};
use crate::par::{self, Execution};

pub use grammar::{GrammarSolver, Optimum};
pub use search::{
    find_incompressible, first_extension, incompressibility_profile, Engine, Estimate,
    ProfileEntry, SEARCH_NODE_LIMIT, WITNESS_LEN_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KolmoError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("no string of length {len} is incompressible at slack {slack}")]
    NoWitness { len: usize, slack: usize },
    #[error("witness search visited more than {limit} prefixes")]
    SearchLimit { limit: usize },
    #[error("length {len} exceeds the cap {cap}")]
    LengthCap { len: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityQuery {
    pub target: BitString,
    pub conditional: BitString,
    /// `None` is unbounded.
    pub budget: Option<ExecBudget>,
    pub search_cap: usize,
}

impl ComplexityQuery {
    pub fn plain(target: BitString, search_cap: usize) -> Self {
        Self {
            target,
            conditional: BitString::new(),
            budget: None,
            search_cap,
        }
    }

    pub fn given(mut self, conditional: BitString) -> Self {
        self.conditional = conditional;
        self
    }

    pub fn within(mut self, budget: ExecBudget) -> Self {
        self.budget = Some(budget);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityReport {
    pub value: Option<usize>,
    pub witness: Option<Program>,
    /// Every code of length `<= search_cap` was tried.
    pub exhaustive: bool,
}

/// Shortest program in `space` that outputs the target; ties go to the
/// lexicographically smallest code.
pub fn complexity(
    space: &ProgramSpace,
    q: &ComplexityQuery,
    exec: Execution,
) -> Result<ComplexityReport, KolmoError> {
    if q.search_cap > space.max_len() {
        return Err(MachineError::CapExceeded {
            requested: q.search_cap,
            cap: space.max_len(),
        }
        .into());
    }
    for n in 0..=q.search_cap {
        let found = par::find_first(exec, space.of_len(n), |p| {
            (p.out_len() == q.target.len()
                && run(p, &q.conditional, q.budget.as_ref()).produced(&q.target))
            .then(|| p.clone())
        });
        if let Some(p) = found {
            return Ok(ComplexityReport {
                value: Some(n),
                witness: Some(p),
                exhaustive: true,
            });
        }
    }
    Ok(ComplexityReport {
        value: None,
        witness: None,
        exhaustive: true,
    })
}

/// Shortest witness for every output reachable in a program space under one
/// conditional and budget.
#[derive(Debug, Clone)]
pub struct ComplexityTable {
    cap: usize,
    best: HashMap<BitString, Program>,
}

impl ComplexityTable {
    pub fn build(
        space: &ProgramSpace,
        conditional: &BitString,
        budget: Option<&ExecBudget>,
        exec: Execution,
    ) -> Self {
        let programs: Vec<&Program> = space.iter().collect();
        let outputs = par::map(exec, &programs, |p| run(p, conditional, budget).output);
        let mut best = HashMap::new();
        // programs arrive in length-then-lexicographic order, so the first hit wins
        for (p, out) in programs.into_iter().zip(outputs) {
            if let Some(out) = out {
                best.entry(out).or_insert_with(|| p.clone());
            }
        }
        Self {
            cap: space.max_len(),
            best,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn get(&self, target: &BitString) -> Option<&Program> {
        self.best.get(target)
    }

    pub fn value(&self, target: &BitString) -> Option<usize> {
        self.get(target).map(Program::len)
    }

    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }
}

/// Short hex digest naming a conditional in tables.
pub fn conditional_digest(conditional: &BitString) -> String {
    let digest = Sha256::digest(conditional.to_string().as_bytes());
    hex::encode(&digest[..8])
}

/// One CSV row of a complexity table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityRow {
    pub target: String,
    pub conditional_digest: String,
    pub budget_name: String,
    pub value: Option<usize>,
    pub witness_code: Option<String>,
    pub exhaustive: bool,
}

impl ComplexityRow {
    pub fn new(q: &ComplexityQuery, r: &ComplexityReport) -> Self {
        Self {
            target: q.target.to_string(),
            conditional_digest: conditional_digest(&q.conditional),
            budget_name: q
                .budget
                .map_or_else(|| "unbounded".to_string(), |b| b.to_string()),
            value: r.value,
            witness_code: r.witness.as_ref().map(|p| p.code().to_string()),
            exhaustive: r.exhaustive,
        }
    }
}
