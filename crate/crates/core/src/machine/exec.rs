use serde::Serialize;

use super::program::{parse_program, Node, Op, Program};
use super::{ExecBudget, MachineConfig, ParseError};
use crate::bits::{interleave, BitString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Halted,
    BudgetExceeded,
    ParseError,
    OracleOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub status: Status,
    pub output: Option<BitString>,
    pub steps_used: u64,
    pub parse_error: Option<ParseError>,
}

impl ExecOutcome {
    pub fn halted(&self) -> bool {
        self.status == Status::Halted
    }

    /// The output when the run halted and produced `target`.
    pub fn produced(&self, target: &BitString) -> bool {
        self.halted() && self.output.as_ref() == Some(target)
    }
}

enum Abort {
    Budget,
    Oracle,
}

/// Step accounting: 1 per parsed code bit (charged up front), 1 per operator
/// dispatch, 1 per emitted bit at every node, 1 per conditional bit read.
struct Meter {
    steps: u64,
    ceiling: u64,
    /// Ranges `[start, end)` of the machine's conditional tape that were read.
    reads: Vec<(usize, usize)>,
}

impl Meter {
    fn charge(&mut self, n: u64) -> Result<(), Abort> {
        self.steps = self.steps.saturating_add(n);
        if self.steps > self.ceiling {
            Err(Abort::Budget)
        } else {
            Ok(())
        }
    }
}

/// `outer` is false inside a conditional-interleave decoder, whose program
/// reads the decoder's own tail rather than the machine tape.
fn exec(node: &Node, cond: &BitString, outer: bool, meter: &mut Meter) -> Result<BitString, Abort> {
    meter.charge(1)?;
    let out = match &node.op {
        Op::Literal(payload) => {
            meter.charge(payload.len() as u64)?;
            payload.clone()
        }
        Op::Repeat { pattern, times } => {
            meter.charge(node.out_len as u64)?;
            let mut out = BitString::with_capacity(node.out_len);
            for _ in 0..*times {
                out.extend_from(pattern);
            }
            out
        }
        Op::CopyCond { len, offset } => {
            let (len, offset) = (*len as usize, *offset as usize);
            let slice = cond.substring(offset, len).map_err(|_| Abort::Oracle)?;
            meter.charge(2 * len as u64)?;
            if outer && len > 0 {
                meter.reads.push((offset, offset + len));
            }
            slice
        }
        Op::Concat(a, b) => {
            let left = exec(a, cond, outer, meter)?;
            let right = exec(b, cond, outer, meter)?;
            meter.charge(node.out_len as u64)?;
            left.concat(&right)
        }
        Op::Interleave(a, b) => {
            let left = exec(a, cond, outer, meter)?;
            let right = exec(b, cond, outer, meter)?;
            meter.charge(node.out_len as u64)?;
            interleave(&left, &right).expect("parser checked interleave shape")
        }
        Op::InterleaveTail { program, raw, .. } => {
            let inner = exec(program, cond, outer, meter)?;
            meter.charge(node.out_len as u64)?;
            interleave(raw, &inner).expect("raw tail length equals program output length")
        }
        Op::ConditionalInterleave {
            m, program, raw, ..
        } => {
            let m = *m as usize;
            let own = raw.slice(0, m);
            let head = exec(program, &own, false, meter)?;
            meter.charge(node.out_len as u64)?;
            let a_part = head.concat(&raw.slice(m, raw.len()));
            interleave(&a_part, &own).expect("both halves have length m")
        }
    };
    debug_assert_eq!(out.len(), node.out_len);
    Ok(out)
}

/// Runs `p` against `conditional`. With a budget, the run is cut off at
/// `c·(t(|output|) + 1)` steps, where the output length is known from the code;
/// without one it runs to completion (every program is total).
pub fn run(p: &Program, conditional: &BitString, budget: Option<&ExecBudget>) -> ExecOutcome {
    run_traced(p, conditional, budget).0
}

/// [`run`], also returning the conditional-tape positions read, ascending.
pub fn run_traced(
    p: &Program,
    conditional: &BitString,
    budget: Option<&ExecBudget>,
) -> (ExecOutcome, Vec<usize>) {
    let ceiling = budget.map_or(u64::MAX, |b| b.limit(p.out_len() as u64));
    let mut meter = Meter {
        steps: 0,
        ceiling,
        reads: Vec::new(),
    };
    let result = meter
        .charge(p.len() as u64)
        .and_then(|_| exec(p.root(), conditional, true, &mut meter));
    let (status, output) = match result {
        Ok(out) => (Status::Halted, Some(out)),
        Err(Abort::Budget) => (Status::BudgetExceeded, None),
        Err(Abort::Oracle) => (Status::OracleOutOfRange, None),
    };
    let mut reads: Vec<usize> = meter.reads.iter().flat_map(|&(a, b)| a..b).collect();
    reads.sort_unstable();
    reads.dedup();
    (
        ExecOutcome {
            status,
            output,
            steps_used: meter.steps,
            parse_error: None,
        },
        reads,
    )
}

/// Parses and runs a raw code.
pub fn run_code(
    cfg: &MachineConfig,
    code: &BitString,
    conditional: &BitString,
    budget: Option<&ExecBudget>,
) -> ExecOutcome {
    match parse_program(cfg, code) {
        Ok(p) => run(&p, conditional, budget),
        Err(e) => ExecOutcome {
            status: Status::ParseError,
            output: None,
            steps_used: 0,
            parse_error: Some(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::machine::TimeBound;

    fn generous() -> ExecBudget {
        ExecBudget::quadratic(64)
    }

    #[test]
    fn literal_runs() {
        let p = Program::literal(&bits("1"));
        for cond in [bits(""), bits("0101")] {
            let out = run(&p, &cond, Some(&generous()));
            assert_eq!(out.status, Status::Halted);
            assert_eq!(out.output, Some(bits("1")));
            // 5 parsed + 1 dispatch + 1 emitted
            assert_eq!(out.steps_used, 7);
        }
    }

    #[test]
    fn copy_cond_runs() {
        let p = Program::copy_cond(2, 0);
        let out = run(&p, &bits("10"), Some(&generous()));
        assert_eq!(out.output, Some(bits("10")));
        let q = Program::copy_cond(3, 0);
        assert_eq!(
            run(&q, &bits("10"), Some(&generous())).status,
            Status::OracleOutOfRange
        );
        assert_eq!(
            run(&Program::copy_cond(1, 1), &bits("10"), None).output,
            Some(bits("0"))
        );
    }

    #[test]
    fn composite_operators() {
        let a = Program::literal(&bits("00"));
        let b = Program::copy_cond(2, 1);
        let cond = bits("0110");
        assert_eq!(
            run(&Program::concat(&a, &b), &cond, None).output,
            Some(bits("0011"))
        );
        assert_eq!(
            run(&Program::interleave(&a, &b).unwrap(), &cond, None).output,
            Some(bits("0101"))
        );
        assert_eq!(
            run(&Program::repeat(&bits("10"), 3), &cond, None).output,
            Some(bits("101010"))
        );
        let cfg = MachineConfig::default();
        let tail = Program::interleave_tail(&cfg, &b, &bits("10")).unwrap();
        assert_eq!(run(&tail, &cond, None).output, Some(bits("1101")));
        // own conditional is "101"; program copies "10" from it; A = "10" ++ "0"
        let ci = Program::conditional_interleave(&cfg, 3, &Program::copy_cond(2, 0), &bits("1010"))
            .unwrap();
        assert_eq!(run(&ci, &bits(""), None).output, Some(bits("110001")));
    }

    #[test]
    fn budget_is_checked_against_output_length() {
        let p = Program::literal(&bits("1"));
        let tight = ExecBudget::new(TimeBound::Linear, 1).unwrap();
        let out = run(&p, &bits(""), Some(&tight));
        assert_eq!(out.status, Status::BudgetExceeded);
        let fits = ExecBudget::new(TimeBound::Linear, 4).unwrap();
        assert!(run(&p, &bits(""), Some(&fits)).halted());
    }

    #[test]
    fn reads_are_traced_on_the_machine_tape_only() {
        let cfg = MachineConfig::default();
        let p = Program::concat(&Program::copy_cond(2, 3), &Program::copy_cond(1, 0));
        let (out, reads) = run_traced(&p, &bits("011010"), None);
        assert_eq!(out.output, Some(bits("010")));
        assert_eq!(reads, vec![0, 3, 4]);
        let ci = Program::conditional_interleave(&cfg, 2, &Program::copy_cond(1, 0), &bits("101"))
            .unwrap();
        assert_eq!(run_traced(&ci, &bits("1111"), None).1, Vec::<usize>::new());
    }

    #[test]
    fn run_code_reports_parse_errors() {
        let out = run_code(&MachineConfig::default(), &bits("0010"), &bits(""), None);
        assert_eq!(out.status, Status::ParseError);
        assert!(out.parse_error.is_some());
    }
}
