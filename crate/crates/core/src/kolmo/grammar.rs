//! Exact plain complexity by dynamic programming over the program grammar.
//!
//! Every program is an operator applied to sub-programs whose outputs are
//! determined by the target, so `K(x | c)` is a minimum over a finite set of
//! decompositions. The solver returns the same witness the enumerator would
//! (shortest, then lexicographically smallest code) and scales to targets far
//! past the enumeration cap.

use std::collections::HashMap;

use crate::bits::BitString;
use crate::machine::gamma::{gamma_len, write_gamma};
use crate::machine::{parse_program, Decoder, MachineConfig, Program};

/// Shortest code for one `(target, conditional)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub len: usize,
    pub code: BitString,
}

impl Optimum {
    fn better_than(&self, other: &Optimum) -> bool {
        (self.len, &self.code) < (other.len, &other.code)
    }
}

fn header(opcode: usize) -> BitString {
    let mut out = BitString::with_capacity(opcode);
    for _ in 1..opcode {
        out.push(true);
    }
    out.push(false);
    out
}

#[derive(Debug)]
pub struct GrammarSolver {
    cfg: MachineConfig,
    tail_opcode: Option<usize>,
    cond_opcode: Option<usize>,
    conds: HashMap<BitString, u32>,
    cond_list: Vec<BitString>,
    memo: HashMap<(BitString, u32), Optimum>,
}

impl GrammarSolver {
    pub fn new(cfg: &MachineConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            tail_opcode: cfg.opcode_of(Decoder::InterleaveTail),
            cond_opcode: cfg.opcode_of(Decoder::ConditionalInterleave),
            conds: HashMap::new(),
            cond_list: Vec::new(),
            memo: HashMap::new(),
        }
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    /// Number of memoised subproblems.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// `K(target | conditional)` with no time bound, and its canonical witness.
    pub fn solve(&mut self, target: &BitString, conditional: &BitString) -> Optimum {
        let cid = self.intern(conditional);
        self.solve_in(target, cid)
    }

    pub fn witness(&mut self, target: &BitString, conditional: &BitString) -> Program {
        let opt = self.solve(target, conditional);
        parse_program(&self.cfg, &opt.code).expect("solver emits valid codes")
    }

    fn intern(&mut self, cond: &BitString) -> u32 {
        if let Some(&id) = self.conds.get(cond) {
            return id;
        }
        let id = self.cond_list.len() as u32;
        self.conds.insert(cond.clone(), id);
        self.cond_list.push(cond.clone());
        id
    }

    fn solve_in(&mut self, x: &BitString, cid: u32) -> Optimum {
        if let Some(hit) = self.memo.get(&(x.clone(), cid)) {
            return hit.clone();
        }
        let n = x.len();
        let mut best = literal(x);
        let offer = |cand: Optimum, best: &mut Optimum| {
            if cand.better_than(best) {
                *best = cand;
            }
        };

        // REPEAT: period ℓ dividing n, at least two copies
        for l in 1..=n / 2 {
            if !n.is_multiple_of(l) {
                continue;
            }
            let r = (n / l) as u64;
            let len = 2 + gamma_len(l as u64) + gamma_len(r) + l;
            if len > best.len || !(l..n).all(|i| x.bit(i) == x.bit(i - l)) {
                continue;
            }
            let mut code = header(2);
            write_gamma(&mut code, l as u64);
            write_gamma(&mut code, r);
            code.extend_from(&x.slice(0, l));
            offer(Optimum { len, code }, &mut best);
        }

        // COPY-COND: the leftmost occurrence has the shortest offset code
        if n > 0 {
            if let Some(off) = self.cond_list[cid as usize].find(x) {
                let len = 3 + gamma_len(n as u64) + gamma_len(off as u64);
                let mut code = header(3);
                write_gamma(&mut code, n as u64);
                write_gamma(&mut code, off as u64);
                offer(Optimum { len, code }, &mut best);
            }
        }

        if n >= 2 {
            // CONCAT: empty halves never help
            for i in 1..n {
                let a = self.solve_in(&x.slice(0, i), cid);
                let b = self.solve_in(&x.slice(i, n), cid);
                offer(join(4, &[&a, &b]), &mut best);
            }
            let (even, odd) = x.deinterleave();
            let a = self.solve_in(&even, cid);
            let b = self.solve_in(&odd, cid);
            offer(join(5, &[&a, &b]), &mut best);

            if n.is_multiple_of(2) {
                if let Some(op) = self.tail_opcode {
                    let mut cand = join(op, &[&b]);
                    cand.code.extend_from(&even);
                    cand.len += even.len();
                    offer(cand, &mut best);
                }
                if let Some(op) = self.cond_opcode {
                    let m = n / 2;
                    let own = self.intern(&odd);
                    let fixed = op + gamma_len(m as u64);
                    for k in (0..=m).rev() {
                        // the inner program costs at least two bits
                        if fixed + 2 + 2 * m - k > best.len {
                            break;
                        }
                        let inner = self.solve_in(&even.slice(0, k), own);
                        let len = fixed + inner.len + 2 * m - k;
                        if len > best.len {
                            continue;
                        }
                        let mut code = header(op);
                        write_gamma(&mut code, m as u64);
                        code.extend_from(&inner.code);
                        code.extend_from(&odd);
                        code.extend_from(&even.slice(k, m));
                        offer(Optimum { len, code }, &mut best);
                    }
                }
            }
        }

        self.memo.insert((x.clone(), cid), best.clone());
        best
    }
}

fn literal(x: &BitString) -> Optimum {
    let mut code = header(1);
    write_gamma(&mut code, x.len() as u64);
    code.extend_from(x);
    Optimum {
        len: code.len(),
        code,
    }
}

fn join(opcode: usize, parts: &[&Optimum]) -> Optimum {
    let mut code = header(opcode);
    for p in parts {
        code.extend_from(&p.code);
    }
    Optimum {
        len: code.len(),
        code,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::machine::run;

    #[test]
    fn small_values() {
        let mut s = GrammarSolver::new(&MachineConfig::default());
        assert_eq!(s.solve(&bits(""), &bits("")).code, bits("01"));
        assert_eq!(s.solve(&bits("1"), &bits("")).code, bits("00101"));
        // REPEAT("0", 32) beats a 32-bit literal
        let zeros = BitString::zeros(32);
        let opt = s.solve(&zeros, &bits(""));
        assert!(opt.len < 20, "{}", opt.len);
        let p = s.witness(&zeros, &bits(""));
        assert_eq!(run(&p, &bits(""), None).output, Some(zeros));
    }

    #[test]
    fn copy_from_conditional() {
        let mut s = GrammarSolver::new(&MachineConfig::default());
        let cond = bits("0110100110010110");
        let x = cond.slice(3, 15);
        let opt = s.solve(&x, &cond);
        assert!(opt.len <= 3 + gamma_len(12) + gamma_len(3));
        let p = s.witness(&x, &cond);
        assert_eq!(run(&p, &cond, None).output, Some(x));
    }
}
