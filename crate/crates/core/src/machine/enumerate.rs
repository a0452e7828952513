use std::sync::Arc;

use super::gamma::{gamma_len, values_with_gamma_len};
use super::program::{Node, Op, Program, MAX_OUTPUT_BITS};
use super::{Decoder, MachineConfig, MachineError};
use crate::bits::BitString;
use crate::capital::Capital;

/// Longest code length the enumerator will build.
pub const ENUMERATION_CAP: usize = 20;

/// Every valid program of length `<= max_len`, grouped by exact length and
/// sorted lexicographically within each length.
///
/// Built structurally from the grammar rather than by filtering all strings,
/// so it can be checked against a brute-force parse of `{0,1}^{≤L}`.
#[derive(Debug, Clone)]
pub struct ProgramSpace {
    cfg: MachineConfig,
    by_len: Vec<Vec<Program>>,
}

impl ProgramSpace {
    pub fn build(cfg: &MachineConfig, max_len: usize) -> Result<Self, MachineError> {
        if max_len > ENUMERATION_CAP {
            return Err(MachineError::CapExceeded {
                requested: max_len,
                cap: ENUMERATION_CAP,
            });
        }
        let mut by_len: Vec<Vec<Program>> = Vec::with_capacity(max_len + 1);
        for n in 0..=max_len {
            let mut level = programs_of_len(cfg, n, &by_len);
            level.sort_by(|a, b| a.code().cmp(b.code()));
            by_len.push(level);
        }
        Ok(Self {
            cfg: cfg.clone(),
            by_len,
        })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    pub fn max_len(&self) -> usize {
        self.by_len.len().saturating_sub(1)
    }

    pub fn of_len(&self, n: usize) -> &[Program] {
        self.by_len.get(n).map_or(&[], Vec::as_slice)
    }

    /// Length-then-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &Program> {
        self.by_len.iter().flatten()
    }

    pub fn count(&self) -> usize {
        self.by_len.iter().map(Vec::len).sum()
    }

    pub fn kraft_sum(&self) -> Capital {
        kraft_sum_of(self.iter().map(Program::len))
    }
}

/// `Σ 2^{-len}` over the given code lengths, exact.
pub fn kraft_sum_of(lens: impl IntoIterator<Item = usize>) -> Capital {
    lens.into_iter().map(|l| Capital::pow2(-(l as i64))).sum()
}

/// Every valid code of length `<= max_code_len`, in length-then-lexicographic
/// order.
pub fn enumerate_programs(
    cfg: &MachineConfig,
    max_code_len: usize,
) -> Result<Vec<Program>, MachineError> {
    Ok(ProgramSpace::build(cfg, max_code_len)?
        .iter()
        .cloned()
        .collect())
}

fn node(op: Op, out_len: usize, code_len: usize) -> Program {
    Program::from_node(Arc::new(Node {
        op,
        out_len,
        code_len,
    }))
}

fn programs_of_len(cfg: &MachineConfig, n: usize, shorter: &[Vec<Program>]) -> Vec<Program> {
    let mut out = Vec::new();
    // LITERAL: 1 + γ(ℓ) + ℓ
    for len in 0..n {
        if 1 + gamma_len(len as u64) + len == n {
            for payload in BitString::all_of_len(len) {
                out.push(node(Op::Literal(payload), len, n));
            }
        }
    }
    // REPEAT: 2 + γ(ℓ) + γ(r) + ℓ
    for len in 0..n {
        let used = 2 + gamma_len(len as u64) + len;
        if used >= n {
            continue;
        }
        for times in values_with_gamma_len(n - used) {
            let Some(out_len) = (len as u64)
                .checked_mul(times)
                .filter(|&o| o <= MAX_OUTPUT_BITS as u64)
            else {
                continue;
            };
            for pattern in BitString::all_of_len(len) {
                out.push(node(Op::Repeat { pattern, times }, out_len as usize, n));
            }
        }
    }
    // COPY-COND: 3 + γ(ℓ) + γ(off)
    for len_code in (1..n.saturating_sub(3)).step_by(2) {
        for len in values_with_gamma_len(len_code) {
            if len > MAX_OUTPUT_BITS as u64 {
                continue;
            }
            for offset in values_with_gamma_len(n - 3 - len_code) {
                out.push(node(Op::CopyCond { len, offset }, len as usize, n));
            }
        }
    }
    // CONCAT / INTERLEAVE: k + |p| + |q|
    for (opcode, interleaving) in [(4usize, false), (5, true)] {
        if n < opcode + 4 {
            continue;
        }
        for i in 2..=n - opcode - 2 {
            let j = n - opcode - i;
            for a in &shorter[i] {
                for b in &shorter[j] {
                    let (l, r) = (a.out_len(), b.out_len());
                    if l + r > MAX_OUTPUT_BITS || (interleaving && l != r && l != r + 1) {
                        continue;
                    }
                    let op = if interleaving {
                        Op::Interleave(a.root().clone(), b.root().clone())
                    } else {
                        Op::Concat(a.root().clone(), b.root().clone())
                    };
                    out.push(node(op, l + r, n));
                }
            }
        }
    }
    for (idx, decoder) in cfg.decoders().iter().enumerate() {
        let opcode = super::FIRST_DECODER_OPCODE + idx;
        match decoder {
            Decoder::InterleaveTail => {
                // k + |p| + out(p)
                for (i, bucket) in shorter
                    .iter()
                    .enumerate()
                    .take(n.saturating_sub(opcode) + 1)
                    .skip(2)
                {
                    for p in bucket {
                        if opcode + i + p.out_len() != n || 2 * p.out_len() > MAX_OUTPUT_BITS {
                            continue;
                        }
                        for raw in BitString::all_of_len(p.out_len()) {
                            let op = Op::InterleaveTail {
                                opcode,
                                program: p.root().clone(),
                                raw,
                            };
                            out.push(node(op, 2 * p.out_len(), n));
                        }
                    }
                }
            }
            Decoder::ConditionalInterleave => {
                // k + γ(m) + |p| + (2m − out(p)), out(p) <= m
                for m in 0u64.. {
                    let head = opcode + gamma_len(m);
                    if head + 2 + m as usize > n {
                        break;
                    }
                    for (i, bucket) in shorter.iter().enumerate().take(n - head + 1).skip(2) {
                        for p in bucket {
                            let out_p = p.out_len() as u64;
                            if out_p > m || head + i + (2 * m - out_p) as usize != n {
                                continue;
                            }
                            for raw in BitString::all_of_len((2 * m - out_p) as usize) {
                                let op = Op::ConditionalInterleave {
                                    opcode,
                                    m,
                                    program: p.root().clone(),
                                    raw,
                                };
                                out.push(node(op, 2 * m as usize, n));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
