use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::gamma::{gamma_len, write_gamma, MAX_ZERO_RUN};
use super::{Decoder, MachineConfig};
use crate::bits::BitString;

/// Programs whose static output exceeds this many bits are rejected by the
/// parser, so a run can never allocate without bound.
pub const MAX_OUTPUT_BITS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at bit {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("code ends before the program is complete")]
    Incomplete,
    #[error("opcode header exceeds the registered maximum {max}")]
    UnknownOpcode { max: usize },
    #[error("{extra} bit(s) left after a complete program")]
    TrailingBits { extra: usize },
    #[error("interleave operands have output lengths {left} and {right}")]
    InterleaveShape { left: usize, right: usize },
    #[error("embedded program output length {n} exceeds m = {m}")]
    DecoderInconsistent { n: usize, m: usize },
    #[error("static output length exceeds {MAX_OUTPUT_BITS} bits")]
    OutputTooLong,
    #[error("gamma code zero run longer than {MAX_ZERO_RUN}")]
    GammaOverflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    Literal(BitString),
    Repeat {
        pattern: BitString,
        times: u64,
    },
    CopyCond {
        len: u64,
        offset: u64,
    },
    Concat(Arc<Node>, Arc<Node>),
    Interleave(Arc<Node>, Arc<Node>),
    InterleaveTail {
        opcode: usize,
        program: Arc<Node>,
        raw: BitString,
    },
    ConditionalInterleave {
        opcode: usize,
        m: u64,
        program: Arc<Node>,
        raw: BitString,
    },
}

/// A parsed operator tree with its statically known sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: Op,
    pub out_len: usize,
    pub code_len: usize,
}

impl Node {
    pub fn opcode(&self) -> usize {
        match &self.op {
            Op::Literal(_) => 1,
            Op::Repeat { .. } => 2,
            Op::CopyCond { .. } => 3,
            Op::Concat(..) => 4,
            Op::Interleave(..) => 5,
            Op::InterleaveTail { opcode, .. } | Op::ConditionalInterleave { opcode, .. } => *opcode,
        }
    }

    /// Number of operator nodes in the tree.
    pub fn node_count(&self) -> usize {
        match &self.op {
            Op::Literal(_) | Op::Repeat { .. } | Op::CopyCond { .. } => 1,
            Op::Concat(a, b) | Op::Interleave(a, b) => 1 + a.node_count() + b.node_count(),
            Op::InterleaveTail { program, .. } | Op::ConditionalInterleave { program, .. } => {
                1 + program.node_count()
            }
        }
    }

    pub fn write_code(&self, out: &mut BitString) {
        write_header(out, self.opcode());
        match &self.op {
            Op::Literal(payload) => {
                write_gamma(out, payload.len() as u64);
                out.extend_from(payload);
            }
            Op::Repeat { pattern, times } => {
                write_gamma(out, pattern.len() as u64);
                write_gamma(out, *times);
                out.extend_from(pattern);
            }
            Op::CopyCond { len, offset } => {
                write_gamma(out, *len);
                write_gamma(out, *offset);
            }
            Op::Concat(a, b) | Op::Interleave(a, b) => {
                a.write_code(out);
                b.write_code(out);
            }
            Op::InterleaveTail { program, raw, .. } => {
                program.write_code(out);
                out.extend_from(raw);
            }
            Op::ConditionalInterleave {
                m, program, raw, ..
            } => {
                write_gamma(out, *m);
                program.write_code(out);
                out.extend_from(raw);
            }
        }
    }

    pub fn code(&self) -> BitString {
        let mut out = BitString::with_capacity(self.code_len);
        self.write_code(&mut out);
        out
    }
}

pub(crate) fn write_header(out: &mut BitString, opcode: usize) {
    for _ in 1..opcode {
        out.push(true);
    }
    out.push(false);
}

/// A valid, self-delimiting machine program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    code: BitString,
    root: Arc<Node>,
}

impl Program {
    pub fn code(&self) -> &BitString {
        &self.code
    }

    pub fn root(&self) -> &Arc<Node> {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Static output length.
    pub fn out_len(&self) -> usize {
        self.root.out_len
    }

    pub(crate) fn from_node(root: Arc<Node>) -> Self {
        Self {
            code: root.code(),
            root,
        }
    }

    pub fn literal(payload: &BitString) -> Self {
        let code_len = 1 + gamma_len(payload.len() as u64) + payload.len();
        Self::from_node(Arc::new(Node {
            op: Op::Literal(payload.clone()),
            out_len: payload.len(),
            code_len,
        }))
    }

    pub fn repeat(pattern: &BitString, times: u64) -> Self {
        let code_len = 2 + gamma_len(pattern.len() as u64) + gamma_len(times) + pattern.len();
        Self::from_node(Arc::new(Node {
            op: Op::Repeat {
                pattern: pattern.clone(),
                times,
            },
            out_len: pattern.len() * times as usize,
            code_len,
        }))
    }

    pub fn copy_cond(len: u64, offset: u64) -> Self {
        Self::from_node(Arc::new(Node {
            op: Op::CopyCond { len, offset },
            out_len: len as usize,
            code_len: 3 + gamma_len(len) + gamma_len(offset),
        }))
    }

    pub fn concat(a: &Program, b: &Program) -> Self {
        Self::from_node(Arc::new(Node {
            op: Op::Concat(a.root.clone(), b.root.clone()),
            out_len: a.out_len() + b.out_len(),
            code_len: 4 + a.len() + b.len(),
        }))
    }

    /// `None` unless the output lengths differ by at most one in `a`'s favour.
    pub fn interleave(a: &Program, b: &Program) -> Option<Self> {
        let (l, r) = (a.out_len(), b.out_len());
        (l == r || l == r + 1).then(|| {
            Self::from_node(Arc::new(Node {
                op: Op::Interleave(a.root.clone(), b.root.clone()),
                out_len: l + r,
                code_len: 5 + a.len() + b.len(),
            }))
        })
    }

    /// Wraps `program` and a raw tail in the interleave-tail decoder. `None`
    /// when the decoder is not registered or the tail has the wrong length.
    pub fn interleave_tail(
        cfg: &MachineConfig,
        program: &Program,
        raw: &BitString,
    ) -> Option<Self> {
        let opcode = cfg.opcode_of(Decoder::InterleaveTail)?;
        (raw.len() == program.out_len()).then(|| {
            Self::from_node(Arc::new(Node {
                op: Op::InterleaveTail {
                    opcode,
                    program: program.root.clone(),
                    raw: raw.clone(),
                },
                out_len: 2 * raw.len(),
                code_len: opcode + program.len() + raw.len(),
            }))
        })
    }

    /// Wraps `program` in the conditional-interleave decoder for block size
    /// `m`; `raw` must hold `2m − n` bits where n is the program's output length.
    pub fn conditional_interleave(
        cfg: &MachineConfig,
        m: u64,
        program: &Program,
        raw: &BitString,
    ) -> Option<Self> {
        let opcode = cfg.opcode_of(Decoder::ConditionalInterleave)?;
        let n = program.out_len() as u64;
        (n <= m && raw.len() as u64 == 2 * m - n).then(|| {
            Self::from_node(Arc::new(Node {
                op: Op::ConditionalInterleave {
                    opcode,
                    m,
                    program: program.root.clone(),
                    raw: raw.clone(),
                },
                out_len: 2 * m as usize,
                code_len: opcode + gamma_len(m) + program.len() + raw.len(),
            }))
        })
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)
    }
}

struct Reader<'a> {
    code: &'a BitString,
    pos: usize,
}

impl Reader<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn bit(&mut self) -> Result<bool, ParseError> {
        let b = self
            .code
            .get(self.pos)
            .ok_or_else(|| self.err(ParseErrorKind::Incomplete))?;
        self.pos += 1;
        Ok(b)
    }

    fn raw(&mut self, n: usize) -> Result<BitString, ParseError> {
        if self.pos + n > self.code.len() {
            self.pos = self.code.len();
            return Err(self.err(ParseErrorKind::Incomplete));
        }
        let out = self.code.slice(self.pos, self.pos + n);
        self.pos += n;
        Ok(out)
    }

    fn gamma(&mut self) -> Result<u64, ParseError> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros > MAX_ZERO_RUN {
                return Err(self.err(ParseErrorKind::GammaOverflow));
            }
        }
        let mut n = 1u64;
        for _ in 0..zeros {
            n = (n << 1) | self.bit()? as u64;
        }
        Ok(n - 1)
    }

    fn header(&mut self, max: usize) -> Result<usize, ParseError> {
        let mut k = 1;
        while self.bit()? {
            k += 1;
            if k > max {
                return Err(self.err(ParseErrorKind::UnknownOpcode { max }));
            }
        }
        Ok(k)
    }

    fn node(&mut self, cfg: &MachineConfig) -> Result<Arc<Node>, ParseError> {
        let start = self.pos;
        let opcode = self.header(cfg.max_opcode())?;
        let (op, out_len) = match opcode {
            1 => {
                let len = self.len_field()?;
                (Op::Literal(self.raw(len)?), len)
            }
            2 => {
                let len = self.len_field()?;
                let times = self.gamma()?;
                let out = (len as u64)
                    .checked_mul(times)
                    .filter(|&o| o <= MAX_OUTPUT_BITS as u64)
                    .ok_or_else(|| self.err(ParseErrorKind::OutputTooLong))?;
                (
                    Op::Repeat {
                        pattern: self.raw(len)?,
                        times,
                    },
                    out as usize,
                )
            }
            3 => {
                let len = self.len_field()?;
                let offset = self.gamma()?;
                (
                    Op::CopyCond {
                        len: len as u64,
                        offset,
                    },
                    len,
                )
            }
            4 | 5 => {
                let a = self.node(cfg)?;
                let b = self.node(cfg)?;
                let out = a.out_len + b.out_len;
                if out > MAX_OUTPUT_BITS {
                    return Err(self.err(ParseErrorKind::OutputTooLong));
                }
                if opcode == 4 {
                    (Op::Concat(a, b), out)
                } else {
                    if a.out_len != b.out_len && a.out_len != b.out_len + 1 {
                        return Err(self.err(ParseErrorKind::InterleaveShape {
                            left: a.out_len,
                            right: b.out_len,
                        }));
                    }
                    (Op::Interleave(a, b), out)
                }
            }
            k => match cfg.decoder_at(k) {
                Some(Decoder::InterleaveTail) => {
                    let program = self.node(cfg)?;
                    let n = program.out_len;
                    if 2 * n > MAX_OUTPUT_BITS {
                        return Err(self.err(ParseErrorKind::OutputTooLong));
                    }
                    let raw = self.raw(n)?;
                    (
                        Op::InterleaveTail {
                            opcode: k,
                            program,
                            raw,
                        },
                        2 * n,
                    )
                }
                Some(Decoder::ConditionalInterleave) => {
                    let m = self.len_field()?;
                    if 2 * m > MAX_OUTPUT_BITS {
                        return Err(self.err(ParseErrorKind::OutputTooLong));
                    }
                    let program = self.node(cfg)?;
                    let n = program.out_len;
                    if n > m {
                        return Err(self.err(ParseErrorKind::DecoderInconsistent { n, m }));
                    }
                    let raw = self.raw(2 * m - n)?;
                    (
                        Op::ConditionalInterleave {
                            opcode: k,
                            m: m as u64,
                            program,
                            raw,
                        },
                        2 * m,
                    )
                }
                None => unreachable!("header() bounds the opcode by the registry"),
            },
        };
        Ok(Arc::new(Node {
            op,
            out_len,
            code_len: self.pos - start,
        }))
    }

    fn len_field(&mut self) -> Result<usize, ParseError> {
        let v = self.gamma()?;
        if v > MAX_OUTPUT_BITS as u64 {
            return Err(self.err(ParseErrorKind::OutputTooLong));
        }
        Ok(v as usize)
    }
}

/// Parses a complete program; the whole code must be consumed.
pub fn parse_program(cfg: &MachineConfig, code: &BitString) -> Result<Program, ParseError> {
    let mut reader = Reader { code, pos: 0 };
    let root = reader.node(cfg)?;
    if reader.pos != code.len() {
        return Err(ParseError {
            position: reader.pos,
            kind: ParseErrorKind::TrailingBits {
                extra: code.len() - reader.pos,
            },
        });
    }
    Ok(Program {
        code: code.clone(),
        root,
    })
}

/// Parses one program from the front of `code`, returning it and the number
/// of bits consumed.
pub fn parse_prefix(cfg: &MachineConfig, code: &BitString) -> Result<(Program, usize), ParseError> {
    let mut reader = Reader { code, pos: 0 };
    let root = reader.node(cfg)?;
    let used = reader.pos;
    Ok((
        Program {
            code: code.slice(0, used),
            root,
        },
        used,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    fn cfg() -> MachineConfig {
        MachineConfig::default()
    }

    #[test]
    fn literal_one() {
        // header "0", gamma(1) = "010", payload "1"
        let p = parse_program(&cfg(), &bits("00101")).unwrap();
        assert_eq!(p.root().op, Op::Literal(bits("1")));
        assert_eq!(p, Program::literal(&bits("1")));
        assert_eq!(Program::literal(&bits("")).code(), &bits("01"));
    }

    #[test]
    fn empty_and_trailing() {
        let e = parse_program(&cfg(), &bits("")).unwrap_err();
        assert_eq!(
            e,
            ParseError {
                position: 0,
                kind: ParseErrorKind::Incomplete
            }
        );
        let e = parse_program(&cfg(), &bits("001010")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TrailingBits { extra: 1 });
        assert_eq!(e.position, 5);
    }

    #[test]
    fn unknown_opcode() {
        let e = parse_program(&MachineConfig::builtin(), &bits("111110")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownOpcode { max: 5 });
        assert!(parse_program(&cfg(), &bits("1111111")).is_err());
    }

    #[test]
    fn constructors_round_trip_through_parser() {
        let c = cfg();
        let lit = Program::literal(&bits("10"));
        let progs = vec![
            lit.clone(),
            Program::repeat(&bits("01"), 3),
            Program::copy_cond(2, 5),
            Program::concat(&lit, &Program::copy_cond(1, 0)),
            Program::interleave(&lit, &Program::literal(&bits("1"))).unwrap(),
            Program::interleave_tail(&c, &lit, &bits("01")).unwrap(),
            Program::conditional_interleave(&c, 3, &Program::copy_cond(2, 0), &bits("1100"))
                .unwrap(),
        ];
        for p in progs {
            let parsed = parse_program(&c, p.code()).unwrap();
            assert_eq!(parsed, p);
            assert_eq!(p.root().code_len, p.len());
        }
        assert!(Program::interleave(&Program::literal(&bits("1")), &lit).is_none());
        assert!(Program::interleave_tail(&MachineConfig::builtin(), &lit, &bits("01")).is_none());
        assert!(Program::conditional_interleave(&c, 1, &lit, &bits("")).is_none());
    }

    #[test]
    fn interleave_shape_is_a_parse_error() {
        let mut code = BitString::new();
        write_header(&mut code, 5);
        code.extend_from(Program::literal(&bits("1")).code());
        code.extend_from(Program::literal(&bits("101")).code());
        let e = parse_program(&cfg(), &code).unwrap_err();
        assert_eq!(
            e.kind,
            ParseErrorKind::InterleaveShape { left: 1, right: 3 }
        );
    }

    #[test]
    fn decoder_inconsistency() {
        let mut code = BitString::new();
        write_header(&mut code, 7);
        write_gamma(&mut code, 1);
        code.extend_from(Program::literal(&bits("11")).code());
        let e = parse_program(&cfg(), &code).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DecoderInconsistent { n: 2, m: 1 });
    }

    #[test]
    fn huge_repeat_is_rejected() {
        let mut code = BitString::new();
        write_header(&mut code, 2);
        write_gamma(&mut code, 1);
        write_gamma(&mut code, 1 << 40);
        code.push(true);
        assert_eq!(
            parse_program(&cfg(), &code).unwrap_err().kind,
            ParseErrorKind::OutputTooLong
        );
    }
}
