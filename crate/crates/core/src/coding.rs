//! Bounded request sets, the online prefix-code allocator, and the two
//! decoder code shapes `Q_n` and `Q_{m,n}`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::capital::Capital;
use crate::machine::{
    kraft_sum_of, parse_prefix, run, Decoder, ExecBudget, MachineConfig, ParseError,
    ParseErrorKind, Program, ProgramSpace, Status,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("request set is not bounded: Kraft sum {0}")]
    Unbounded(Capital),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("precondition violated: n = {n} exceeds m = {m}")]
    Precondition { n: usize, m: usize },
    #[error("decoded program output length {n} exceeds m = {m}")]
    Inconsistent { n: usize, m: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("decoder ran out of budget")]
    BudgetExceeded,
    #[error("decoder {0:?} is not registered in this machine")]
    DecoderMissing(Decoder),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Request {
    pub target: BitString,
    pub len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RequestSet {
    pub requests: Vec<Request>,
}

impl RequestSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lengths(lens: &[usize]) -> Self {
        Self {
            requests: lens
                .iter()
                .map(|&len| Request {
                    target: BitString::new(),
                    len,
                })
                .collect(),
        }
    }

    pub fn push(&mut self, target: BitString, len: usize) {
        self.requests.push(Request { target, len });
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        kraft_sum(self) <= Capital::one()
    }
}

/// Exact `Σ 2^{-len}`.
pub fn kraft_sum(r: &RequestSet) -> Capital {
    kraft_sum_of(r.requests.iter().map(|q| q.len))
}

/// Request index `i` receives `codes[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeAssignment {
    pub codes: Vec<BitString>,
}

#[derive(Serialize)]
struct AssignmentRow<'a> {
    index: usize,
    target: &'a BitString,
    requested_len: usize,
    code: &'a BitString,
}

impl CodeAssignment {
    /// CSV with one row per request.
    pub fn to_csv(&self, r: &RequestSet) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (index, (q, code)) in r.requests.iter().zip(&self.codes).enumerate() {
            w.serialize(AssignmentRow {
                index,
                target: &q.target,
                requested_len: q.len,
                code,
            })?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv of ascii fields"))
    }
}

/// Online allocation: each request takes the leftmost code of its length
/// inside the smallest free subtree that can hold it.
///
/// Free space is kept as a set of disjoint subtrees of pairwise distinct
/// depth, which is what makes every bounded request set allocatable. Plain
/// leftmost-fit over `[0,1)` lacks that property (lengths 2,3,2,2 strand two
/// separate depth-3 gaps before the last request).
pub fn kc_allocate(r: &RequestSet) -> Result<CodeAssignment, CodingError> {
    let total = kraft_sum(r);
    if total > Capital::one() {
        return Err(CodingError::Unbounded(total));
    }
    let mut free: BTreeSet<(usize, BitString)> = BTreeSet::new();
    free.insert((0, BitString::new()));
    let mut codes = Vec::with_capacity(r.len());
    for q in &r.requests {
        let (depth, root) = free
            .iter()
            .rev()
            .find(|(d, _)| *d <= q.len)
            .cloned()
            .expect("a bounded request set always fits");
        free.remove(&(depth, root.clone()));
        let mut code = root;
        for _ in depth..q.len {
            let mut sibling = code.clone();
            sibling.push(true);
            free.insert((sibling.len(), sibling));
            code.push(false);
        }
        codes.push(code);
    }
    Ok(CodeAssignment { codes })
}

fn decoder_program(cfg: &MachineConfig, decoder: Decoder) -> Result<usize, CodingError> {
    cfg.opcode_of(decoder)
        .ok_or(CodingError::DecoderMissing(decoder))
}

/// `τ ++ ρ`, where τ outputs `B↾n` and `ρ = A↾n`.
pub fn encode_qn(b_code: &Program, a_prefix: &BitString) -> Result<BitString, CodingError> {
    if b_code.out_len() != a_prefix.len() {
        return Err(CodingError::LengthMismatch {
            expected: b_code.out_len(),
            found: a_prefix.len(),
        });
    }
    Ok(b_code.code().concat(a_prefix))
}

/// The registered-opcode program for a `Q_n` code.
pub fn qn_program(cfg: &MachineConfig, code: &BitString) -> Result<Program, CodingError> {
    decoder_program(cfg, Decoder::InterleaveTail)?;
    let (tau, used) = parse_prefix(cfg, code)?;
    let raw = code.slice(used, code.len());
    tail_matches(code, used, tau.out_len())?;
    Ok(Program::interleave_tail(cfg, &tau, &raw).expect("tail length checked"))
}

/// Runs the `Q_n` decoder: `(A⊎B)↾2n` from `τ ++ A↾n`.
pub fn decode_qn(
    cfg: &MachineConfig,
    code: &BitString,
    budget: &ExecBudget,
) -> Result<BitString, CodingError> {
    let p = qn_program(cfg, code)?;
    finish(run(&p, &BitString::new(), Some(budget)))
}

/// `τ ++ B↾m ++ A[n..m)`, where τ outputs `A↾n` given `B↾m`.
pub fn encode_qmn(
    cond_code: &Program,
    b_prefix: &BitString,
    a_tail: &BitString,
) -> Result<BitString, CodingError> {
    let (n, m) = (cond_code.out_len(), b_prefix.len());
    if n > m {
        return Err(CodingError::Precondition { n, m });
    }
    if a_tail.len() != m - n {
        return Err(CodingError::LengthMismatch {
            expected: m - n,
            found: a_tail.len(),
        });
    }
    Ok(cond_code.code().concat(b_prefix).concat(a_tail))
}

/// The registered-opcode program for a `Q_{m,n}` code.
pub fn qmn_program(
    cfg: &MachineConfig,
    code: &BitString,
    m: usize,
) -> Result<Program, CodingError> {
    decoder_program(cfg, Decoder::ConditionalInterleave)?;
    let (tau, used) = parse_prefix(cfg, code)?;
    let n = tau.out_len();
    if n > m {
        return Err(CodingError::Inconsistent { n, m });
    }
    tail_matches(code, used, 2 * m - n)?;
    let raw = code.slice(used, code.len());
    Ok(Program::conditional_interleave(cfg, m as u64, &tau, &raw).expect("shape checked"))
}

/// Runs the `Q_{m,n}` decoder: `(A⊎B)↾2m`.
pub fn decode_qmn(
    cfg: &MachineConfig,
    code: &BitString,
    m: usize,
    budget: &ExecBudget,
) -> Result<BitString, CodingError> {
    let p = qmn_program(cfg, code, m)?;
    finish(run(&p, &BitString::new(), Some(budget)))
}

fn tail_matches(code: &BitString, used: usize, want: usize) -> Result<(), CodingError> {
    let have = code.len() - used;
    match have.cmp(&want) {
        std::cmp::Ordering::Equal => Ok(()),
        std::cmp::Ordering::Less => Err(ParseError {
            position: code.len(),
            kind: ParseErrorKind::Incomplete,
        }
        .into()),
        std::cmp::Ordering::Greater => Err(ParseError {
            position: used + want,
            kind: ParseErrorKind::TrailingBits { extra: have - want },
        }
        .into()),
    }
}

fn finish(out: crate::machine::ExecOutcome) -> Result<BitString, CodingError> {
    match out.status {
        Status::Halted => Ok(out.output.expect("halted runs carry output")),
        _ => Err(CodingError::BudgetExceeded),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CodeKind {
    Qn { n: usize },
    Qmn { m: usize, n: usize },
}

/// The set `{τρ}` of one decoder shape at fixed parameters.
#[derive(Debug, Clone)]
pub struct PrefixCodeSet {
    pub kind: CodeKind,
    pub base: MachineConfig,
}

impl PrefixCodeSet {
    pub fn raw_len(&self) -> usize {
        match self.kind {
            CodeKind::Qn { n } => n,
            CodeKind::Qmn { m, n } => 2 * m - n,
        }
    }

    fn inner_len(&self) -> usize {
        match self.kind {
            CodeKind::Qn { n } | CodeKind::Qmn { n, .. } => n,
        }
    }

    pub fn contains(&self, code: &BitString) -> bool {
        match parse_prefix(&self.base, code) {
            Ok((tau, used)) => {
                tau.out_len() == self.inner_len() && code.len() - used == self.raw_len()
            }
            Err(_) => false,
        }
    }

    /// Every member whose embedded program comes from `space`.
    pub fn members(&self, space: &ProgramSpace) -> Vec<BitString> {
        let raws: Vec<BitString> = BitString::all_of_len(self.raw_len()).collect();
        space
            .iter()
            .filter(|p| p.out_len() == self.inner_len())
            .flat_map(|p| raws.iter().map(move |r| p.code().concat(r)))
            .collect()
    }

    pub fn to_csv(&self, space: &ProgramSpace) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["code"])?;
        for code in self.members(space) {
            w.write_record([code.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv of ascii fields"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    #[test]
    fn kraft_examples() {
        assert_eq!(
            kraft_sum(&RequestSet::from_lengths(&[1, 1])),
            Capital::one()
        );
        assert_eq!(kraft_sum(&RequestSet::new()), Capital::zero());
        let over = RequestSet::from_lengths(&[1, 1, 1]);
        assert_eq!(kraft_sum(&over), Capital::dyadic(3, 1));
        assert!(matches!(kc_allocate(&over), Err(CodingError::Unbounded(_))));
    }

    #[test]
    fn allocation_examples() {
        let codes = |lens: &[usize]| kc_allocate(&RequestSet::from_lengths(lens)).unwrap().codes;
        assert_eq!(codes(&[1, 2, 3]), vec![bits("0"), bits("10"), bits("110")]);
        assert_eq!(codes(&[1, 1]), vec![bits("0"), bits("1")]);
        assert_eq!(codes(&[3]), vec![bits("000")]);
        // plain leftmost-fit would strand this last request
        assert_eq!(
            codes(&[2, 3, 2, 2]),
            vec![bits("00"), bits("010"), bits("10"), bits("11")]
        );
    }

    #[test]
    fn qn_examples() {
        let cfg = MachineConfig::default();
        let t = ExecBudget::quadratic(4);
        let b = Program::literal(&bits("10"));
        let code = encode_qn(&b, &bits("01")).unwrap();
        assert_eq!(code.len(), b.len() + 2);
        assert_eq!(decode_qn(&cfg, &code, &t).unwrap(), bits("0110"));
        assert!(matches!(
            encode_qn(&b, &bits("0")),
            Err(CodingError::LengthMismatch { .. })
        ));
        // the header and dispatches alone exceed 4·(t(0) + 1)
        let empty = Program::literal(&bits(""));
        assert_eq!(
            decode_qn(&cfg, empty.code(), &t),
            Err(CodingError::BudgetExceeded)
        );
        assert_eq!(
            decode_qn(&cfg, empty.code(), &ExecBudget::quadratic(16)).unwrap(),
            bits("")
        );
        assert!(matches!(
            decode_qn(&cfg, &code.slice(0, code.len() - 1), &t),
            Err(CodingError::Parse(_))
        ));
    }

    #[test]
    fn qmn_examples() {
        let cfg = MachineConfig::default();
        let t = ExecBudget::quadratic(4);
        let tau = Program::copy_cond(2, 0);
        let code = encode_qmn(&tau, &bits("10"), &bits("")).unwrap();
        assert_eq!(code, tau.code().concat(&bits("10")));
        assert_eq!(decode_qmn(&cfg, &code, 2, &t).unwrap(), bits("1100"));
        assert!(matches!(
            encode_qmn(&Program::literal(&bits("111")), &bits("10"), &bits("")),
            Err(CodingError::Precondition { n: 3, m: 2 })
        ));
        let empty = Program::literal(&bits(""));
        let code = encode_qmn(&empty, &bits("01"), &bits("11")).unwrap();
        assert_eq!(decode_qmn(&cfg, &code, 2, &t).unwrap(), bits("1011"));
        assert!(matches!(
            decode_qmn(&cfg, &code.slice(0, code.len() - 1), 2, &t),
            Err(CodingError::Parse(_))
        ));
        assert!(matches!(
            decode_qmn(&cfg, &code, 1, &t),
            Err(CodingError::Parse(_))
        ));
        let long = encode_qn(&Program::literal(&bits("111")), &bits("000")).unwrap();
        assert!(matches!(
            decode_qmn(&cfg, &long, 2, &t),
            Err(CodingError::Inconsistent { n: 3, m: 2 })
        ));
    }

    #[test]
    fn missing_decoder() {
        let code = encode_qn(&Program::literal(&bits("1")), &bits("0")).unwrap();
        let err =
            decode_qn(&MachineConfig::builtin(), &code, &ExecBudget::quadratic(4)).unwrap_err();
        assert_eq!(err, CodingError::DecoderMissing(Decoder::InterleaveTail));
    }
}
