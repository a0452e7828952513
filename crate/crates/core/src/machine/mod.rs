//! A concrete prefix-free reference machine with step budgets and a
//! conditional-input tape.
//!
//! Programs are trees of operators. Every node starts with a unary opcode
//! header `1^{k-1}0`:
//!
//! | k  | operator           | body                                             |
//! |----|--------------------|--------------------------------------------------|
//! | 1  | `LITERAL`          | `γ(ℓ)` then ℓ raw bits                           |
//! | 2  | `REPEAT`           | `γ(ℓ) γ(r)` then ℓ raw bits, emitted r times     |
//! | 3  | `COPY-COND`        | `γ(ℓ) γ(off)`: conditional `[off, off+ℓ)`        |
//! | 4  | `CONCAT`           | two subprograms                                  |
//! | 5  | `INTERLEAVE`       | two subprograms, output lengths differ by ≤ 1    |
//! | 6+ | registered decoders| see [`Decoder`]                                  |
//!
//! `γ` is the shifted Elias gamma code of [`gamma`]. Every node's output
//! length is fixed by its code alone, which is what lets the decoders read a
//! raw tail whose length depends on the embedded program.

mod budget;
mod enumerate;
mod exec;
pub mod gamma;
mod program;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use budget::{ExecBudget, TimeBound};
pub use enumerate::{enumerate_programs, kraft_sum_of, ProgramSpace, ENUMERATION_CAP};
pub use exec::{run, run_code, run_traced, ExecOutcome, Status};
pub use program::{
    parse_prefix, parse_program, Node, Op, ParseError, ParseErrorKind, Program, MAX_OUTPUT_BITS,
};

/// Opcode number of the first registered decoder.
pub const FIRST_DECODER_OPCODE: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("unknown time bound {0:?}")]
    UnknownTimeBound(String),
    #[error("budget constant must be positive")]
    ZeroFactor,
    #[error("malformed budget {0:?}; expected name or name*c")]
    BadBudget(String),
    #[error("time bound {name} is not monotone with t(n) >= n at n = {at}")]
    BadTimeBound { name: &'static str, at: u64 },
    #[error("enumeration length {requested} exceeds the cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("decoder {0:?} registered twice")]
    DuplicateDecoder(Decoder),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Decoders that can be installed as opcodes `6, 7, …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decoder {
    /// `header τ ρ`: runs τ (output length n, on the machine's conditional),
    /// reads exactly n raw bits ρ and emits `interleave(ρ, τ-output)`.
    #[serde(rename = "interleave-tail")]
    InterleaveTail,
    /// `header γ(m) τ σ`: τ has output length n ≤ m; σ holds 2m − n raw bits.
    /// τ runs with the first m bits of σ as its conditional, and the node emits
    /// `interleave(τ-output ++ σ[m..], σ[..m])`.
    #[serde(rename = "conditional-interleave")]
    ConditionalInterleave,
}

impl Decoder {
    pub fn name(self) -> &'static str {
        match self {
            Decoder::InterleaveTail => "interleave-tail",
            Decoder::ConditionalInterleave => "conditional-interleave",
        }
    }
}

/// The opcode registry: built-ins `1..=5` plus the installed decoders in
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineConfig {
    decoders: Vec<Decoder>,
}

impl MachineConfig {
    /// Built-in opcodes only.
    pub fn builtin() -> Self {
        Self {
            decoders: Vec::new(),
        }
    }

    pub fn with_decoders(decoders: &[Decoder]) -> Result<Self, MachineError> {
        let mut cfg = Self::builtin();
        for &d in decoders {
            cfg.register(d)?;
        }
        Ok(cfg)
    }

    pub fn register(&mut self, decoder: Decoder) -> Result<usize, MachineError> {
        if self.decoders.contains(&decoder) {
            return Err(MachineError::DuplicateDecoder(decoder));
        }
        self.decoders.push(decoder);
        Ok(FIRST_DECODER_OPCODE + self.decoders.len() - 1)
    }

    pub fn decoders(&self) -> &[Decoder] {
        &self.decoders
    }

    pub fn max_opcode(&self) -> usize {
        FIRST_DECODER_OPCODE - 1 + self.decoders.len()
    }

    pub fn opcode_of(&self, decoder: Decoder) -> Option<usize> {
        self.decoders
            .iter()
            .position(|&d| d == decoder)
            .map(|i| FIRST_DECODER_OPCODE + i)
    }

    pub fn decoder_at(&self, opcode: usize) -> Option<Decoder> {
        opcode
            .checked_sub(FIRST_DECODER_OPCODE)
            .and_then(|i| self.decoders.get(i).copied())
    }

    /// Length of the unary header of `decoder`; this is the machine constant
    /// a decoder adds on top of the code it wraps.
    pub fn header_len(&self, decoder: Decoder) -> Option<usize> {
        self.opcode_of(decoder)
    }

    /// Plain-text `key = value` section naming the registry.
    pub fn config_section(&self) -> String {
        let mut s =
            String::from("[machine]\nbuiltins = literal,repeat,copy-cond,concat,interleave\n");
        let names: Vec<&str> = self.decoders.iter().map(|d| d.name()).collect();
        s.push_str(&format!("decoders = {}\n", names.join(",")));
        s
    }

    /// Short content hash of [`Self::config_section`], stamped into reports.
    pub fn digest(&self) -> String {
        let digest = Sha256::digest(self.config_section().as_bytes());
        hex::encode(&digest[..8])
    }
}

impl Default for MachineConfig {
    /// Built-ins plus both interleaving decoders (opcodes 6 and 7).
    fn default() -> Self {
        Self {
            decoders: vec![Decoder::InterleaveTail, Decoder::ConditionalInterleave],
        }
    }
}

impl fmt::Display for MachineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.decoders.iter().map(|d| d.name()).collect();
        write!(f, "builtin+[{}]", names.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry() {
        let mut cfg = MachineConfig::builtin();
        assert_eq!(cfg.max_opcode(), 5);
        assert_eq!(cfg.register(Decoder::InterleaveTail).unwrap(), 6);
        assert_eq!(cfg.register(Decoder::ConditionalInterleave).unwrap(), 7);
        assert!(cfg.register(Decoder::InterleaveTail).is_err());
        assert_eq!(cfg, MachineConfig::default());
        assert_eq!(cfg.decoder_at(7), Some(Decoder::ConditionalInterleave));
        assert_eq!(cfg.decoder_at(5), None);
        assert_eq!(cfg.header_len(Decoder::InterleaveTail), Some(6));
        assert!(cfg
            .config_section()
            .contains("interleave-tail,conditional-interleave"));
    }
}
