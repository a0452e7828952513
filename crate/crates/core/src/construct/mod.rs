//! Staged builders for finite counterexample pairs `(a, b)`.
//!
//! Stage `s` appends `α_s` to `a` and `β_s α_s` to `b`, so every block of `a`
//! reappears in `b` after a gap `β_s` too long for an honest strategy to see
//! across. Each builder emits a [`PairArtifact`] whose certificate rows can be
//! recomputed from `a`, `b` and the schedule alone.

mod betting;
mod incompressible;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::coding::CodingError;
use crate::kolmo::KolmoError;
use crate::machine::{ExecBudget, MachineError};
use crate::martingale::{honesty_horizon, MartingaleError};

pub use betting::{
    build_pair_asymmetric, build_pair_martingale, replay_asymmetric, replay_martingale,
    BettingParams,
};
pub use incompressible::{
    build_pair_incompressibility, literal_floor, replay_incompressibility, IncompressibilityParams,
    SlackPolicy,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("schedule lists {alpha} α lengths but {beta} β lengths")]
    ScheduleShape { alpha: usize, beta: usize },
    #[error("stage {stage}: copy of α at b-position {b_position} is within c·t = {bound}")]
    Separation {
        stage: usize,
        b_position: usize,
        bound: usize,
    },
    #[error("stage {stage}: no {block} block of length {len} within slack {max_slack}")]
    NoWitness {
        stage: usize,
        block: &'static str,
        len: usize,
        max_slack: usize,
    },
    #[error(transparent)]
    Kolmo(#[from] KolmoError),
    #[error(transparent)]
    Martingale(#[from] MartingaleError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("artifact line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("artifact was built for machine {expected}, this run uses {found}")]
    DigestMismatch { expected: String, found: String },
}

/// Block lengths per stage, and the honesty budget `(t, c)` the gap must beat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSchedule {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub honesty: ExecBudget,
}

impl StageSchedule {
    pub fn empty(honesty: ExecBudget) -> Self {
        Self {
            alpha: Vec::new(),
            beta: Vec::new(),
            honesty,
        }
    }

    /// Shortest gaps meeting the separation: `β_s` puts the copy of `α_s` at
    /// `c·t(|A_s|) + 1`.
    pub fn minimal_gap(stages: usize, alpha_len: usize, honesty: ExecBudget) -> Self {
        let mut sched = Self::empty(honesty);
        for s in 1..=stages {
            sched.alpha.push(alpha_len);
            let need = honesty_horizon(&honesty, sched.a_len(s));
            let have = sched.b_len(s - 1);
            sched.beta.push(need.saturating_sub(have).max(1));
        }
        sched
    }

    pub fn stages(&self) -> usize {
        self.alpha.len()
    }

    /// Length of the short string after stage `s`.
    pub fn a_len(&self, s: usize) -> usize {
        self.alpha[..s].iter().sum()
    }

    /// Length of the long string after stage `s`.
    pub fn b_len(&self, s: usize) -> usize {
        self.a_len(s) + self.beta[..s].iter().sum::<usize>()
    }

    /// Start of `α_s` in the short and in the long string.
    pub fn alpha_slots(&self, s: usize) -> (usize, usize) {
        (self.a_len(s - 1), self.b_len(s - 1) + self.beta[s - 1])
    }

    /// Stage containing position `pos` of the long string.
    pub fn b_stage(&self, pos: usize) -> usize {
        (1..=self.stages())
            .find(|&s| pos < self.b_len(s))
            .unwrap_or(self.stages())
    }

    /// Checks both schedule invariants.
    pub fn audit(&self) -> Result<(), ConstructError> {
        if self.alpha.len() != self.beta.len() {
            return Err(ConstructError::ScheduleShape {
                alpha: self.alpha.len(),
                beta: self.beta.len(),
            });
        }
        for s in 1..=self.stages() {
            let (_, b_position) = self.alpha_slots(s);
            let bound = honesty_horizon(&self.honesty, self.a_len(s)) - 1;
            if b_position <= bound {
                return Err(ConstructError::Separation {
                    stage: s,
                    b_position,
                    bound,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Incompressibility,
    Martingale,
    Asymmetric,
}

impl PairKind {
    pub fn name(self) -> &'static str {
        match self {
            PairKind::Incompressibility => "incompressibility",
            PairKind::Martingale => "martingale",
            PairKind::Asymmetric => "asymmetric",
        }
    }
}

impl FromStr for PairKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "incompressibility" => Ok(PairKind::Incompressibility),
            "martingale" => Ok(PairKind::Martingale),
            "asymmetric" => Ok(PairKind::Asymmetric),
            other => Err(format!("unknown pair kind {other:?}")),
        }
    }
}

/// The blocks chosen at one stage. The short string holds `α_s` alone, the
/// long one holds `β_s α_s`; `a` is the short string except for
/// [`PairKind::Asymmetric`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub short_slot: usize,
    pub long_slot: usize,
    pub alpha: BitString,
    pub beta: BitString,
    pub slack_b: usize,
    pub slack_a: usize,
}

/// One recomputable claim about the pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertRow {
    pub role: String,
    pub stage: usize,
    pub prefix_len: usize,
    pub measured: String,
    pub bound: String,
    pub holds: bool,
}

impl CertRow {
    fn new(
        role: &str,
        stage: usize,
        prefix_len: usize,
        measured: impl fmt::Display,
        bound: impl fmt::Display,
        holds: bool,
    ) -> Self {
        Self {
            role: role.into(),
            stage,
            prefix_len,
            measured: measured.to_string(),
            bound: bound.to_string(),
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairArtifact {
    pub kind: PairKind,
    pub a: BitString,
    pub b: BitString,
    pub schedule: StageSchedule,
    /// Complexity budget or bettor budget, depending on the kind.
    pub budget: ExecBudget,
    pub machine: String,
    pub machine_digest: String,
    /// Code-length cap of the strategy pool; 0 for the complexity builder.
    pub pool_cap: usize,
    pub stages: Vec<StageRecord>,
    pub certificates: Vec<CertRow>,
}

impl PairArtifact {
    pub fn holds(&self) -> bool {
        self.certificates.iter().all(|c| c.holds)
    }

    pub fn rows<'a>(&'a self, role: &'a str) -> impl Iterator<Item = &'a CertRow> + 'a {
        self.certificates.iter().filter(move |c| c.role == role)
    }

    /// Largest recorded slack on each side.
    pub fn max_slacks(&self) -> (usize, usize) {
        let b = self.stages.iter().map(|s| s.slack_b).max().unwrap_or(0);
        let a = self.stages.iter().map(|s| s.slack_a).max().unwrap_or(0);
        (b, a)
    }

    /// Copy property: each `α_s` sits at its slot in both strings.
    pub fn copies_hold(&self) -> bool {
        self.stages.iter().all(|st| {
            let len = st.alpha.len();
            let (short, long) = self.short_long();
            st.short_slot + len <= short.len()
                && st.long_slot + len <= long.len()
                && short.slice(st.short_slot, st.short_slot + len) == st.alpha
                && long.slice(st.long_slot, st.long_slot + len) == st.alpha
        })
    }

    /// `(short, long)` in the sense of [`StageRecord`].
    pub fn short_long(&self) -> (&BitString, &BitString) {
        match self.kind {
            PairKind::Asymmetric => (&self.b, &self.a),
            _ => (&self.a, &self.b),
        }
    }

    pub fn refuse_other_machine(&self, digest: &str) -> Result<(), ConstructError> {
        if self.machine_digest != digest {
            return Err(ConstructError::DigestMismatch {
                expected: self.machine_digest.clone(),
                found: digest.into(),
            });
        }
        Ok(())
    }

    /// Plain-text fixture: `key = value` header, then the stage and
    /// certificate tables as CSV blocks.
    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::from("# pair artifact\nversion = 1\n");
        let header = [
            ("kind", self.kind.name().to_string()),
            ("machine", self.machine.clone()),
            ("machine_digest", self.machine_digest.clone()),
            ("budget", self.budget.to_string()),
            ("honesty", self.schedule.honesty.to_string()),
            ("pool_cap", self.pool_cap.to_string()),
            ("alpha", list(&self.schedule.alpha)),
            ("beta", list(&self.schedule.beta)),
            ("a", self.a.to_string()),
            ("b", self.b.to_string()),
        ];
        for (k, v) in header {
            writeln!(out, "{k} = {v}").expect("write to string");
        }
        out.push_str("[stages]\n");
        out.push_str(&csv_block(&self.stages));
        out.push_str("[certificates]\n");
        out.push_str(&csv_block(&self.certificates));
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ConstructError> {
        let err = |line: usize, message: String| ConstructError::Parse { line, message };
        let mut header = std::collections::HashMap::new();
        let mut sections: Vec<(usize, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('[') {
                sections.push((i + 1, String::new()));
                continue;
            }
            if let Some((_, body)) = sections.last_mut() {
                body.push_str(line);
                body.push('\n');
            } else if !line.starts_with('#') && !line.trim().is_empty() {
                let (k, v) = line
                    .split_once(" = ")
                    .or_else(|| line.split_once(" ="))
                    .ok_or_else(|| err(i + 1, format!("expected key = value, found {line:?}")))?;
                header.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| err(0, format!("missing key {k:?}")))
        };
        let parse_list = |k: &str| -> Result<Vec<usize>, ConstructError> {
            let (line, v) = get(k)?;
            v.split(',')
                .filter(|s| !s.is_empty())
                .map(|x| x.trim().parse().map_err(|e| err(line, format!("{k}: {e}"))))
                .collect()
        };
        let parse_bits = |k: &str| -> Result<BitString, ConstructError> {
            let (line, v) = get(k)?;
            v.parse().map_err(|e| err(line, format!("{k}: {e}")))
        };
        let parse_budget = |k: &str| -> Result<ExecBudget, ConstructError> {
            let (line, v) = get(k)?;
            ExecBudget::parse(&v).map_err(|e| err(line, format!("{k}: {e}")))
        };
        let (vline, version) = get("version")?;
        if version != "1" {
            return Err(err(vline, format!("unsupported version {version}")));
        }
        let (kline, kind) = get("kind")?;
        let (pline, pool_cap) = get("pool_cap")?;
        let [(sline, stages), (cline, certs)] = <[(usize, String); 2]>::try_from(sections)
            .map_err(|s| err(0, format!("expected 2 CSV sections, found {}", s.len())))?;
        Ok(Self {
            kind: kind.parse().map_err(|e| err(kline, e))?,
            a: parse_bits("a")?,
            b: parse_bits("b")?,
            schedule: StageSchedule {
                alpha: parse_list("alpha")?,
                beta: parse_list("beta")?,
                honesty: parse_budget("honesty")?,
            },
            budget: parse_budget("budget")?,
            machine: get("machine")?.1,
            machine_digest: get("machine_digest")?.1,
            pool_cap: pool_cap
                .parse()
                .map_err(|e| err(pline, format!("pool_cap: {e}")))?,
            stages: read_csv(&stages).map_err(|e| err(sline, e))?,
            certificates: read_csv(&certs).map_err(|e| err(cline, e))?,
        })
    }
}

fn csv_block<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

fn read_csv<T: serde::de::DeserializeOwned>(body: &str) -> Result<Vec<T>, String> {
    csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_gap_schedule() {
        let s = StageSchedule::minimal_gap(4, 2, ExecBudget::quadratic(1));
        assert_eq!(s.beta, vec![5, 10, 18, 26]);
        assert_eq!(
            (1..=4).map(|i| s.b_len(i)).collect::<Vec<_>>(),
            vec![7, 19, 39, 67]
        );
        assert_eq!(s.alpha_slots(2), (2, 17));
        assert!(s.audit().is_ok());
        let tight = StageSchedule {
            alpha: vec![2],
            beta: vec![4],
            honesty: ExecBudget::quadratic(1),
        };
        assert_eq!(
            tight.audit().unwrap_err(),
            ConstructError::Separation {
                stage: 1,
                b_position: 4,
                bound: 4
            }
        );
    }
}
