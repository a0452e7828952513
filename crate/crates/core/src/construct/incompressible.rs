use super::{CertRow, ConstructError, PairArtifact, PairKind, StageRecord, StageSchedule};
use crate::bits::{interleave, BitString};
use crate::coding::{encode_qn, qn_program};
use crate::kolmo::{first_extension, GrammarSolver};
use crate::machine::gamma::gamma_len;
use crate::machine::{run, Decoder, ExecBudget, MachineConfig};

/// Length of the `LITERAL` program for an `n`-bit string. No string of this
/// machine costs more, so this is the incompressibility floor slacks are
/// measured from; it exceeds `n`, so `K ≥ floor − c` implies `K ≥ n − c`.
pub fn literal_floor(n: usize) -> usize {
    1 + gamma_len(n as u64) + n
}

fn within(k: usize, n: usize, slack: usize) -> bool {
    k + slack >= literal_floor(n)
}

/// How much shortfall below the literal floor a certified prefix may have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackPolicy {
    /// Smallest slack in `0..=max` that admits a block, per stage and side.
    Minimal {
        max: usize,
    },
    Fixed(usize),
}

impl SlackPolicy {
    fn candidates(self) -> std::ops::RangeInclusive<usize> {
        match self {
            SlackPolicy::Minimal { max } => 0..=max,
            SlackPolicy::Fixed(c) => c..=c,
        }
    }

    fn max(self) -> usize {
        *self.candidates().end()
    }
}

#[derive(Debug, Clone)]
pub struct IncompressibilityParams {
    pub schedule: StageSchedule,
    pub slack: SlackPolicy,
    /// Budget the transfer witnesses must replay under.
    pub budget: ExecBudget,
    pub machine: MachineConfig,
}

/// `β_s` first, then `α_s`; every prefix of `b` stays within `slack_b` of
/// its literal floor and every prefix of `a` within `slack_a` given
/// `B_{s−1}β_s`.
/// Complexities are exact plain values from the grammar solver, which bound
/// the time-bounded ones from below.
pub fn build_pair_incompressibility(
    p: &IncompressibilityParams,
) -> Result<PairArtifact, ConstructError> {
    p.schedule.audit()?;
    let mut solver = GrammarSolver::new(&p.machine);
    let empty = BitString::new();
    let (mut a, mut b) = (BitString::new(), BitString::new());
    let mut stages = Vec::new();
    for s in 1..=p.schedule.stages() {
        let (beta_len, alpha_len) = (p.schedule.beta[s - 1], p.schedule.alpha[s - 1]);
        let mut found = None;
        for slack_b in p.slack.candidates() {
            let beta = first_extension(beta_len, |d| {
                let x = b.concat(d);
                within(solver.solve(&x, &empty).len, x.len(), slack_b)
            })?;
            if let Some(beta) = beta {
                found = Some((slack_b, beta));
                break;
            }
        }
        let (slack_b, beta) = found.ok_or(ConstructError::NoWitness {
            stage: s,
            block: "beta",
            len: beta_len,
            max_slack: p.slack.max(),
        })?;
        let cond = b.concat(&beta);
        let mut found = None;
        for slack_a in p.slack.candidates() {
            let alpha = first_extension(alpha_len, |t| {
                let x = a.concat(t);
                let y = cond.concat(t);
                within(solver.solve(&y, &empty).len, y.len(), slack_b)
                    && within(solver.solve(&x, &cond).len, x.len(), slack_a)
            })?;
            if let Some(alpha) = alpha {
                found = Some((slack_a, alpha));
                break;
            }
        }
        let (slack_a, alpha) = found.ok_or(ConstructError::NoWitness {
            stage: s,
            block: "alpha",
            len: alpha_len,
            max_slack: p.slack.max(),
        })?;
        let (short_slot, long_slot) = p.schedule.alpha_slots(s);
        a.extend_from(&alpha);
        b = cond.concat(&alpha);
        stages.push(StageRecord {
            stage: s,
            short_slot,
            long_slot,
            alpha,
            beta,
            slack_b,
            slack_a,
        });
    }
    let mut art = PairArtifact {
        kind: PairKind::Incompressibility,
        a,
        b,
        schedule: p.schedule.clone(),
        budget: p.budget,
        machine: p.machine.to_string(),
        machine_digest: p.machine.digest(),
        pool_cap: 0,
        stages,
        certificates: Vec::new(),
    };
    art.certificates = replay_incompressibility(&art, &p.machine, &mut solver)?;
    Ok(art)
}

/// Recomputes every certificate row from the strings, schedule and slacks.
pub fn replay_incompressibility(
    art: &PairArtifact,
    cfg: &MachineConfig,
    solver: &mut GrammarSolver,
) -> Result<Vec<CertRow>, ConstructError> {
    art.refuse_other_machine(&cfg.digest())?;
    let sched = &art.schedule;
    let empty = BitString::new();
    let mut rows = Vec::new();
    for n in 1..=art.b.len() {
        let s = sched.b_stage(n - 1);
        let k = solver.solve(&art.b.slice(0, n), &empty).len;
        let bound = literal_floor(n).saturating_sub(art.stages[s - 1].slack_b);
        rows.push(CertRow::new("b-prefix", s, n, k, bound, k >= bound));
    }
    for s in 1..=sched.stages() {
        let cond = art.b.slice(0, sched.b_len(s - 1) + sched.beta[s - 1]);
        for n in sched.a_len(s - 1) + 1..=sched.a_len(s) {
            let k = solver.solve(&art.a.slice(0, n), &cond).len;
            let bound = literal_floor(n).saturating_sub(art.stages[s - 1].slack_a);
            rows.push(CertRow::new("a-given-b", s, n, k, bound, k >= bound));
        }
    }
    let k0 = cfg.header_len(Decoder::InterleaveTail).ok_or(
        crate::coding::CodingError::DecoderMissing(Decoder::InterleaveTail),
    )?;
    for s in 1..=sched.stages() {
        let n = sched.a_len(s);
        rows.push(transfer_row(art, cfg, solver, s, n, k0)?);
    }
    Ok(rows)
}

/// The `Q_n` transfer at one boundary: the canonical witness `w` for `b↾n`
/// must replay under the budget, and `header ++ w ++ a↾n` must reproduce
/// `(a⊎b)↾2n` within the budget at length `≤ 2n − (n − |w|) + k₀`.
fn transfer_row(
    art: &PairArtifact,
    cfg: &MachineConfig,
    solver: &mut GrammarSolver,
    s: usize,
    n: usize,
    k0: usize,
) -> Result<CertRow, ConstructError> {
    let (a_n, b_n) = (art.a.slice(0, n), art.b.slice(0, n));
    let empty = BitString::new();
    let w = solver.witness(&b_n, &empty);
    let premise = run(&w, &empty, Some(&art.budget)).produced(&b_n);
    let code = encode_qn(&w, &a_n)?;
    let program = qn_program(cfg, &code)?;
    let target = interleave(&a_n, &b_n).expect("equal lengths");
    let decoded = run(&program, &empty, Some(&art.budget)).produced(&target);
    let c = n as i64 - w.len() as i64;
    let bound = 2 * n as i64 - c + k0 as i64;
    Ok(CertRow::new(
        "transfer",
        s,
        2 * n,
        program.len(),
        bound,
        premise && decoded && program.len() as i64 <= bound,
    ))
}
