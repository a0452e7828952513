use std::collections::BTreeMap;

use super::{CertRow, ConstructError, PairArtifact, PairKind, StageRecord, StageSchedule};
use crate::bits::{interleave, BitString};
use crate::capital::Capital;
use crate::machine::{ExecBudget, MachineConfig};
use crate::martingale::{
    honesty_horizon, Anchor, Betting, BettingStrategy, CopyBettor, CopyOracle, LastIndexBettor,
    Mixture, OracleBetting, OracleMixture, OracleTape, Pool, Predictor,
};
use crate::par::Execution;

#[derive(Debug, Clone)]
pub struct BettingParams {
    pub schedule: StageSchedule,
    /// Step budget of the plain bettors.
    pub budget: ExecBudget,
    pub machine: MachineConfig,
    pub exec: Execution,
}

struct Mixtures {
    plain: Mixture,
    oracle: OracleMixture,
}

impl Mixtures {
    fn of(pool: &Pool, exec: Execution) -> Self {
        Self {
            plain: pool.mixture(exec),
            oracle: pool.oracle_mixture(exec),
        }
    }
}

fn artifact(
    kind: PairKind,
    p: &BettingParams,
    pool: &Pool,
    a: BitString,
    b: BitString,
    stages: Vec<StageRecord>,
) -> PairArtifact {
    PairArtifact {
        kind,
        a,
        b,
        schedule: p.schedule.clone(),
        budget: p.budget,
        machine: p.machine.to_string(),
        machine_digest: p.machine.digest(),
        pool_cap: pool.cap,
        stages,
        certificates: Vec::new(),
    }
}

fn record(sched: &StageSchedule, s: usize, alpha: BitString, beta: BitString) -> StageRecord {
    let (short_slot, long_slot) = sched.alpha_slots(s);
    StageRecord {
        stage: s,
        short_slot,
        long_slot,
        alpha,
        beta,
        slack_b: 0,
        slack_a: 0,
    }
}

/// `β_s` is the greedy extension of `B_{s−1}` against the plain mixture,
/// `α_s` the greedy extension of `A_{s−1}` against the oracle mixture reading
/// `B_{s−1}β_s`. Once the stages are done `a` is padded to `|b|` the same
/// way, with `b` as the oracle.
pub fn build_pair_martingale(
    p: &BettingParams,
    pool: &Pool,
) -> Result<PairArtifact, ConstructError> {
    p.schedule.audit()?;
    let mix = Mixtures::of(pool, p.exec);
    let (mut a, mut b) = (BitString::new(), BitString::new());
    let mut stages = Vec::new();
    for s in 1..=p.schedule.stages() {
        let beta = mix.plain.extend_greedy(&b, p.schedule.beta[s - 1]).block;
        b.extend_from(&beta);
        let alpha = mix
            .oracle
            .extend_greedy(&a, p.schedule.alpha[s - 1], &b)
            .block;
        a.extend_from(&alpha);
        b.extend_from(&alpha);
        stages.push(record(&p.schedule, s, alpha, beta));
    }
    let filler = mix.oracle.extend_greedy(&a, b.len() - a.len(), &b).block;
    a.extend_from(&filler);
    let mut art = artifact(PairKind::Martingale, p, pool, a, b, stages);
    art.certificates = replay_martingale(&art, &p.machine, pool, p.exec)?;
    Ok(art)
}

/// Rows: one capital row per β block, α block and the filler (each must be
/// non-increasing step by step), one window audit, and one copy row per
/// stage boundary.
pub fn replay_martingale(
    art: &PairArtifact,
    cfg: &MachineConfig,
    pool: &Pool,
    exec: Execution,
) -> Result<Vec<CertRow>, ConstructError> {
    art.refuse_other_machine(&cfg.digest())?;
    let sched = &art.schedule;
    let mix = Mixtures::of(pool, exec);
    let mut rows = Vec::new();
    let b_values = mix.plain.trajectory(&art.b);
    for s in 1..=sched.stages() {
        let start = sched.b_len(s - 1);
        rows.push(descent_row(
            "beta-capital",
            s,
            &b_values,
            start,
            start + sched.beta[s - 1],
        ));
    }
    let mut tape = OracleTape::new(&art.b);
    let a_values = mix.oracle.trajectory(&art.a, &mut tape);
    for s in 1..=sched.stages() {
        rows.push(descent_row(
            "alpha-capital",
            s,
            &a_values,
            sched.a_len(s - 1),
            sched.a_len(s),
        ));
        // α_s was chosen against B_{s−1}β_s; it must not matter that the
        // audit sees all of b
        let oracle = art.b.slice(0, sched.alpha_slots(s).1);
        let upto = art.a.slice(0, sched.a_len(s));
        let own = mix.oracle.trajectory(&upto, &mut OracleTape::new(&oracle));
        let same = own[..] == a_values[..=sched.a_len(s)];
        rows.push(CertRow::new(
            "alpha-oracle-prefix",
            s,
            sched.a_len(s),
            same,
            true,
            same,
        ));
    }
    let n_stages = sched.stages();
    rows.push(descent_row(
        "filler-capital",
        n_stages,
        &a_values,
        sched.a_len(n_stages),
        art.a.len(),
    ));
    rows.push(window_row(&tape, &sched.honesty, art.a.len()));

    let anchors = (1..=n_stages).map(|s| {
        let (source, target) = sched.alpha_slots(s);
        Anchor {
            source,
            target,
            window_start: target,
        }
    });
    let copy = Betting(LastIndexBettor::new(Predictor::LastBit, anchors)?);
    let joined = interleave(&art.a, &art.b).expect("a is padded to |b|");
    let values = copy.trajectory(&joined);
    for s in 1..=n_stages {
        let at = 2 * sched.alpha_slots(s).1 + 2;
        let expect = Capital::pow2(s as i64);
        rows.push(CertRow::new(
            "copy",
            s,
            at,
            &values[at],
            &expect,
            values[at] == expect,
        ));
    }
    Ok(rows)
}

/// Mirror image: `a` carries `β_s α_s` and `b` only `α_s`. `β_s` extends
/// `A_{s−1}` greedily against the plain mixture; `α_s` extends `B_{s−1}`
/// greedily against the oracle mixture reading `A_{s−1}β_s`. `b` is padded
/// to `|a|` at the end.
pub fn build_pair_asymmetric(
    p: &BettingParams,
    pool: &Pool,
) -> Result<PairArtifact, ConstructError> {
    p.schedule.audit()?;
    let mix = Mixtures::of(pool, p.exec);
    let (mut a, mut b) = (BitString::new(), BitString::new());
    let mut stages = Vec::new();
    for s in 1..=p.schedule.stages() {
        let beta = mix.plain.extend_greedy(&a, p.schedule.beta[s - 1]).block;
        a.extend_from(&beta);
        let alpha = mix
            .oracle
            .extend_greedy(&b, p.schedule.alpha[s - 1], &a)
            .block;
        a.extend_from(&alpha);
        b.extend_from(&alpha);
        stages.push(record(&p.schedule, s, alpha, beta));
    }
    let filler = mix.oracle.extend_greedy(&b, a.len() - b.len(), &a).block;
    b.extend_from(&filler);
    let mut art = artifact(PairKind::Asymmetric, p, pool, a, b, stages);
    art.certificates = replay_asymmetric(&art, &p.machine, pool, p.exec)?;
    Ok(art)
}

/// Rows: capital descent on every block, the window audit of `b` given `a`,
/// and per stage the copy oracle on `a` (must reach `2^s`), the windowed
/// reverse copy oracle on `b` (must stay at 1) and the copy bettor on `a⊎b`
/// (must reach `2^s`).
pub fn replay_asymmetric(
    art: &PairArtifact,
    cfg: &MachineConfig,
    pool: &Pool,
    exec: Execution,
) -> Result<Vec<CertRow>, ConstructError> {
    art.refuse_other_machine(&cfg.digest())?;
    let sched = &art.schedule;
    let n_stages = sched.stages();
    let mix = Mixtures::of(pool, exec);
    let mut rows = Vec::new();
    let a_values = mix.plain.trajectory(&art.a);
    for s in 1..=n_stages {
        let start = sched.b_len(s - 1);
        rows.push(descent_row(
            "beta-capital",
            s,
            &a_values,
            start,
            start + sched.beta[s - 1],
        ));
    }
    let mut tape = OracleTape::new(&art.a);
    let b_values = mix.oracle.trajectory(&art.b, &mut tape);
    for s in 1..=n_stages {
        rows.push(descent_row(
            "alpha-capital",
            s,
            &b_values,
            sched.a_len(s - 1),
            sched.a_len(s),
        ));
    }
    rows.push(descent_row(
        "filler-capital",
        n_stages,
        &b_values,
        sched.a_len(n_stages),
        art.b.len(),
    ));
    rows.push(window_row(&tape, &sched.honesty, art.b.len()));

    let pairs: Vec<(usize, usize)> = (1..=n_stages).map(|s| sched.alpha_slots(s)).collect();
    let forward = OracleBetting(CopyOracle {
        by_target: pairs.iter().map(|&(short, long)| (long, short)).collect(),
        window: Some(sched.honesty),
    });
    let forward_values = forward.trajectory(&art.a, &mut OracleTape::new(&art.b));
    let reverse = OracleBetting(CopyOracle {
        by_target: pairs
            .iter()
            .map(|&(short, long)| (short, long))
            .collect::<BTreeMap<_, _>>(),
        window: Some(sched.honesty),
    });
    let mut reverse_tape = OracleTape::new(&art.a);
    let reverse_values = reverse.trajectory(&art.b, &mut reverse_tape);
    let joined = Betting(CopyBettor::new(
        pairs.iter().map(|&(short, long)| (2 * short + 1, 2 * long)),
    )?);
    let joined_values = joined.trajectory(&interleave(&art.a, &art.b).expect("b is padded to |a|"));
    for (s, &(short, long)) in (1..=n_stages).zip(&pairs) {
        let expect = Capital::pow2(s as i64);
        let v = &forward_values[long + 1];
        rows.push(CertRow::new(
            "copy-oracle",
            s,
            long + 1,
            v,
            &expect,
            *v == expect,
        ));
        let v = &reverse_values[short + 1];
        rows.push(CertRow::new(
            "reverse-window",
            s,
            short + 1,
            v,
            Capital::one(),
            *v == Capital::one(),
        ));
        let v = &joined_values[2 * long + 1];
        rows.push(CertRow::new(
            "joined-copy",
            s,
            2 * long + 1,
            v,
            &expect,
            *v == expect,
        ));
    }
    rows.push(window_row(&reverse_tape, &sched.honesty, art.b.len()));
    Ok(rows)
}

/// `values[start..=end]` never rises.
fn descent_row(role: &str, s: usize, values: &[Capital], start: usize, end: usize) -> CertRow {
    let holds = values[start..=end].windows(2).all(|w| w[1] <= w[0]);
    CertRow::new(role, s, end, &values[end], &values[start], holds)
}

/// Counts oracle reads at or beyond the horizon of the bet that made them.
/// Step `n + 1` is the bet on position `n`.
fn window_row(tape: &OracleTape, honesty: &ExecBudget, len: usize) -> CertRow {
    let outside: usize = tape
        .reads_by_step(len + 1)
        .iter()
        .enumerate()
        .skip(1)
        .map(|(step, reads)| {
            reads
                .iter()
                .filter(|&&p| p >= honesty_horizon(honesty, step - 1))
                .count()
        })
        .sum();
    CertRow::new("window", 0, len, outside, 0, outside == 0)
}
