//! Subcommand bodies. Each returns the files it produced; the binary decides
//! whether they go to disk or to stdout.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use vanlam_core::bits::{interleave, BitString};
use vanlam_core::coding::{decode_qmn, decode_qn, encode_qmn, encode_qn, qmn_program, qn_program};
use vanlam_core::construct::{
    build_pair_asymmetric, build_pair_incompressibility, build_pair_martingale, replay_asymmetric,
    replay_incompressibility, replay_martingale, BettingParams, ConstructError,
    IncompressibilityParams, PairArtifact, PairKind,
};
use vanlam_core::kolmo::{complexity, ComplexityQuery, ComplexityRow, GrammarSolver};
use vanlam_core::lookahead::{
    self, lift_lookahead_b, lift_lookahead_cond, LookaheadStrategy, OracleShift, PeekAndBet,
};
use vanlam_core::machine::gamma::gamma_len;
use vanlam_core::machine::{parse_program, run, Decoder, ExecBudget, ProgramSpace};
use vanlam_core::martingale::{
    doubling_levels, lift_interleave, machine_pool, play, Betting, BettingStrategy, Constant,
    HashBettor, MachineBettor, Pool,
};
use vanlam_core::par::Execution;

use crate::config::{ConfigError, ExperimentConfig};
use crate::suite::{run_suite, Status, SuiteReport};
use crate::Failure;

/// A named file produced by a command.
pub type Emitted = (String, String);

fn config_error(key: &'static str, message: impl Into<String>) -> Failure {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
    .into()
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn parse_bits(key: &'static str, s: &str) -> Result<BitString, Failure> {
    s.parse().map_err(|e| config_error(key, format!("{e}")))
}

/// Targets, one per line; blank lines and `#` comments are skipped. Errors
/// name the 1-based line.
pub fn parse_targets(text: &str) -> Result<Vec<BitString>, Failure> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bits = line
            .parse()
            .map_err(|e| Failure::Config(format!("targets line {}: {e}", i + 1)))?;
        out.push(bits);
    }
    Ok(out)
}

/// `unbounded` or a budget name such as `n2*4`.
pub fn parse_budget(name: &str) -> Result<Option<ExecBudget>, Failure> {
    if name == "unbounded" {
        return Ok(None);
    }
    ExecBudget::parse(name)
        .map(Some)
        .map_err(|e| config_error("--budget", e.to_string()))
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(internal)?;
    }
    String::from_utf8(w.into_inner().map_err(internal)?).map_err(internal)
}

/// One row per (target, budget). Budgets default to unbounded plus the
/// configured one.
pub fn complexity_report(
    cfg: &ExperimentConfig,
    targets: &[BitString],
    conditional: &BitString,
    budgets: &[Option<ExecBudget>],
) -> Result<Vec<Emitted>, Failure> {
    let cap = cfg.caps.enumeration;
    let space = ProgramSpace::build(&cfg.machine()?, cap).map_err(internal)?;
    let mut rows = Vec::new();
    for target in targets {
        for budget in budgets {
            let mut q = ComplexityQuery::plain(target.clone(), cap).given(conditional.clone());
            if let Some(b) = budget {
                q = q.within(*b);
            }
            let r = complexity(&space, &q, Execution::Parallel).map_err(internal)?;
            rows.push(ComplexityRow::new(&q, &r));
        }
    }
    Ok(vec![("complexity.csv".to_string(), csv_of(&rows)?)])
}

#[derive(Debug, Serialize)]
struct CompressRow {
    kind: &'static str,
    n: usize,
    m: usize,
    witness_len: usize,
    code_len: usize,
    bound: i64,
    decoded: bool,
    code: String,
}

/// `Q_n` rows for `n`, plus a `Q_{m,n}` row when `m` is given. Witnesses come
/// from the exact solver and are run under `budget`. The `Q_{m,n}` header
/// carries `γ(m)`, so its bound grows by `|γ(m)|`.
pub fn compress(
    cfg: &ExperimentConfig,
    a: &BitString,
    b: &BitString,
    n: usize,
    m: Option<usize>,
    budget: &ExecBudget,
) -> Result<Vec<Emitted>, Failure> {
    let machine = cfg.machine()?;
    let k0 = |d| {
        machine.header_len(d).ok_or_else(|| {
            config_error("machine.decoders", format!("{} is not installed", d.name()))
        })
    };
    let longest = m.unwrap_or(n);
    if a.len() < longest || b.len() < longest {
        return Err(config_error(
            "--n/--m",
            format!("need {longest} bits of each string"),
        ));
    }
    let mut solver = GrammarSolver::new(&machine);
    let empty = BitString::new();
    let mut rows = Vec::new();

    let (a_n, b_n) = (a.slice(0, n), b.slice(0, n));
    let w = solver.witness(&b_n, &empty);
    let code = encode_qn(&w, &a_n).map_err(internal)?;
    let len = qn_program(&machine, &code).map_err(internal)?.len();
    let decoded =
        decode_qn(&machine, &code, budget).ok() == Some(interleave(&a_n, &b_n).map_err(internal)?);
    let c = n as i64 - w.len() as i64;
    rows.push(CompressRow {
        kind: "qn",
        n,
        m: n,
        witness_len: w.len(),
        code_len: len,
        bound: 2 * n as i64 - c + k0(Decoder::InterleaveTail)? as i64,
        decoded: decoded && run(&w, &empty, Some(budget)).produced(&b_n),
        code: code.to_string(),
    });

    if let Some(m) = m {
        if n > m {
            return Err(config_error(
                "--m",
                format!("need n <= m, got n = {n}, m = {m}"),
            ));
        }
        let b_m = b.slice(0, m);
        let w = solver.witness(&a_n, &b_m);
        let code = encode_qmn(&w, &b_m, &a.slice(n, m)).map_err(internal)?;
        let len = qmn_program(&machine, &code, m).map_err(internal)?.len();
        let target = interleave(&a.slice(0, m), &b_m).map_err(internal)?;
        let decoded = decode_qmn(&machine, &code, m, budget).ok() == Some(target);
        let c = n as i64 - w.len() as i64;
        rows.push(CompressRow {
            kind: "qmn",
            n,
            m,
            witness_len: w.len(),
            code_len: len,
            bound: 2 * m as i64 - c
                + (k0(Decoder::ConditionalInterleave)? + gamma_len(m as u64)) as i64,
            decoded: decoded && run(&w, &b_m, Some(budget)).produced(&a_n),
            code: code.to_string(),
        });
    }
    Ok(vec![("compress.csv".to_string(), csv_of(&rows)?)])
}

/// Strategy names accepted by `martingale-run`.
pub const STRATEGIES: &str = "constant, hash:SEED, lift-hash:SEED, program:CODE, pool, \
                              peek-and-bet, lift-b-peek, oracle-shift:K, lift-cond-shift:K";

enum Named {
    Plain(Arc<dyn BettingStrategy>),
    Lookahead(Box<dyn LookaheadStrategy>),
}

fn named(cfg: &ExperimentConfig, name: &str, pool_cap: usize) -> Result<Named, Failure> {
    let (head, arg) = name.split_once(':').unwrap_or((name, ""));
    let number = || {
        arg.parse::<u64>()
            .map_err(|_| config_error("--strategy", format!("{name}: expected a number after ':'")))
    };
    Ok(match head {
        "constant" => Named::Plain(Arc::new(Constant)),
        "hash" => Named::Plain(Arc::new(Betting(HashBettor::new(number()?)))),
        "lift-hash" => Named::Plain(Arc::new(lift_interleave(Betting(HashBettor::new(
            number()?
        ))))),
        "program" => {
            let code = parse_bits("--strategy", arg)?;
            let program = parse_program(&cfg.machine()?, &code)
                .map_err(|e| config_error("--strategy", e.to_string()))?;
            Named::Plain(Arc::new(Betting(MachineBettor {
                program,
                budget: Some(cfg.budget()?),
            })))
        }
        "pool" => Named::Plain(Arc::new(pool(cfg, pool_cap)?.mixture(Execution::Parallel))),
        "peek-and-bet" => Named::Lookahead(Box::new(PeekAndBet)),
        "lift-b-peek" => Named::Lookahead(Box::new(lift_lookahead_b(PeekAndBet))),
        "oracle-shift" => Named::Lookahead(Box::new(OracleShift {
            shift: number()? as usize,
        })),
        "lift-cond-shift" => Named::Lookahead(Box::new(lift_lookahead_cond(OracleShift {
            shift: number()? as usize,
        }))),
        _ => {
            return Err(config_error(
                "--strategy",
                format!("unknown strategy {name:?}; known: {STRATEGIES}"),
            ))
        }
    })
}

fn pool(cfg: &ExperimentConfig, cap: usize) -> Result<Pool, Failure> {
    if cap > crate::config::POOL_CAP_MAX {
        return Err(ConfigError::Cap {
            key: "--cap",
            value: cap,
            max: crate::config::POOL_CAP_MAX,
        }
        .into());
    }
    machine_pool(&cfg.machine()?, cap, Some(cfg.budget()?), cfg.honesty()?).map_err(internal)
}

/// Replays a named strategy on `x`, with doubling levels up to `2^8`.
pub fn martingale_run(
    cfg: &ExperimentConfig,
    strategy: &str,
    x: &BitString,
    oracle: Option<&BitString>,
    pool_cap: usize,
) -> Result<Vec<Emitted>, Failure> {
    let levels = doubling_levels(8);
    let csv = match named(cfg, strategy, pool_cap)? {
        Named::Plain(d) => play(&*d, x, &levels).to_csv(),
        Named::Lookahead(d) => {
            let t = lookahead::play(&*d, x, oracle)
                .map_err(|v| Failure::Criterion(format!("protocol violation: {v}")))?;
            t.transcript(&levels).to_csv()
        }
    };
    Ok(vec![("transcript.csv".to_string(), csv)])
}

fn betting_params(cfg: &ExperimentConfig) -> Result<BettingParams, Failure> {
    Ok(BettingParams {
        schedule: cfg.schedule()?,
        budget: cfg.budget()?,
        machine: cfg.machine()?,
        exec: Execution::Parallel,
    })
}

fn construct_failure(e: ConstructError) -> Failure {
    match e {
        ConstructError::NoWitness { .. }
        | ConstructError::Separation { .. }
        | ConstructError::ScheduleShape { .. }
        | ConstructError::DigestMismatch { .. }
        | ConstructError::Parse { .. } => Failure::Config(e.to_string()),
        other => Failure::Internal(other.to_string()),
    }
}

pub fn build_pair(
    cfg: &ExperimentConfig,
    kind: PairKind,
    pool_cap: usize,
) -> Result<Vec<Emitted>, Failure> {
    let art = match kind {
        PairKind::Incompressibility => build_pair_incompressibility(&IncompressibilityParams {
            schedule: cfg.schedule()?,
            slack: cfg.slack(),
            budget: cfg.budget()?,
            machine: cfg.machine()?,
        }),
        PairKind::Martingale => build_pair_martingale(&betting_params(cfg)?, &pool(cfg, pool_cap)?),
        PairKind::Asymmetric => build_pair_asymmetric(&betting_params(cfg)?, &pool(cfg, pool_cap)?),
    }
    .map_err(construct_failure)?;
    Ok(vec![(format!("pair_{}.txt", kind.name()), art.to_text())])
}

/// Recomputes every certificate of a stored artifact. A machine digest that
/// differs from the configured machine is refused before any work is done.
pub fn replay_pair(cfg: &ExperimentConfig, text: &str) -> Result<Vec<Emitted>, Failure> {
    let art = PairArtifact::from_text(text).map_err(construct_failure)?;
    let machine = cfg.machine()?;
    art.refuse_other_machine(&machine.digest())
        .map_err(construct_failure)?;
    let rows = match art.kind {
        PairKind::Incompressibility => {
            replay_incompressibility(&art, &machine, &mut GrammarSolver::new(&machine))
        }
        PairKind::Martingale => replay_martingale(
            &art,
            &machine,
            &pool(cfg, art.pool_cap)?,
            Execution::Parallel,
        ),
        PairKind::Asymmetric => replay_asymmetric(
            &art,
            &machine,
            &pool(cfg, art.pool_cap)?,
            Execution::Parallel,
        ),
    }
    .map_err(construct_failure)?;
    if rows != art.certificates {
        return Err(Failure::Criterion(format!(
            "replayed certificates of the {} pair differ",
            art.kind.name()
        )));
    }
    if !art.holds() {
        return Err(Failure::Criterion(format!(
            "the {} pair has failing certificates",
            art.kind.name()
        )));
    }
    Ok(vec![(
        "replay.txt".to_string(),
        format!("{} certificates replayed identically\n", rows.len()),
    )])
}

/// Runs the suite; files are returned even when a criterion fails so the
/// caller can write them before exiting.
pub fn suite(cfg: &ExperimentConfig) -> Result<SuiteReport, Failure> {
    Ok(run_suite(cfg)?)
}

pub fn suite_lines(report: &SuiteReport) -> String {
    let mut out: String = report.results.iter().map(|r| r.line() + "\n").collect();
    let inconclusive = report
        .results
        .iter()
        .filter(|r| r.status == Status::Inconclusive)
        .count();
    if inconclusive > 0 {
        out.push_str(&format!(
            "{inconclusive} criteria inconclusive at this scale\n"
        ));
    }
    out
}

pub fn write_files(dir: &Path, files: &[Emitted]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
