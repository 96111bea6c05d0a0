// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use dsa_core::infoaudit::{
    full_audit, leakage_without_sum, outcome_count, suggest_within_budget, AuditError, AuditOptions,
    AuditResult, SeedSpace,
};
use dsa_core::protocol::theoretical_rates;
use dsa_core::simnet::{run_seeded, sweep_seeded, DeliveryOrder, Replay, SweepReport};
use dsa_core::{AdversaryView, ProtocolConfig, ProtocolError, RateReport, Scheme, SimulationRun};
use serde::Serialize;

use crate::args::{AuditArgs, Common, DemoArgs, ParamArgs, RatesArgs, RunArgs, SweepArgs};

const REGION: &str = "secure aggregation is feasible only for K >= 3 and T <= K - 3";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Budget(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Budget(m) | CliError::Runtime(m) => m,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn config_error(e: ProtocolError) -> CliError {
    match e {
        ProtocolError::Infeasible { users, threshold } => {
            CliError::Usage(format!("K = {users}, T = {threshold} is infeasible: {REGION}"))
        }
        other => CliError::Usage(other.to_string()),
    }
}

fn config(p: &ParamArgs, scheme: Scheme) -> Result<ProtocolConfig, CliError> {
    ProtocolConfig::new(p.users, p.threshold, p.input_len, p.modulus, scheme).map_err(config_error)
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    command: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    passed: bool,
    #[serde(flatten)]
    body: T,
}

fn emit<T: Serialize>(common: &Common, command: &'static str, passed: bool, body: T) -> Result<bool, CliError> {
    let generated_at = (!common.deterministic)
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    let env = Envelope { command, version: env!("CARGO_PKG_VERSION"), generated_at, passed, body };
    let mut text = serde_json::to_string_pretty(&env).map_err(runtime)?;
    text.push('\n');
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(runtime)?,
    }
    Ok(passed)
}

#[derive(Serialize)]
struct RunBody<'a> {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay_verified: Option<bool>,
    run: &'a SimulationRun,
    #[serde(skip_serializing_if = "Option::is_none")]
    view: Option<AdversaryView>,
}

pub fn run(a: &RunArgs) -> Result<bool, CliError> {
    let (run, seed, verified) = match &a.verify_replay {
        Some(path) => {
            let file = File::open(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            let replay = Replay::read_jsonl(BufReader::new(file)).map_err(runtime)?;
            let run = replay.verify().map_err(runtime)?;
            eprintln!("replay {} matches re-simulation ({} records)", path.display(), replay.records.len());
            (run, replay.header.seed, Some(true))
        }
        None => {
            let cfg = config(&a.params, a.scheme.into())?;
            let run = run_seeded(&cfg, a.seed, DeliveryOrder::Forward).map_err(runtime)?;
            if let Some(path) = &a.replay {
                let file = File::create(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
                Replay::from_run(&run, a.seed).write_jsonl(BufWriter::new(file)).map_err(runtime)?;
            }
            (run, a.seed, None)
        }
    };
    let view = match a.observer {
        Some(k) => Some(run.collude(k, &a.collusion).map_err(|e| CliError::Usage(e.to_string()))?),
        None => None,
    };
    let cfg = run.config();
    eprintln!(
        "K={} T={} L={} q={} {}: {} messages, every user recovered {:?}",
        cfg.users(),
        cfg.threshold(),
        cfg.input_len(),
        cfg.modulus(),
        cfg.scheme(),
        run.transcript.messages.len(),
        run.transcript.recovered[0].values()
    );
    eprintln!("measured rates (R_X, R_Z, R_ZSigma) = {}", run.rates.rates);
    emit(&a.common, "run", true, RunBody { seed, replay_verified: verified, run: &run, view })
}

#[derive(Serialize)]
struct AuditBody {
    report: dsa_core::AuditReport,
}

fn budget_error(cfg: &ProtocolConfig, required: u128, budget: u64) -> CliError {
    let mut msg = format!("seed space has {required} outcomes, above the budget of {budget}");
    match suggest_within_budget(cfg, budget) {
        Some(s) => msg.push_str(&format!(
            "; try --k {} --t {} --l {} --q {} ({} outcomes) or raise --budget / DSA_AUDIT_BUDGET",
            s.users(),
            s.threshold(),
            s.input_len(),
            s.modulus(),
            outcome_count(&s)
        )),
        None => msg.push_str("; raise --budget / DSA_AUDIT_BUDGET"),
    }
    CliError::Budget(msg)
}

fn build_space(cfg: &ProtocolConfig, budget: u64, workers: usize) -> Result<SeedSpace, CliError> {
    match SeedSpace::build(cfg, budget) {
        Ok(s) => Ok(s.with_workers(workers)),
        Err(AuditError::BudgetExceeded { required, budget }) => Err(budget_error(cfg, required, budget)),
        Err(e) => Err(runtime(e)),
    }
}

pub fn audit(a: &AuditArgs) -> Result<bool, CliError> {
    let cfg = config(&a.params, a.scheme.into())?;
    let space = build_space(&cfg, a.budget, a.workers)?;
    let opts = AuditOptions { sample_seed: a.seed, ..AuditOptions::default() };
    let mut report = full_audit(&space, a.budget, &opts).map_err(runtime)?;
    if a.bits {
        report = report.in_bits();
    }
    for r in &report.results {
        eprintln!("{r}");
    }
    let failed = report.failures().count();
    eprintln!(
        "{} checks over {} outcomes, {} failed ({} units)",
        report.results.len(),
        space.outcome_count(),
        failed,
        report.units
    );
    let passed = report.passed;
    emit(&a.common, "audit", passed, AuditBody { report })
}

#[derive(Serialize)]
struct RateRow {
    #[serde(rename = "K")]
    users: usize,
    scheme: Scheme,
    theoretical: RateReport,
    measured: RateReport,
    #[serde(rename = "match")]
    matches: bool,
}

#[derive(Serialize)]
struct RatesBody {
    rows: Vec<RateRow>,
}

fn check_k_values(ks: &[usize]) -> Result<(), CliError> {
    match ks.iter().find(|&&k| k < 3) {
        Some(k) => Err(CliError::Usage(format!("K = {k} is infeasible: {REGION}"))),
        None => Ok(()),
    }
}

pub fn rates(a: &RatesArgs) -> Result<bool, CliError> {
    check_k_values(&a.users)?;
    let mut rows = Vec::new();
    for &k in a.users.iter() {
        for scheme in a.scheme.schemes() {
            let cfg = ProtocolConfig::new(k, 0, a.input_len, a.modulus, scheme).map_err(config_error)?;
            let theoretical = theoretical_rates(&cfg).map_err(config_error)?;
            let measured = run_seeded(&cfg, a.seed, DeliveryOrder::Forward).map_err(runtime)?.rates.rates;
            rows.push(RateRow { users: k, scheme, theoretical, measured, matches: theoretical == measured });
        }
    }
    eprintln!("{:>3}  {:<9} {:>6} {:>6} {:>9}  measured", "K", "scheme", "R_X", "R_Z", "R_ZSigma");
    for r in &rows {
        let t = &r.theoretical;
        eprintln!(
            "{:>3}  {:<9} {:>6} {:>6} {:>9}  {}",
            r.users,
            r.scheme.to_string(),
            t.message.to_string(),
            t.key.to_string(),
            t.source_key.to_string(),
            if r.matches { "equal" } else { "DIFFERENT" }
        );
    }
    let passed = rows.iter().all(|r| r.matches);
    emit(&a.common, "rates", passed, RatesBody { rows })
}

#[derive(Serialize)]
struct SweepBody {
    seed: u64,
    #[serde(flatten)]
    report: SweepReport,
}

pub fn sweep(a: &SweepArgs) -> Result<bool, CliError> {
    check_k_values(&a.users)?;
    let mut grid = Vec::new();
    for &k in a.users.iter() {
        for scheme in a.scheme.schemes() {
            grid.push(ProtocolConfig::new(k, a.threshold, a.input_len, a.modulus, scheme).map_err(config_error)?);
        }
    }
    let report = sweep_seeded(&grid, a.trials, a.seed).map_err(runtime)?;
    eprintln!("{:>3} {:<9} {:>7} {:>10}  {:<12} rates", "K", "scheme", "trials", "recovered", "measured");
    for r in &report.rows {
        eprintln!(
            "{:>3} {:<9} {:>7} {:>10}  {:<12} {}",
            r.config.users(),
            r.config.scheme().to_string(),
            r.trials,
            r.recoveries,
            r.measured.to_string(),
            if r.rates_match { "match" } else { "MISMATCH" }
        );
    }
    if report.is_empty() {
        eprintln!("no trials requested");
    }
    let passed = report.all_passed();
    emit(&a.common, "sweep", passed, SweepBody { seed: a.seed, report })
}

#[derive(Serialize)]
struct LeakageRow {
    k: usize,
    k_prime: usize,
    leaked: f64,
    result: AuditResult,
}

#[derive(Serialize)]
struct DemoBody {
    config: ProtocolConfig,
    units: &'static str,
    rows: Vec<LeakageRow>,
}

pub fn demo_infeasible(a: &DemoArgs) -> Result<bool, CliError> {
    let t = a.threshold.unwrap_or(a.users.saturating_sub(2));
    if !a.force {
        return Err(CliError::Usage(format!(
            "refusing to run K = {}, T = {t}: {REGION}, and outside that region a user's input is exposed; \
             pass --force to demonstrate the leakage",
            a.users
        )));
    }
    if a.users < 2 || t + 2 != a.users {
        return Err(CliError::Usage(format!(
            "the demonstration uses T = K - 2 (K = {}, so T = {}); got T = {t}",
            a.users,
            a.users.saturating_sub(2)
        )));
    }
    let cfg = ProtocolConfig::demonstration(a.users, t, a.input_len, a.modulus, Scheme::Optimal)
        .map_err(config_error)?;
    let space = build_space(&cfg, a.budget, 1)?;
    let q = cfg.modulus().get();
    let mut rows = Vec::new();
    for k in 0..cfg.users() {
        for kp in (0..cfg.users()).filter(|&kp| kp != k) {
            let mut result = leakage_without_sum(&space, k, kp).map_err(runtime)?;
            if a.bits {
                result = result.in_bits(q);
            }
            rows.push(LeakageRow { k, k_prime: kp, leaked: result.value, result });
        }
    }
    let units = if a.bits { "bits" } else { "q-ary" };
    eprintln!("{:>3} {:>3}  leaked ({units} units)", "k", "k'");
    for r in &rows {
        eprintln!("{:>3} {:>3}  {:.6}", r.k, r.k_prime, r.leaked);
    }
    let passed = rows.iter().all(|r| r.result.passed);
    emit(&a.common, "demo-infeasible", passed, DemoBody { config: cfg, units, rows })
}
