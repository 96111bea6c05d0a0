// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsa_core::infoaudit::DEFAULT_BUDGET;
use dsa_core::Scheme;

#[derive(Debug, Parser)]
#[command(name = "dsa", version, about = "Decentralized secure aggregation: runs, audits, rate tables and sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one protocol execution.
    Run(RunArgs),
    /// Exhaustively audit recovery, security and key structure.
    Audit(AuditArgs),
    /// Print theoretical and measured rates.
    Rates(RatesArgs),
    /// Repeat simulated runs over a parameter grid.
    Sweep(SweepArgs),
    /// Show the leakage that appears once T reaches K - 2.
    DemoInfeasible(DemoArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Write JSON here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Omit timestamps so output bytes depend only on the flags.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Optimal,
    Baseline,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Optimal => Scheme::Optimal,
            SchemeArg::Baseline => Scheme::Baseline,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeSet {
    Optimal,
    Baseline,
    Both,
}

impl SchemeSet {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeSet::Optimal => vec![Scheme::Optimal],
            SchemeSet::Baseline => vec![Scheme::Baseline],
            SchemeSet::Both => vec![Scheme::Optimal, Scheme::Baseline],
        }
    }
}

/// One or more values of `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KList(pub Vec<usize>);

impl std::ops::Deref for KList {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Parses `4`, `3,4,5` or the inclusive range `3..6` (also `3..=6`).
pub fn parse_k_list(s: &str) -> Result<KList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid K value '{t}'"));
    let ks = if let Some((a, b)) = s.split_once("..") {
        let (lo, hi) = (num(a)?, num(b.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty K range '{s}'"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if ks.is_empty() {
        return Err("no K values given".into());
    }
    Ok(KList(ks))
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Number of users K.
    #[arg(long = "k", short = 'k')]
    pub users: usize,
    /// Collusion threshold T.
    #[arg(long = "t", short = 't', default_value_t = 0)]
    pub threshold: usize,
    /// Input length L in symbols.
    #[arg(long = "l", short = 'l', default_value_t = 1)]
    pub input_len: usize,
    /// Field size q (prime).
    #[arg(long = "q", short = 'q', default_value_t = 2)]
    pub modulus: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "optimal")]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write a JSONL replay file of the run.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Re-simulate a replay file and check it matches, instead of running.
    #[arg(long, conflicts_with = "replay")]
    pub verify_replay: Option<PathBuf>,
    /// Include the view of this observer in the report.
    #[arg(long)]
    pub observer: Option<usize>,
    /// Colluders joining the observer, comma separated.
    #[arg(long, value_delimiter = ',', requires = "observer")]
    pub collusion: Vec<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "optimal")]
    pub scheme: SchemeArg,
    /// Largest seed space to enumerate.
    #[arg(long, env = "DSA_AUDIT_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Report entropies in bits instead of q-ary units.
    #[arg(long)]
    pub bits: bool,
    /// Enumeration threads.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Seed for collusion-set sampling when K > 6.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// K values: `4`, `3,5` or `3..6`.
    #[arg(long = "k", short = 'k', value_parser = parse_k_list, default_value = "3..6")]
    pub users: KList,
    #[arg(long, value_enum, default_value = "both")]
    pub scheme: SchemeSet,
    /// Input length used for the measured run.
    #[arg(long = "l", short = 'l', default_value_t = 1)]
    pub input_len: usize,
    #[arg(long = "q", short = 'q', default_value_t = 2)]
    pub modulus: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// K values: `4`, `3,5` or `3..6`.
    #[arg(long = "k", short = 'k', value_parser = parse_k_list, default_value = "3..5")]
    pub users: KList,
    #[arg(long = "t", short = 't', default_value_t = 0)]
    pub threshold: usize,
    #[arg(long = "l", short = 'l', default_value_t = 1)]
    pub input_len: usize,
    #[arg(long = "q", short = 'q', default_value_t = 2)]
    pub modulus: u64,
    #[arg(long, value_enum, default_value = "both")]
    pub scheme: SchemeSet,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long = "k", short = 'k')]
    pub users: usize,
    /// Collusion size; defaults to K - 2.
    #[arg(long = "t", short = 't')]
    pub threshold: Option<usize>,
    #[arg(long = "l", short = 'l', default_value_t = 1)]
    pub input_len: usize,
    #[arg(long = "q", short = 'q', default_value_t = 2)]
    pub modulus: u64,
    /// Confirm running outside the feasible region.
    #[arg(long)]
    pub force: bool,
    #[arg(long, env = "DSA_AUDIT_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub bits: bool,
    #[command(flatten)]
    pub common: Common,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_lists() {
        assert_eq!(parse_k_list("4").unwrap().0, vec![4]);
        assert_eq!(parse_k_list("3,5").unwrap().0, vec![3, 5]);
        assert_eq!(parse_k_list("3..6").unwrap().0, vec![3, 4, 5, 6]);
        assert_eq!(parse_k_list("3..=4").unwrap().0, vec![3, 4]);
        assert!(parse_k_list("6..3").is_err());
        assert!(parse_k_list("x").is_err());
    }

    #[test]
    fn parser_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
