// SPDX-License-Identifier: Apache-2.0

//! Message-passing simulation of `K` users, a trusted dealer and a passive
//! colluding observer.
//!
//! A run has two phases. The dealer samples the source key, derives every
//! individual key and unicasts it. Then each round delivers the round's
//! messages over error-free orthogonal channels (one round for the optimal
//! scheme, `K` for the baseline), and every node whose inbox is complete
//! decodes. Delivery order is a knob; decoding does not depend on it.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::field::{sample_vector, vec_sum, SymbolVector};
use crate::protocol::{
    decode, derive_individual_keys, generate_source_key, theoretical_rates, user_messages, Message,
    ProtocolConfig, ProtocolError, RateReport, Scheme, Transcript,
};

/// Simulation errors.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("user {user} failed to decode: {reason}")]
    DecodeFailure { user: usize, reason: String },
    #[error("invalid collusion set {collusion:?} for observer {observer}: {reason}")]
    InvalidCollusion {
        observer: usize,
        collusion: Vec<usize>,
        reason: String,
    },
    #[error("grid point {point}: {source}")]
    GridPoint {
        point: String,
        #[source]
        source: Box<SimError>,
    },
    #[error("replay: {0}")]
    Replay(String),
}

/// Order in which a round's messages reach their recipients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeliveryOrder {
    #[default]
    Forward,
    Reverse,
    Shuffled(u64),
}

/// One simulated user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub user: usize,
    pub input: SymbolVector,
    pub key: SymbolVector,
    /// Sender to message, for the round in which this node decodes.
    pub inbox: BTreeMap<usize, SymbolVector>,
    pub recovered: Option<SymbolVector>,
}

impl NodeState {
    fn new(user: usize, input: SymbolVector, key: SymbolVector) -> Self {
        NodeState { user, input, key, inbox: BTreeMap::new(), recovered: None }
    }

    fn receive(&mut self, msg: &Message) -> Result<(), SimError> {
        if self.inbox.insert(msg.sender, msg.symbols.clone()).is_some() {
            return Err(SimError::DecodeFailure {
                user: self.user,
                reason: format!("duplicate message from user {}", msg.sender),
            });
        }
        Ok(())
    }

    fn try_decode(&mut self, cfg: &ProtocolConfig) -> Result<(), SimError> {
        if self.inbox.len() != cfg.users() - 1 {
            return Ok(());
        }
        let sum = decode(cfg, self.user, &self.inbox, &self.input, &self.key)
            .map_err(|e| SimError::DecodeFailure { user: self.user, reason: e.to_string() })?;
        self.recovered = Some(sum);
        Ok(())
    }
}

/// Exact symbol counts of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasuredRates {
    pub input_len: u64,
    /// Symbols each user transmitted.
    pub transmitted: Vec<u64>,
    /// Individual key symbols each user received from the dealer.
    pub key_symbols: Vec<u64>,
    /// Symbols in the dealer's source key.
    pub source_symbols: u64,
    /// Symbols the dealer unicast to all users together.
    pub dealer_unicast: u64,
    pub rates: RateReport,
}

impl MeasuredRates {
    fn from_counts(input_len: u64, transmitted: Vec<u64>, key_symbols: Vec<u64>, source_symbols: u64) -> Self {
        let max = |v: &[u64]| v.iter().copied().max().unwrap_or(0);
        let rates = RateReport::from_counts(max(&transmitted), max(&key_symbols), source_symbols, input_len);
        let dealer_unicast = key_symbols.iter().sum();
        MeasuredRates { input_len, transmitted, key_symbols, source_symbols, dealer_unicast, rates }
    }

    /// Whether every user transmitted, and received, the same number of
    /// symbols.
    pub fn is_symmetric(&self) -> bool {
        self.transmitted.windows(2).all(|w| w[0] == w[1]) && self.key_symbols.windows(2).all(|w| w[0] == w[1])
    }
}

/// What observer `k` sees together with the colluders in `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversaryView {
    pub observer: usize,
    pub collusion: Vec<usize>,
    pub own_input: SymbolVector,
    pub own_key: SymbolVector,
    /// `(i, W_i, Z_i)` for every `i` in `T`.
    pub collected: Vec<(usize, SymbolVector, SymbolVector)>,
    /// Messages that reached the observer, in transcript order.
    pub observed: Vec<Message>,
}

/// Result of [`run_protocol`].
#[derive(Debug, Clone, Serialize)]
pub struct SimulationRun {
    pub transcript: Transcript,
    pub inputs: Vec<SymbolVector>,
    pub rates: MeasuredRates,
    #[serde(skip)]
    pub nodes: Vec<NodeState>,
}

impl SimulationRun {
    pub fn config(&self) -> &ProtocolConfig {
        &self.transcript.config
    }

    /// Assembles the observer's view joined with the collusion set.
    pub fn collude(&self, observer: usize, collusion: &[usize]) -> Result<AdversaryView, SimError> {
        let cfg = self.config();
        let invalid = |reason: &str| SimError::InvalidCollusion {
            observer,
            collusion: collusion.to_vec(),
            reason: reason.into(),
        };
        if observer >= cfg.users() {
            return Err(invalid("observer index out of range"));
        }
        let mut t = collusion.to_vec();
        t.sort_unstable();
        t.dedup();
        if t.len() != collusion.len() {
            return Err(invalid("duplicate user"));
        }
        if t.iter().any(|&i| i >= cfg.users()) {
            return Err(invalid("user index out of range"));
        }
        if t.contains(&observer) {
            return Err(invalid("the observer cannot collude with itself"));
        }
        if t.len() > cfg.threshold() && !cfg.is_demonstration() {
            return Err(invalid("larger than the collusion threshold T"));
        }
        let node = &self.nodes[observer];
        Ok(AdversaryView {
            observer,
            collected: t
                .iter()
                .map(|&i| (i, self.nodes[i].input.clone(), self.nodes[i].key.clone()))
                .collect(),
            collusion: t,
            own_input: node.input.clone(),
            own_key: node.key.clone(),
            observed: self.transcript.observed_by(observer).cloned().collect(),
        })
    }
}

fn deliveries(cfg: &ProtocolConfig, round: &[Message], order: DeliveryOrder, round_idx: usize) -> Vec<(usize, usize)> {
    // (message index, recipient)
    let mut out = Vec::new();
    for (i, m) in round.iter().enumerate() {
        let before = out.len();
        out.extend((0..cfg.users()).filter(|&u| m.reaches(u)).map(|u| (i, u)));
        let fanout = out.len() - before;
        debug_assert_eq!(fanout, if m.recipient.is_some() { 1 } else { cfg.users() - 1 });
    }
    match order {
        DeliveryOrder::Forward => {}
        DeliveryOrder::Reverse => out.reverse(),
        DeliveryOrder::Shuffled(seed) => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(round_idx as u64));
            out.shuffle(&mut rng);
        }
    }
    out
}

/// Runs the protocol end to end.
///
/// Inputs are sampled uniformly from `rng` when absent; the dealer's source
/// key is sampled afterwards from the same generator.
pub fn run_protocol<R: RngCore + ?Sized>(
    cfg: &ProtocolConfig,
    inputs: Option<&[SymbolVector]>,
    rng: &mut R,
    order: DeliveryOrder,
) -> Result<SimulationRun, SimError> {
    if !cfg.is_demonstration() {
        theoretical_rates(cfg)?;
    }
    let (k, l, q) = (cfg.users(), cfg.input_len(), cfg.modulus());
    let inputs: Vec<SymbolVector> = match inputs {
        Some(w) => {
            if w.len() != k || w.iter().any(|x| !x.has_shape(l, q)) {
                return Err(ProtocolError::ShapeMismatch(format!("expected {k} inputs of length {l} mod {q}")).into());
            }
            w.to_vec()
        }
        None => (0..k).map(|_| sample_vector(l, q, rng)).collect::<Result<_, _>>().map_err(ProtocolError::from)?,
    };

    // Phase 1: dealer.
    let src = generate_source_key(cfg, rng)?;
    let keys = derive_individual_keys(&src, cfg)?.into_keys();
    let key_symbols: Vec<u64> = keys.iter().map(|z| z.len() as u64).collect();
    let mut nodes: Vec<NodeState> = inputs
        .iter()
        .zip(keys)
        .enumerate()
        .map(|(u, (w, z))| NodeState::new(u, w.clone(), z))
        .collect();

    // Phase 2: transmissions, grouped by round.
    let mut rounds: BTreeMap<usize, Vec<Message>> = BTreeMap::new();
    for node in &nodes {
        for m in user_messages(cfg, node.user, &node.input, &node.key)? {
            rounds.entry(m.round).or_default().push(m);
        }
    }
    let mut transcript_msgs = Vec::new();
    for (&r, msgs) in &rounds {
        for (i, user) in deliveries(cfg, msgs, order, r) {
            nodes[user].receive(&msgs[i])?;
        }
        for node in nodes.iter_mut() {
            if node.recovered.is_none() && (cfg.scheme() == Scheme::Optimal || node.user == r) {
                node.try_decode(cfg)?;
            }
        }
        transcript_msgs.extend(msgs.iter().cloned());
    }

    let expected = vec_sum(&inputs, l, q).map_err(ProtocolError::from)?;
    let mut recovered = Vec::with_capacity(k);
    for node in &nodes {
        match &node.recovered {
            Some(s) if *s == expected => recovered.push(s.clone()),
            Some(_) => {
                return Err(SimError::DecodeFailure { user: node.user, reason: "recovered the wrong sum".into() })
            }
            None => {
                return Err(SimError::DecodeFailure {
                    user: node.user,
                    reason: format!("inbox holds {} of {} messages", node.inbox.len(), k - 1),
                })
            }
        }
    }
    transcript_msgs.sort_by_key(|m| (m.round, m.sender));
    let transcript = Transcript { config: *cfg, messages: transcript_msgs, recovered };
    let transmitted = (0..k).map(|u| transcript.transmitted_symbols(u) as u64).collect();
    let rates = MeasuredRates::from_counts(l as u64, transmitted, key_symbols, src.symbol_count() as u64);
    Ok(SimulationRun { transcript, inputs, rates, nodes })
}

/// [`run_protocol`] with sampled inputs and a ChaCha20 generator seeded
/// from `seed`.
pub fn run_seeded(cfg: &ProtocolConfig, seed: u64, order: DeliveryOrder) -> Result<SimulationRun, SimError> {
    run_protocol(cfg, None, &mut ChaCha20Rng::seed_from_u64(seed), order)
}

/// One row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub config: ProtocolConfig,
    pub trials: usize,
    pub recoveries: usize,
    pub measured: RateReport,
    pub theoretical: RateReport,
    pub rates_match: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.rates_match && r.recoveries == r.trials)
    }

    pub fn row(&self, users: usize, scheme: Scheme) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.config.users() == users && r.config.scheme() == scheme)
    }
}

/// Runs `trials` executions per grid point, checks recovery on each, and
/// compares measured with theoretical rates. `trials == 0` yields an empty
/// report.
pub fn sweep<R: RngCore + ?Sized>(grid: &[ProtocolConfig], trials: usize, rng: &mut R) -> Result<SweepReport, SimError> {
    let mut report = SweepReport::default();
    if trials == 0 {
        return Ok(report);
    }
    for cfg in grid {
        let ctx = |e: SimError| SimError::GridPoint {
            point: format!("K={} T={} L={} q={} {}", cfg.users(), cfg.threshold(), cfg.input_len(), cfg.modulus(), cfg.scheme()),
            source: Box::new(e),
        };
        let theoretical = theoretical_rates(cfg).map_err(|e| ctx(e.into()))?;
        let mut measured: Option<RateReport> = None;
        let mut consistent = true;
        let mut recoveries = 0;
        for _ in 0..trials {
            let run = run_protocol(cfg, None, rng, DeliveryOrder::Forward).map_err(ctx)?;
            recoveries += 1;
            match measured {
                None => measured = Some(run.rates.rates),
                Some(m) => consistent &= m == run.rates.rates,
            }
        }
        let measured = measured.expect("at least one trial");
        report.rows.push(SweepRow {
            config: *cfg,
            trials,
            recoveries,
            measured,
            theoretical,
            rates_match: consistent && measured == theoretical,
        });
    }
    Ok(report)
}

/// [`sweep`] driven by a ChaCha20 generator seeded from `seed`.
pub fn sweep_seeded(grid: &[ProtocolConfig], trials: usize, seed: u64) -> Result<SweepReport, SimError> {
    sweep(grid, trials, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// First line of a replay file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayHeader {
    #[serde(flatten)]
    pub config: ProtocolConfig,
    pub seed: u64,
}

/// Every later line of a replay file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub round: usize,
    pub sender: usize,
    pub symbols: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub header: ReplayHeader,
    pub records: Vec<ReplayRecord>,
}

impl Replay {
    pub fn from_run(run: &SimulationRun, seed: u64) -> Self {
        Replay {
            header: ReplayHeader { config: *run.config(), seed },
            records: run
                .transcript
                .messages
                .iter()
                .map(|m| ReplayRecord { round: m.round, sender: m.sender, symbols: m.symbols.values().to_vec() })
                .collect(),
        }
    }

    /// Writes one JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), SimError> {
        let io = |e: std::io::Error| SimError::Replay(e.to_string());
        let json = |e: serde_json::Error| SimError::Replay(e.to_string());
        writeln!(w, "{}", serde_json::to_string(&self.header).map_err(json)?).map_err(io)?;
        for r in &self.records {
            writeln!(w, "{}", serde_json::to_string(r).map_err(json)?).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_jsonl<B: BufRead>(reader: B) -> Result<Self, SimError> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let parse_err = |n: usize, e: &dyn std::fmt::Display| SimError::Replay(format!("line {}: {e}", n + 1));
        let (n, first) = lines.next().ok_or_else(|| SimError::Replay("empty replay file".into()))?;
        let first = first.map_err(|e| parse_err(n, &e))?;
        let header: ReplayHeader = serde_json::from_str(&first).map_err(|e| parse_err(n, &e))?;
        let mut records = Vec::new();
        for (n, line) in lines {
            let line = line.map_err(|e| parse_err(n, &e))?;
            let rec: ReplayRecord = serde_json::from_str(&line).map_err(|e| parse_err(n, &e))?;
            let q = header.config.modulus().get();
            if rec.symbols.iter().any(|&s| s >= q) {
                return Err(parse_err(n, &format!("symbol out of range for q = {q}")));
            }
            records.push(rec);
        }
        Ok(Replay { header, records })
    }

    /// Re-simulates from the header and checks the records match exactly.
    pub fn verify(&self) -> Result<SimulationRun, SimError> {
        let run = run_seeded(&self.header.config, self.header.seed, DeliveryOrder::Forward)?;
        let fresh = Replay::from_run(&run, self.header.seed);
        if fresh.records.len() != self.records.len() {
            return Err(SimError::Replay(format!(
                "{} records in file, {} in re-simulation",
                self.records.len(),
                fresh.records.len()
            )));
        }
        if let Some(i) = fresh.records.iter().zip(&self.records).position(|(a, b)| a != b) {
            return Err(SimError::Replay(format!("record {} differs from the re-simulation", i + 1)));
        }
        Ok(run)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Rate;
    use proptest::prelude::*;

    fn cfg(k: usize, t: usize, l: usize, q: u64, s: Scheme) -> ProtocolConfig {
        ProtocolConfig::new(k, t, l, q, s).unwrap()
    }

    fn triple(r: &RateReport) -> (Rate, Rate, Rate) {
        (r.message, r.key, r.source_key)
    }

    #[test]
    fn measured_rates_examples() {
        let run = run_seeded(&cfg(3, 0, 1, 2, Scheme::Optimal), 1, DeliveryOrder::Forward).unwrap();
        assert_eq!(triple(&run.rates.rates), (Rate::integer(1), Rate::integer(1), Rate::integer(2)));
        let run = run_seeded(&cfg(4, 0, 1, 2, Scheme::Baseline), 1, DeliveryOrder::Forward).unwrap();
        assert_eq!(triple(&run.rates.rates), (Rate::integer(3), Rate::integer(3), Rate::integer(12)));
        assert!(run.rates.is_symmetric());
        assert_eq!(run.rates.dealer_unicast, 4 * 3);
    }

    #[test]
    fn measured_equals_theoretical_with_longer_inputs() {
        for s in [Scheme::Optimal, Scheme::Baseline] {
            for k in 3..=6 {
                let c = cfg(k, 0, 3, 7, s);
                let run = run_seeded(&c, k as u64, DeliveryOrder::Forward).unwrap();
                assert_eq!(run.rates.rates, theoretical_rates(&c).unwrap());
                assert_eq!(run.rates.dealer_unicast, (k * c.key_len()) as u64);
            }
        }
    }

    #[test]
    fn golden_inputs_and_nodes() {
        let c = cfg(3, 0, 1, 2, Scheme::Optimal);
        let w: Vec<_> = [1, 0, 1].iter().map(|&v| SymbolVector::from_values(&[v], 2).unwrap()).collect();
        let run = run_protocol(&c, Some(&w), &mut ChaCha20Rng::seed_from_u64(0), DeliveryOrder::Forward).unwrap();
        for n in &run.nodes {
            assert_eq!(n.inbox.len(), 2);
            assert_eq!(n.recovered.as_ref().unwrap().values(), &[0]);
        }
        assert!(run_protocol(&c, Some(&w[..2]), &mut ChaCha20Rng::seed_from_u64(0), DeliveryOrder::Forward).is_err());
    }

    #[test]
    fn infeasible_config_is_refused() {
        let c = ProtocolConfig::demonstration(3, 1, 1, 2, Scheme::Optimal).unwrap();
        let run = run_seeded(&c, 0, DeliveryOrder::Forward).unwrap();
        assert!(run.collude(0, &[1]).is_ok());
        assert!(matches!(
            ProtocolConfig::new(3, 1, 1, 2, Scheme::Optimal),
            Err(ProtocolError::Infeasible { .. })
        ));
    }

    #[test]
    fn collude_examples() {
        let run = run_seeded(&cfg(3, 0, 1, 2, Scheme::Optimal), 5, DeliveryOrder::Forward).unwrap();
        let v = run.collude(0, &[]).unwrap();
        assert_eq!(v.observed.len(), 2);
        assert!(v.collected.is_empty());
        assert_eq!(v.own_input, run.inputs[0]);
        assert!(matches!(run.collude(0, &[1, 2]), Err(SimError::InvalidCollusion { .. })));
        assert!(matches!(run.collude(0, &[0]), Err(SimError::InvalidCollusion { .. })));

        let run = run_seeded(&cfg(4, 1, 1, 3, Scheme::Optimal), 5, DeliveryOrder::Forward).unwrap();
        let v = run.collude(1, &[2]).unwrap();
        assert_eq!(v.collected, vec![(2, run.inputs[2].clone(), run.nodes[2].key.clone())]);
        assert_eq!(v.observed.len(), 3);

        let run = run_seeded(&cfg(4, 1, 1, 3, Scheme::Baseline), 5, DeliveryOrder::Forward).unwrap();
        let v = run.collude(1, &[]).unwrap();
        assert_eq!(v.observed.len(), 3);
        assert!(v.observed.iter().all(|m| m.round == 1));
    }

    #[test]
    fn sweep_examples() {
        let grid: Vec<_> = (3..=5).map(|k| cfg(k, 0, 1, 2, Scheme::Optimal)).collect();
        let report = sweep(&grid, 100, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert!(report.all_passed());
        for row in &report.rows {
            assert_eq!(row.recoveries, 100);
            assert_eq!(row.measured.source_key, Rate::integer(row.config.users() as u64 - 1));
        }
        assert!(sweep(&grid, 0, &mut ChaCha20Rng::seed_from_u64(9)).unwrap().is_empty());

        let both = [cfg(3, 0, 1, 2, Scheme::Optimal), cfg(3, 0, 1, 2, Scheme::Baseline)];
        let r = sweep(&both, 3, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let (o, b) = (r.row(3, Scheme::Optimal).unwrap(), r.row(3, Scheme::Baseline).unwrap());
        assert_eq!(b.measured.message.0 / o.measured.message.0, 2.into());
        assert_eq!(b.measured.key.0 / o.measured.key.0, 2.into());
        assert_eq!(b.measured.source_key.0 / o.measured.source_key.0, 3.into());
    }

    #[test]
    fn replay_round_trip_and_tamper_detection() {
        let c = cfg(4, 1, 2, 5, Scheme::Baseline);
        let run = run_seeded(&c, 42, DeliveryOrder::Forward).unwrap();
        let replay = Replay::from_run(&run, 42);
        let mut buf = Vec::new();
        replay.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 3);
        assert!(text.lines().next().unwrap().contains("\"seed\":42"));
        let back = Replay::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, replay);
        assert_eq!(back.verify().unwrap().transcript, run.transcript);

        let mut tampered = back.clone();
        tampered.records[3].symbols[0] = (tampered.records[3].symbols[0] + 1) % 5;
        assert!(matches!(tampered.verify(), Err(SimError::Replay(_))));
        assert!(Replay::read_jsonl("".as_bytes()).is_err());
        let bad = format!("{}\n{{\"round\":0,\"sender\":1,\"symbols\":[9]}}\n", text.lines().next().unwrap());
        assert!(Replay::read_jsonl(bad.as_bytes()).is_err());
    }

    #[test]
    fn run_report_serializes() {
        let run = run_seeded(&cfg(3, 0, 1, 2, Scheme::Optimal), 3, DeliveryOrder::Forward).unwrap();
        let v = serde_json::to_value(&run).unwrap();
        assert_eq!(v["transcript"]["K"], 3);
        assert_eq!(v["rates"]["rates"]["R_ZSigma"]["num"], 2);
        assert_eq!(v["rates"]["dealer_unicast"], 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn delivery_order_does_not_change_recovery(
            k in 3usize..7, l in 1usize..4, qi in 0usize..4, baseline: bool, seed: u64, shuffle: u64,
        ) {
            let q = [2, 3, 5, 65_537][qi];
            let s = if baseline { Scheme::Baseline } else { Scheme::Optimal };
            let c = cfg(k, 0, l, q, s);
            let fwd = run_seeded(&c, seed, DeliveryOrder::Forward).unwrap();
            let rev = run_seeded(&c, seed, DeliveryOrder::Reverse).unwrap();
            let shf = run_seeded(&c, seed, DeliveryOrder::Shuffled(shuffle)).unwrap();
            prop_assert_eq!(&fwd.transcript.recovered, &rev.transcript.recovered);
            prop_assert_eq!(&fwd.transcript.recovered, &shf.transcript.recovered);
            let sum = vec_sum(&fwd.inputs, l, c.modulus()).unwrap();
            prop_assert!(fwd.transcript.recovered.iter().all(|r| *r == sum));
        }

        #[test]
        fn same_seed_same_transcript(k in 3usize..7, seed: u64, baseline: bool) {
            let s = if baseline { Scheme::Baseline } else { Scheme::Optimal };
            let c = cfg(k, k - 3, 2, 11, s);
            let a = run_seeded(&c, seed, DeliveryOrder::Forward).unwrap();
            let b = run_seeded(&c, seed, DeliveryOrder::Forward).unwrap();
            prop_assert_eq!(&a.transcript, &b.transcript);
            prop_assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
        }
    }
}
