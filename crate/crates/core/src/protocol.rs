// SPDX-License-Identifier: Apache-2.0

//! The decentralized secure aggregation schemes.
//!
//! Two schemes are implemented over a prime field:
//!
//! * [`Scheme::Optimal`]: a trusted dealer draws `K - 1` uniform vectors
//!   `N_1..N_{K-1}` and hands user `k` the key `Z_k = N_k`, with the last user
//!   receiving `Z_K = -(N_1 + ... + N_{K-1})`. Keys sum to zero and any `K - 1`
//!   of them are independent. Each user broadcasts `X_k = W_k + Z_k` once and
//!   recovers the total as `sum_{i != k} X_i + W_k + Z_k`.
//! * [`Scheme::Baseline`]: `K` rounds of single-server aggregation. In round
//!   `r` user `r` acts as the server, the remaining `K - 1` users mask their
//!   inputs with a uniformly permuted zero-sum tuple of round keys and send
//!   the masked inputs to the server only.
//!
//! Users are indexed from zero throughout the crate.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::field::{sample_vector, vec_sum, FieldError, Modulus, SymbolVector};

/// Errors raised by the protocol layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("infeasible configuration: K = {users}, T = {threshold} (secure aggregation needs K >= 3 and T <= K - 3)")]
    Infeasible { users: usize, threshold: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("user {user} is missing the message from user {sender}")]
    MissingMessage { user: usize, sender: usize },
    #[error("user {user} received an unexpected message from user {sender}")]
    UnexpectedMessage { user: usize, sender: usize },
    #[error("user index {user} out of range for K = {users}")]
    InvalidUser { user: usize, users: usize },
    #[error(transparent)]
    Field(FieldError),
}

impl From<FieldError> for ProtocolError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::ShapeMismatch(msg) => ProtocolError::ShapeMismatch(msg),
            FieldError::ModulusMismatch { left, right } => {
                ProtocolError::ShapeMismatch(format!("modulus {left} vs {right}"))
            }
            other => ProtocolError::Field(other),
        }
    }
}

/// Which aggregation scheme a configuration runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Optimal,
    Baseline,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Optimal => "optimal",
            Scheme::Baseline => "baseline",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "optimal" | "proposed" => Ok(Scheme::Optimal),
            "baseline" => Ok(Scheme::Baseline),
            other => Err(format!("unknown scheme `{other}` (expected optimal or baseline)")),
        }
    }
}

/// Result of checking a `(K, T)` pair against the feasibility region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// Secure aggregation is possible iff `K >= 3` and `T <= K - 3`.
pub fn feasibility_check(users: usize, threshold: usize) -> Feasibility {
    if users >= 3 && threshold + 3 <= users {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible
    }
}

/// Parameters of one aggregation instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct ProtocolConfig {
    #[serde(rename = "K")]
    users: usize,
    #[serde(rename = "T")]
    threshold: usize,
    #[serde(rename = "L")]
    input_len: usize,
    #[serde(rename = "q")]
    modulus: Modulus,
    scheme: Scheme,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    demonstration: bool,
}

#[derive(Deserialize)]
struct RawConfig {
    #[serde(rename = "K")]
    users: usize,
    #[serde(rename = "T")]
    threshold: usize,
    #[serde(rename = "L")]
    input_len: usize,
    #[serde(rename = "q")]
    modulus: u64,
    scheme: Scheme,
    #[serde(default)]
    demonstration: bool,
}

impl TryFrom<RawConfig> for ProtocolConfig {
    type Error = ProtocolError;

    fn try_from(r: RawConfig) -> Result<Self, Self::Error> {
        ProtocolConfig::build(r.users, r.threshold, r.input_len, r.modulus, r.scheme, r.demonstration)
    }
}

impl ProtocolConfig {
    /// Builds a configuration inside the feasibility region.
    pub fn new(
        users: usize,
        threshold: usize,
        input_len: usize,
        q: u64,
        scheme: Scheme,
    ) -> Result<Self, ProtocolError> {
        Self::build(users, threshold, input_len, q, scheme, false)
    }

    /// Builds a configuration that may lie outside the feasibility region.
    ///
    /// Only the leakage demonstrations use this; audits on such a
    /// configuration are expected to report leakage.
    pub fn demonstration(
        users: usize,
        threshold: usize,
        input_len: usize,
        q: u64,
        scheme: Scheme,
    ) -> Result<Self, ProtocolError> {
        Self::build(users, threshold, input_len, q, scheme, true)
    }

    fn build(
        users: usize,
        threshold: usize,
        input_len: usize,
        q: u64,
        scheme: Scheme,
        demonstration: bool,
    ) -> Result<Self, ProtocolError> {
        let modulus = Modulus::new(q)?;
        if input_len == 0 {
            return Err(ProtocolError::InvalidConfig("L must be at least 1".into()));
        }
        if users < 2 {
            return Err(ProtocolError::InvalidConfig(format!("K = {users}: need at least 2 users")));
        }
        if scheme == Scheme::Baseline && users < 3 {
            return Err(ProtocolError::InvalidConfig(
                "the baseline scheme needs at least 3 users".into(),
            ));
        }
        if threshold >= users {
            return Err(ProtocolError::InvalidConfig(format!(
                "T = {threshold} must be smaller than K = {users}"
            )));
        }
        if !demonstration && feasibility_check(users, threshold) == Feasibility::Infeasible {
            return Err(ProtocolError::Infeasible { users, threshold });
        }
        Ok(ProtocolConfig {
            users,
            threshold,
            input_len,
            modulus,
            scheme,
            demonstration,
        })
    }

    /// Number of users `K`.
    pub fn users(&self) -> usize {
        self.users
    }

    /// Collusion threshold `T`.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Input length `L` in symbols.
    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn is_demonstration(&self) -> bool {
        self.demonstration
    }

    pub fn feasibility(&self) -> Feasibility {
        feasibility_check(self.users, self.threshold)
    }

    /// Same parameters with a different scheme.
    pub fn with_scheme(&self, scheme: Scheme) -> Result<Self, ProtocolError> {
        Self::build(self.users, self.threshold, self.input_len, self.modulus.get(), scheme, self.demonstration)
    }

    /// Individual key length `L_Z`.
    pub fn key_len(&self) -> usize {
        match self.scheme {
            Scheme::Optimal => self.input_len,
            Scheme::Baseline => (self.users - 1) * self.input_len,
        }
    }

    /// Symbols each user transmits over the whole protocol.
    pub fn message_len(&self) -> usize {
        self.key_len()
    }

    pub(crate) fn check_user(&self, user: usize) -> Result<(), ProtocolError> {
        if user < self.users {
            Ok(())
        } else {
            Err(ProtocolError::InvalidUser { user, users: self.users })
        }
    }

    fn require_feasible(&self) -> Result<(), ProtocolError> {
        if self.demonstration || self.feasibility() == Feasibility::Feasible {
            Ok(())
        } else {
            Err(ProtocolError::Infeasible { users: self.users, threshold: self.threshold })
        }
    }
}

/// One round of the baseline scheme: `K - 2` independent seeds, the closing
/// key that makes the round's keys sum to zero, and the assignment of round
/// keys to senders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaselineRound {
    seeds: Vec<SymbolVector>,
    closing: SymbolVector,
    /// `permutation[pos]` is the round-key index handed to the `pos`-th
    /// sender, senders listed in increasing user order with the server
    /// skipped.
    permutation: Vec<usize>,
}

impl BaselineRound {
    pub fn new(seeds: Vec<SymbolVector>, permutation: Vec<usize>) -> Result<Self, ProtocolError> {
        let first = seeds
            .first()
            .ok_or_else(|| ProtocolError::ShapeMismatch("a baseline round needs at least one seed".into()))?;
        let (len, modulus) = (first.len(), first.modulus());
        let n_keys = seeds.len() + 1;
        let mut seen = vec![false; n_keys];
        if permutation.len() != n_keys {
            return Err(ProtocolError::ShapeMismatch(format!(
                "permutation has {} entries, expected {n_keys}",
                permutation.len()
            )));
        }
        for &p in &permutation {
            if p >= n_keys || std::mem::replace(&mut seen[p], true) {
                return Err(ProtocolError::ShapeMismatch(format!(
                    "{permutation:?} is not a permutation of 0..{n_keys}"
                )));
            }
        }
        let closing = vec_sum(&seeds, len, modulus)?.negated();
        Ok(BaselineRound { seeds, closing, permutation })
    }

    pub fn seeds(&self) -> &[SymbolVector] {
        &self.seeds
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Round key `index`, where the last index is the closing key.
    pub fn round_key(&self, index: usize) -> &SymbolVector {
        if index < self.seeds.len() {
            &self.seeds[index]
        } else {
            &self.closing
        }
    }

    /// All `K - 1` round keys in index order.
    pub fn round_keys(&self) -> impl Iterator<Item = &SymbolVector> {
        self.seeds.iter().chain(std::iter::once(&self.closing))
    }
}

/// The dealer's master randomness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum SourceKey {
    /// `N_1..N_{K-1}`.
    Optimal { seeds: Vec<SymbolVector> },
    /// One entry per round; round `r` has user `r` as its server.
    Baseline { rounds: Vec<BaselineRound> },
}

impl SourceKey {
    /// Symbols the dealer's key material occupies, `L_{Z_Sigma}`.
    ///
    /// For the baseline this counts every materialized round key, closing
    /// keys included, which is `K (K - 1) L`.
    pub fn symbol_count(&self) -> usize {
        match self {
            SourceKey::Optimal { seeds } => seeds.iter().map(SymbolVector::len).sum(),
            SourceKey::Baseline { rounds } => rounds
                .iter()
                .flat_map(BaselineRound::round_keys)
                .map(SymbolVector::len)
                .sum(),
        }
    }

    /// Independent uniform symbols behind the source key.
    pub fn independent_symbol_count(&self) -> usize {
        match self {
            SourceKey::Optimal { .. } => self.symbol_count(),
            SourceKey::Baseline { rounds } => rounds
                .iter()
                .flat_map(|r| r.seeds.iter())
                .map(SymbolVector::len)
                .sum(),
        }
    }

    fn check_shape(&self, cfg: &ProtocolConfig) -> Result<(), ProtocolError> {
        let (k, l, m) = (cfg.users(), cfg.input_len(), cfg.modulus());
        let check_vec = |v: &SymbolVector| {
            if v.has_shape(l, m) {
                Ok(())
            } else {
                Err(ProtocolError::ShapeMismatch(format!(
                    "seed of length {} mod {} where length {l} mod {m} was expected",
                    v.len(),
                    v.modulus()
                )))
            }
        };
        match (self, cfg.scheme()) {
            (SourceKey::Optimal { seeds }, Scheme::Optimal) => {
                if seeds.len() != k - 1 {
                    return Err(ProtocolError::ShapeMismatch(format!(
                        "{} seeds for K = {k}, expected {}",
                        seeds.len(),
                        k - 1
                    )));
                }
                seeds.iter().try_for_each(check_vec)
            }
            (SourceKey::Baseline { rounds }, Scheme::Baseline) => {
                if rounds.len() != k {
                    return Err(ProtocolError::ShapeMismatch(format!(
                        "{} rounds for K = {k}",
                        rounds.len()
                    )));
                }
                for r in rounds {
                    if r.seeds.len() != k - 2 {
                        return Err(ProtocolError::ShapeMismatch(format!(
                            "{} seeds in a round for K = {k}, expected {}",
                            r.seeds.len(),
                            k - 2
                        )));
                    }
                    r.seeds.iter().try_for_each(check_vec)?;
                }
                Ok(())
            }
            _ => Err(ProtocolError::ShapeMismatch(
                "source key scheme does not match the configuration".into(),
            )),
        }
    }
}

/// Dealer step: draws the source key for `cfg`.
pub fn generate_source_key<R: RngCore + ?Sized>(
    cfg: &ProtocolConfig,
    rng: &mut R,
) -> Result<SourceKey, ProtocolError> {
    cfg.require_feasible()?;
    let (k, l, m) = (cfg.users(), cfg.input_len(), cfg.modulus());
    match cfg.scheme() {
        Scheme::Optimal => {
            let seeds = (0..k - 1)
                .map(|_| sample_vector(l, m, rng))
                .collect::<Result<_, _>>()?;
            Ok(SourceKey::Optimal { seeds })
        }
        Scheme::Baseline => {
            let mut rounds = Vec::with_capacity(k);
            for _ in 0..k {
                let seeds = (0..k - 2)
                    .map(|_| sample_vector(l, m, rng))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut permutation: Vec<usize> = (0..k - 1).collect();
                permutation.shuffle(rng);
                rounds.push(BaselineRound::new(seeds, permutation)?);
            }
            Ok(SourceKey::Baseline { rounds })
        }
    }
}

/// Individual keys `Z_1..Z_K`, each of length `L_Z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct KeyAssignment {
    keys: Vec<SymbolVector>,
}

impl KeyAssignment {
    pub fn key(&self, user: usize) -> Option<&SymbolVector> {
        self.keys.get(user)
    }

    pub fn keys(&self) -> &[SymbolVector] {
        &self.keys
    }

    pub fn into_keys(self) -> Vec<SymbolVector> {
        self.keys
    }
}

/// Position of `round` among the rounds in which `user` sends.
fn sender_round_slot(user: usize, round: usize) -> usize {
    debug_assert_ne!(user, round);
    if round < user {
        round
    } else {
        round - 1
    }
}

/// Position of `user` among the senders of `round`.
fn sender_position(user: usize, round: usize) -> usize {
    debug_assert_ne!(user, round);
    if user < round {
        user
    } else {
        user - 1
    }
}

/// Derives every user's individual key from the source key.
pub fn derive_individual_keys(
    src: &SourceKey,
    cfg: &ProtocolConfig,
) -> Result<KeyAssignment, ProtocolError> {
    src.check_shape(cfg)?;
    let k = cfg.users();
    let keys = match src {
        SourceKey::Optimal { seeds } => {
            let last = vec_sum(seeds, cfg.input_len(), cfg.modulus())?.negated();
            seeds.iter().cloned().chain(std::iter::once(last)).collect()
        }
        SourceKey::Baseline { rounds } => (0..k)
            .map(|user| {
                let parts: Vec<SymbolVector> = (0..k)
                    .filter(|&r| r != user)
                    .map(|r| {
                        let round = &rounds[r];
                        round.round_key(round.permutation[sender_position(user, r)]).clone()
                    })
                    .collect();
                SymbolVector::concat(&parts)
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(KeyAssignment { keys })
}

/// The round key user `user` holds for baseline round `round`.
pub fn baseline_round_key(
    cfg: &ProtocolConfig,
    user: usize,
    key: &SymbolVector,
    round: usize,
) -> Result<SymbolVector, ProtocolError> {
    cfg.check_user(user)?;
    cfg.check_user(round)?;
    if user == round {
        return Err(ProtocolError::InvalidConfig(format!(
            "user {user} is the server of round {round} and holds no key for it"
        )));
    }
    let l = cfg.input_len();
    Ok(key.slice(sender_round_slot(user, round) * l, l)?)
}

/// Masks an input with a key: `X = W + Z`.
pub fn encode_message(input: &SymbolVector, key: &SymbolVector) -> Result<SymbolVector, ProtocolError> {
    Ok(input.try_add(key)?)
}

/// A transmitted message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub round: usize,
    pub sender: usize,
    /// `None` for a broadcast to every other user.
    pub recipient: Option<usize>,
    pub symbols: SymbolVector,
}

impl Message {
    /// Whether `user` receives this message.
    pub fn reaches(&self, user: usize) -> bool {
        self.sender != user && self.recipient.is_none_or(|r| r == user)
    }
}

/// All messages user `user` sends over the protocol, in round order.
pub fn user_messages(
    cfg: &ProtocolConfig,
    user: usize,
    input: &SymbolVector,
    key: &SymbolVector,
) -> Result<Vec<Message>, ProtocolError> {
    cfg.check_user(user)?;
    if !input.has_shape(cfg.input_len(), cfg.modulus()) || !key.has_shape(cfg.key_len(), cfg.modulus()) {
        return Err(ProtocolError::ShapeMismatch(format!(
            "user {user}: input/key shape does not match the configuration"
        )));
    }
    match cfg.scheme() {
        Scheme::Optimal => Ok(vec![Message {
            round: 0,
            sender: user,
            recipient: None,
            symbols: encode_message(input, key)?,
        }]),
        Scheme::Baseline => (0..cfg.users())
            .filter(|&r| r != user)
            .map(|r| {
                let round_key = baseline_round_key(cfg, user, key, r)?;
                Ok(Message {
                    round: r,
                    sender: user,
                    recipient: Some(r),
                    symbols: encode_message(input, &round_key)?,
                })
            })
            .collect(),
    }
}

fn check_inbox(
    users: usize,
    user: usize,
    received: &BTreeMap<usize, SymbolVector>,
) -> Result<(), ProtocolError> {
    if user >= users {
        return Err(ProtocolError::InvalidUser { user, users });
    }
    if let Some(&sender) = received.keys().find(|&&s| s == user || s >= users) {
        return Err(ProtocolError::UnexpectedMessage { user, sender });
    }
    if let Some(sender) = (0..users).find(|&s| s != user && !received.contains_key(&s)) {
        return Err(ProtocolError::MissingMessage { user, sender });
    }
    Ok(())
}

/// Optimal-scheme decoding at user `user`: `sum_{i != k} X_i + W_k + Z_k`.
pub fn recover_sum(
    users: usize,
    user: usize,
    received: &BTreeMap<usize, SymbolVector>,
    input: &SymbolVector,
    key: &SymbolVector,
) -> Result<SymbolVector, ProtocolError> {
    check_inbox(users, user, received)?;
    let mut acc = input.try_add(key)?;
    for x in received.values() {
        acc.add_assign_checked(x)?;
    }
    Ok(acc)
}

/// Baseline decoding at the server of a round: the round keys cancel, so the
/// server adds the received messages and its own input.
pub fn baseline_server_decode(
    users: usize,
    server: usize,
    received: &BTreeMap<usize, SymbolVector>,
    input: &SymbolVector,
) -> Result<SymbolVector, ProtocolError> {
    check_inbox(users, server, received)?;
    let mut acc = input.clone();
    for x in received.values() {
        acc.add_assign_checked(x)?;
    }
    Ok(acc)
}

/// Scheme-aware decoding. `received` maps sender to the message addressed
/// to (or broadcast past) `user` in the round where `user` decodes.
pub fn decode(
    cfg: &ProtocolConfig,
    user: usize,
    received: &BTreeMap<usize, SymbolVector>,
    input: &SymbolVector,
    key: &SymbolVector,
) -> Result<SymbolVector, ProtocolError> {
    match cfg.scheme() {
        Scheme::Optimal => recover_sum(cfg.users(), user, received, input, key),
        Scheme::Baseline => baseline_server_decode(cfg.users(), user, received, input),
    }
}

/// The record of one protocol execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    #[serde(flatten)]
    pub config: ProtocolConfig,
    pub messages: Vec<Message>,
    pub recovered: Vec<SymbolVector>,
}

#[derive(Deserialize)]
struct RawMessage {
    round: usize,
    sender: usize,
    recipient: Option<usize>,
    symbols: Vec<u64>,
}

#[derive(Deserialize)]
struct RawTranscript {
    #[serde(flatten)]
    config: ProtocolConfig,
    messages: Vec<RawMessage>,
    recovered: Vec<Vec<u64>>,
}

impl<'de> Deserialize<'de> for Transcript {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawTranscript::deserialize(d)?;
        let m = raw.config.modulus();
        let vector = |v: Vec<u64>| {
            if v.iter().any(|&s| s >= m.get()) {
                return Err(D::Error::custom(format!("symbol out of range for q = {m}")));
            }
            SymbolVector::new(v, m).map_err(D::Error::custom)
        };
        let messages = raw
            .messages
            .into_iter()
            .map(|r| {
                Ok(Message {
                    round: r.round,
                    sender: r.sender,
                    recipient: r.recipient,
                    symbols: vector(r.symbols)?,
                })
            })
            .collect::<Result<_, D::Error>>()?;
        let recovered = raw.recovered.into_iter().map(vector).collect::<Result<_, _>>()?;
        Ok(Transcript { config: raw.config, messages, recovered })
    }
}

impl Transcript {
    /// Messages delivered to `user`, in transcript order.
    pub fn observed_by(&self, user: usize) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(move |m| m.reaches(user))
    }

    /// Symbols transmitted by `user`.
    pub fn transmitted_symbols(&self, user: usize) -> usize {
        self.messages
            .iter()
            .filter(|m| m.sender == user)
            .map(|m| m.symbols.len())
            .sum()
    }
}

fn check_inputs(cfg: &ProtocolConfig, inputs: &[SymbolVector]) -> Result<(), ProtocolError> {
    if inputs.len() != cfg.users() {
        return Err(ProtocolError::ShapeMismatch(format!(
            "{} inputs for K = {}",
            inputs.len(),
            cfg.users()
        )));
    }
    if let Some(i) = inputs.iter().position(|w| !w.has_shape(cfg.input_len(), cfg.modulus())) {
        return Err(ProtocolError::ShapeMismatch(format!(
            "input of user {i} does not have length {} mod {}",
            cfg.input_len(),
            cfg.modulus()
        )));
    }
    Ok(())
}

/// Runs the baseline scheme: `K` rounds, round `r` aggregated at user `r`.
pub fn baseline_execute(
    cfg: &ProtocolConfig,
    inputs: &[SymbolVector],
    src: &SourceKey,
) -> Result<Transcript, ProtocolError> {
    if cfg.scheme() != Scheme::Baseline {
        return Err(ProtocolError::InvalidConfig("baseline_execute needs the baseline scheme".into()));
    }
    execute(cfg, inputs, src)
}

/// Runs either scheme directly, without the network simulator.
pub fn execute(
    cfg: &ProtocolConfig,
    inputs: &[SymbolVector],
    src: &SourceKey,
) -> Result<Transcript, ProtocolError> {
    cfg.require_feasible()?;
    check_inputs(cfg, inputs)?;
    let keys = derive_individual_keys(src, cfg)?;
    let mut messages = Vec::new();
    for (user, (w, z)) in inputs.iter().zip(keys.keys()).enumerate() {
        messages.extend(user_messages(cfg, user, w, z)?);
    }
    messages.sort_by_key(|m| (m.round, m.sender));
    let mut recovered = Vec::with_capacity(cfg.users());
    for (user, (w, z)) in inputs.iter().zip(keys.keys()).enumerate() {
        let received: BTreeMap<usize, SymbolVector> = messages
            .iter()
            .filter(|m| m.reaches(user))
            .filter(|m| cfg.scheme() == Scheme::Optimal || m.round == user)
            .map(|m| (m.sender, m.symbols.clone()))
            .collect();
        recovered.push(decode(cfg, user, &received, w, z)?);
    }
    Ok(Transcript { config: *cfg, messages, recovered })
}

/// An exact non-negative rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(pub Ratio<u64>);

impl Rate {
    pub fn new(num: u64, den: u64) -> Self {
        Rate(Ratio::new(num, den))
    }

    pub fn integer(n: u64) -> Self {
        Rate(Ratio::from_integer(n))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct RawRate {
    num: u64,
    den: u64,
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawRate { num: *self.0.numer(), den: *self.0.denom() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawRate::deserialize(d)?;
        if raw.den == 0 {
            return Err(serde::de::Error::custom("rate with zero denominator"));
        }
        Ok(Rate::new(raw.num, raw.den))
    }
}

/// Communication, individual key and source key rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateReport {
    #[serde(rename = "R_X")]
    pub message: Rate,
    #[serde(rename = "R_Z")]
    pub key: Rate,
    #[serde(rename = "R_ZSigma")]
    pub source_key: Rate,
}

impl RateReport {
    /// Rates from raw symbol counts normalized by the input length.
    pub fn from_counts(message: u64, key: u64, source_key: u64, input_len: u64) -> Self {
        RateReport {
            message: Rate::new(message, input_len),
            key: Rate::new(key, input_len),
            source_key: Rate::new(source_key, input_len),
        }
    }
}

impl fmt::Display for RateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.message, self.key, self.source_key)
    }
}

/// Rates each scheme achieves at `cfg`.
pub fn theoretical_rates(cfg: &ProtocolConfig) -> Result<RateReport, ProtocolError> {
    if cfg.feasibility() == Feasibility::Infeasible {
        return Err(ProtocolError::Infeasible { users: cfg.users(), threshold: cfg.threshold() });
    }
    let k = cfg.users() as u64;
    Ok(match cfg.scheme() {
        Scheme::Optimal => RateReport {
            message: Rate::integer(1),
            key: Rate::integer(1),
            source_key: Rate::integer(k - 1),
        },
        Scheme::Baseline => RateReport {
            message: Rate::integer(k - 1),
            key: Rate::integer(k - 1),
            source_key: Rate::integer(k * (k - 1)),
        },
    })
}
