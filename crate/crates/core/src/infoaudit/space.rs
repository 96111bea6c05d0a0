// SPDX-License-Identifier: Apache-2.0

//! The finite uniform probability space over every primitive random symbol.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::field::SymbolVector;
use crate::protocol::{
    derive_individual_keys, user_messages, BaselineRound, Message, ProtocolConfig, Scheme,
    SourceKey,
};

use super::AuditError;

/// Default enumeration budget: 2^24 outcomes.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// One primitive uniform variable of the seed space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedComponent {
    pub name: String,
    /// Number of digits.
    pub length: usize,
    /// Radix of each digit: `q` for field symbols, `(K-1)!` for a baseline
    /// round permutation.
    pub radix: u64,
}

/// Everything determined by one seed assignment.
#[derive(Debug, Clone)]
pub struct Realization {
    pub inputs: Vec<SymbolVector>,
    pub source: SourceKey,
    pub keys: Vec<SymbolVector>,
    pub messages: Vec<Message>,
    /// `observed[k][i]`: symbols of every message from `i` that reaches `k`,
    /// in round order.
    pub observed: Vec<Vec<Vec<u64>>>,
    /// `sent[i]`: every symbol user `i` transmits, in round order.
    pub sent: Vec<Vec<u64>>,
    pub input_sum: SymbolVector,
}

type Evaluator = dyn Fn(&Realization, &mut Vec<u64>) + Send + Sync;

/// A named deterministic function of the seed assignment.
#[derive(Clone)]
pub struct DerivedVariable {
    name: String,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for DerivedVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("DerivedVariable").field(&self.name).finish()
    }
}

impl DerivedVariable {
    /// A variable with an arbitrary evaluator. The evaluator appends the
    /// value's symbols to the buffer and must be deterministic.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(&Realization, &mut Vec<u64>) + Send + Sync + 'static,
    ) -> Self {
        DerivedVariable { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Appends this variable's value to `out`, prefixed by its length so
    /// that concatenated values stay unambiguous.
    pub fn evaluate_into(&self, r: &Realization, out: &mut Vec<u64>) {
        let at = out.len();
        out.push(0);
        (self.eval)(r, out);
        out[at] = (out.len() - at - 1) as u64;
    }

    pub fn evaluate(&self, r: &Realization) -> Vec<u64> {
        let mut v = Vec::new();
        (self.eval)(r, &mut v);
        v
    }

    /// `W_k`.
    pub fn input(k: usize) -> Self {
        Self::custom(format!("W{k}"), move |r, out| out.extend_from_slice(r.inputs[k].values()))
    }

    /// `Z_k`.
    pub fn key(k: usize) -> Self {
        Self::custom(format!("Z{k}"), move |r, out| out.extend_from_slice(r.keys[k].values()))
    }

    /// Everything user `k` transmits, `X_k`.
    pub fn message(k: usize) -> Self {
        Self::custom(format!("X{k}"), move |r, out| out.extend_from_slice(&r.sent[k]))
    }

    /// What `observer` receives from `sender`. Equals `X_sender` for the
    /// broadcast scheme.
    pub fn observed(sender: usize, observer: usize) -> Self {
        Self::custom(format!("X{sender}->{observer}"), move |r, out| {
            out.extend_from_slice(&r.observed[observer][sender])
        })
    }

    /// `sum_i W_i`.
    pub fn input_sum() -> Self {
        Self::custom("sumW", |r, out| out.extend_from_slice(r.input_sum.values()))
    }

    /// Elementwise sum of the inputs of `users`.
    pub fn partial_input_sum(users: &[usize]) -> Self {
        let users = users.to_vec();
        let name = format!("sumW{users:?}");
        Self::custom(name, move |r, out| {
            let mut acc = r.inputs[users[0]].clone();
            for &u in &users[1..] {
                acc.add_assign_checked(&r.inputs[u]).expect("inputs share one shape");
            }
            out.extend_from_slice(acc.values());
        })
    }

    /// A degenerate variable with a single value.
    pub fn constant() -> Self {
        Self::custom("const", |_, out| out.push(0))
    }

    /// `C_S = {W_i, Z_i}_{i in S}` as a list of variables.
    pub fn collusion(users: &[usize]) -> Vec<Self> {
        users.iter().flat_map(|&i| [Self::input(i), Self::key(i)]).collect()
    }
}

/// The `n`-th permutation of `0..len` in lexicographic order.
pub fn permutation_from_rank(mut rank: u64, len: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..len).collect();
    let mut out = Vec::with_capacity(len);
    for i in (0..len).rev() {
        let f = factorial(i);
        let pick = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(pick));
    }
    out
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Enumerable uniform space over all inputs and source-key randomness.
#[derive(Debug, Clone)]
pub struct SeedSpace {
    config: ProtocolConfig,
    layout: Vec<SeedComponent>,
    outcomes: u64,
    workers: usize,
    cache: Arc<OnceLock<Vec<Realization>>>,
}

/// Spaces up to this many outcomes keep every realization in memory after
/// the first enumeration.
pub const CACHE_LIMIT: u64 = 1 << 16;

/// Outcome count for `cfg`, saturating at `u128::MAX`.
pub fn outcome_count(cfg: &ProtocolConfig) -> u128 {
    layout(cfg)
        .iter()
        .try_fold(1u128, |acc, c| {
            (0..c.length).try_fold(acc, |a, _| a.checked_mul(c.radix as u128))
        })
        .unwrap_or(u128::MAX)
}

fn layout(cfg: &ProtocolConfig) -> Vec<SeedComponent> {
    let (k, l, q) = (cfg.users(), cfg.input_len(), cfg.modulus().get());
    let mut out: Vec<SeedComponent> = (0..k)
        .map(|i| SeedComponent { name: format!("W{i}"), length: l, radix: q })
        .collect();
    match cfg.scheme() {
        Scheme::Optimal => {
            out.extend((0..k - 1).map(|j| SeedComponent { name: format!("N{j}"), length: l, radix: q }));
        }
        Scheme::Baseline => {
            for r in 0..k {
                out.extend((0..k - 2).map(|j| SeedComponent {
                    name: format!("N{r}.{j}"),
                    length: l,
                    radix: q,
                }));
            }
            out.extend((0..k).map(|r| SeedComponent {
                name: format!("perm{r}"),
                length: 1,
                radix: factorial(k - 1),
            }));
        }
    }
    out
}

impl SeedSpace {
    /// Lays out the seed space for `cfg`, failing before any enumeration
    /// when the outcome count exceeds `budget`.
    pub fn build(cfg: &ProtocolConfig, budget: u64) -> Result<Self, AuditError> {
        let required = outcome_count(cfg);
        if required > budget as u128 {
            return Err(AuditError::BudgetExceeded { required, budget });
        }
        Ok(SeedSpace {
            config: *cfg,
            layout: layout(cfg),
            outcomes: required as u64,
            workers: 1,
            cache: Arc::new(OnceLock::new()),
        })
    }

    /// Number of threads used for enumeration.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn layout(&self) -> &[SeedComponent] {
        &self.layout
    }

    /// Total number of equally likely outcomes.
    pub fn outcome_count(&self) -> u64 {
        self.outcomes
    }

    /// The variables every space provides: `W_k`, `Z_k`, `X_k`, `sum W`.
    pub fn registered(&self) -> Vec<DerivedVariable> {
        let k = self.config.users();
        let mut v: Vec<_> = (0..k).map(DerivedVariable::input).collect();
        v.extend((0..k).map(DerivedVariable::key));
        v.extend((0..k).map(DerivedVariable::message));
        v.push(DerivedVariable::input_sum());
        v
    }

    /// Looks up a registered variable by name.
    pub fn variable(&self, name: &str) -> Option<DerivedVariable> {
        self.registered().into_iter().find(|v| v.name() == name)
    }

    /// Calls `f` on every realization in `range`, in index order.
    pub fn for_each_in<F: FnMut(&Realization)>(&self, range: std::ops::Range<u64>, mut f: F) {
        if self.outcomes <= CACHE_LIMIT {
            let all = self.cache.get_or_init(|| (0..self.outcomes).map(|i| self.realize(i)).collect());
            all[range.start as usize..range.end as usize].iter().for_each(f);
        } else {
            for idx in range {
                f(&self.realize(idx));
            }
        }
    }

    /// Decodes outcome `index` and runs the protocol on it.
    pub fn realize(&self, index: u64) -> Realization {
        assert!(index < self.outcomes, "outcome {index} out of range");
        let cfg = &self.config;
        let (k, l, m) = (cfg.users(), cfg.input_len(), cfg.modulus());
        let mut rest = index;
        let mut next = |radix: u64| {
            let d = rest % radix;
            rest /= radix;
            d
        };
        let q = m.get();
        let vector = |next: &mut dyn FnMut(u64) -> u64| {
            SymbolVector::new((0..l).map(|_| next(q)).collect(), m).expect("L >= 1")
        };
        let inputs: Vec<SymbolVector> = (0..k).map(|_| vector(&mut next)).collect();
        let source = match cfg.scheme() {
            Scheme::Optimal => SourceKey::Optimal {
                seeds: (0..k - 1).map(|_| vector(&mut next)).collect(),
            },
            Scheme::Baseline => {
                let seeds: Vec<Vec<SymbolVector>> = (0..k)
                    .map(|_| (0..k - 2).map(|_| vector(&mut next)).collect())
                    .collect();
                let perms = factorial(k - 1);
                let rounds = seeds
                    .into_iter()
                    .map(|s| {
                        let p = permutation_from_rank(next(perms), k - 1);
                        BaselineRound::new(s, p).expect("well-formed round")
                    })
                    .collect();
                SourceKey::Baseline { rounds }
            }
        };
        let keys = derive_individual_keys(&source, cfg)
            .expect("seed layout matches the configuration")
            .into_keys();
        let mut messages = Vec::new();
        for (user, (w, z)) in inputs.iter().zip(&keys).enumerate() {
            messages.extend(user_messages(cfg, user, w, z).expect("shapes match"));
        }
        messages.sort_by_key(|msg| (msg.round, msg.sender));
        let mut observed = vec![vec![Vec::new(); k]; k];
        let mut sent = vec![Vec::new(); k];
        for msg in &messages {
            sent[msg.sender].extend_from_slice(msg.symbols.values());
            for (obs, row) in observed.iter_mut().enumerate() {
                if msg.reaches(obs) {
                    row[msg.sender].extend_from_slice(msg.symbols.values());
                }
            }
        }
        let mut input_sum = inputs[0].clone();
        for w in &inputs[1..] {
            input_sum.add_assign_checked(w).expect("inputs share one shape");
        }
        Realization { inputs, source, keys, messages, observed, sent, input_sum }
    }
}
