// SPDX-License-Identifier: Apache-2.0

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::protocol::{ProtocolConfig, Scheme};

use super::measure::{conditional_entropy_result, conditional_mutual_information, entropy_result};
use super::space::{outcome_count, DerivedVariable as V, SeedSpace};
use super::{AuditError, AuditResult, ConfigEcho, Relation};

/// Largest `K` for which audits enumerate every collusion set.
const EXHAUSTIVE_SUBSETS_MAX_USERS: usize = 6;

/// Knobs for the audit drivers.
#[derive(Debug, Clone, Copy)]
pub struct AuditOptions {
    /// Number of random subsets audited per observer when `K` is too large
    /// for exhaustive subset enumeration.
    pub subset_sample: usize,
    pub sample_seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { subset_sample: 32, sample_seed: 0 }
    }
}

fn subsets_up_to(items: &[usize], max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=max_size.min(items.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&i| items[i]).collect());
            // advance to the next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&p| idx[p] != p + items.len() - size) else {
                break;
            };
            idx[pos] += 1;
            for p in pos + 1..size {
                idx[p] = idx[p - 1] + 1;
            }
        }
    }
    out
}

/// Collusion sets of size at most `max_size` for `observer`.
///
/// Exhaustive for `K <= 6`; above that the empty set plus a seeded random
/// sample of non-empty sets.
pub fn collusion_sets(users: usize, observer: usize, max_size: usize, opts: &AuditOptions) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..users).filter(|&i| i != observer).collect();
    if users <= EXHAUSTIVE_SUBSETS_MAX_USERS || max_size == 0 {
        return subsets_up_to(&others, max_size);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(opts.sample_seed ^ (observer as u64).rotate_left(32));
    let mut out = vec![Vec::new()];
    for _ in 0..opts.subset_sample {
        let size = 1 + (rand::Rng::random_range(&mut rng, 0..max_size.min(others.len())));
        let mut t: Vec<usize> = others.choose_multiple(&mut rng, size).copied().collect();
        t.sort_unstable();
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

fn check_user(cfg: &ProtocolConfig, user: usize) -> Result<(), AuditError> {
    cfg.check_user(user).map_err(AuditError::from)
}

fn normalize_collusion(cfg: &ProtocolConfig, observer: usize, collusion: &[usize]) -> Result<Vec<usize>, AuditError> {
    check_user(cfg, observer)?;
    let mut t = collusion.to_vec();
    t.sort_unstable();
    let invalid = |reason: &str| AuditError::InvalidCollusion {
        observer,
        collusion: collusion.to_vec(),
        reason: reason.into(),
    };
    if t.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("duplicate user"));
    }
    if t.iter().any(|&i| i >= cfg.users()) {
        return Err(invalid("user index out of range"));
    }
    if t.contains(&observer) {
        return Err(invalid("the observer cannot collude with itself"));
    }
    Ok(t)
}

fn others(users: usize, k: usize) -> Vec<usize> {
    (0..users).filter(|&i| i != k).collect()
}

fn observed_from(senders: &[usize], observer: usize) -> Vec<V> {
    senders.iter().map(|&i| V::observed(i, observer)).collect()
}

/// `H(sum W | received messages, W_k, Z_k)`, which must be exactly zero.
pub fn audit_recovery(space: &SeedSpace, k: usize) -> Result<AuditResult, AuditError> {
    let cfg = space.config();
    check_user(cfg, k)?;
    let mut given = observed_from(&others(cfg.users(), k), k);
    given.extend([V::input(k), V::key(k)]);
    let r = conditional_entropy_result(
        space,
        format!("recovery k={k}: H(sumW | X->{k}, W{k}, Z{k})"),
        &[V::input_sum()],
        &given,
        0.0,
        Relation::Equal,
    );
    let statement = if r.passed {
        format!("user {k} recovers the input sum")
    } else {
        format!("user {k} cannot recover the input sum")
    };
    Ok(r.with_statement(statement))
}

/// `I({X_i}_{i != k}; {W_i}_{i != k} | sum W, W_k, Z_k, C_T)`.
pub fn audit_security(space: &SeedSpace, k: usize, collusion: &[usize]) -> Result<AuditResult, AuditError> {
    let cfg = space.config();
    let t = normalize_collusion(cfg, k, collusion)?;
    if t.len() + 3 > cfg.users() && !cfg.is_demonstration() {
        return Err(AuditError::Infeasible { users: cfg.users(), size: t.len() });
    }
    let rest = others(cfg.users(), k);
    let a = observed_from(&rest, k);
    let b: Vec<V> = rest.iter().map(|&i| V::input(i)).collect();
    let mut c = vec![V::input_sum(), V::input(k), V::key(k)];
    c.extend(V::collusion(&t));
    let r = conditional_mutual_information(
        space,
        format!("security k={k} T={t:?}: I(X->{k}; W_-{k} | sumW, W{k}, Z{k}, C_T)"),
        &a,
        &b,
        &c,
    );
    let statement = if r.passed {
        format!("user {k} colluding with {t:?} learns nothing beyond the sum")
    } else {
        format!("user {k} colluding with {t:?} learns more than the sum")
    };
    Ok(r.with_statement(statement))
}

/// Key-structure properties and the converse-style identities, instantiated
/// on the configured scheme.
pub fn audit_key_structure(space: &SeedSpace, opts: &AuditOptions) -> Result<Vec<AuditResult>, AuditError> {
    let cfg = space.config();
    let (k_users, l) = (cfg.users(), cfg.input_len() as f64);
    let all: Vec<usize> = (0..k_users).collect();
    let mut out = Vec::new();

    let keys = |s: &[usize]| s.iter().map(|&i| V::key(i)).collect::<Vec<_>>();
    match cfg.scheme() {
        Scheme::Optimal => {
            // Every proper subset of keys is jointly uniform.
            let subsets: Vec<Vec<usize>> = if k_users <= EXHAUSTIVE_SUBSETS_MAX_USERS + 1 {
                subsets_up_to(&all, k_users - 1).into_iter().skip(1).collect()
            } else {
                (0..k_users)
                    .flat_map(|k| collusion_sets(k_users, k, k_users - 2, opts))
                    .filter(|s| !s.is_empty())
                    .collect()
            };
            for s in subsets {
                let expected = s.len() as f64 * l;
                out.push(
                    entropy_result(space, format!("H(Z{s:?})"), &keys(&s), expected)
                        .with_statement("any K-1 or fewer keys are mutually independent"),
                );
            }
            out.push(
                entropy_result(space, "H(Z_all)", &keys(&all), (k_users - 1) as f64 * l)
                    .with_statement("keys sum to zero, so all K keys carry K-1 units"),
            );
        }
        Scheme::Baseline => {
            for k in 0..k_users {
                out.push(
                    entropy_result(space, format!("H(Z{k})"), &[V::key(k)], (k_users - 1) as f64 * l)
                        .with_statement("one independent round key per sending round"),
                );
            }
            out.push(
                entropy_result(space, "H(Z_all)", &keys(&all), (k_users * (k_users - 2)) as f64 * l)
                    .with_statement("each round's keys form a uniform zero-sum tuple"),
            );
        }
    }

    for k in 0..k_users {
        let rest = others(k_users, k);
        let mut given = Vec::new();
        for &i in &rest {
            given.extend([V::input(i), V::key(i)]);
        }
        out.push(
            conditional_entropy_result(
                space,
                format!("H(X{k} | W_-{k}, Z_-{k})"),
                &[V::message(k)],
                &given,
                l,
                Relation::AtLeast,
            )
            .with_statement("consistent with the bound: each message carries at least L units given everyone else"),
        );
    }

    for k in 0..k_users {
        for kp in others(k_users, k) {
            out.push(
                conditional_mutual_information(
                    space,
                    format!("I(X{k}->{kp}; W{k} | W{kp}, Z{kp})"),
                    &[V::observed(k, kp)],
                    &[V::input(k)],
                    &[V::input(kp), V::key(kp)],
                )
                .with_statement("consistent with the identity: a message is independent of its own input given any other user's input and key"),
            );
        }
    }

    let max_t = k_users.saturating_sub(3);
    for k in 0..k_users {
        for t in collusion_sets(k_users, k, max_t, opts) {
            let tbar: Vec<usize> = others(k_users, k).into_iter().filter(|i| !t.contains(i)).collect();
            let mut cond = V::collusion(&t);
            cond.extend([V::input(k), V::key(k)]);
            let msgs = observed_from(&tbar, k);
            let w_tbar: Vec<V> = tbar.iter().map(|&i| V::input(i)).collect();

            out.push(
                conditional_entropy_result(
                    space,
                    format!("H(X{tbar:?}->{k} | C{t:?}, W{k}, Z{k})"),
                    &msgs,
                    &cond,
                    tbar.len() as f64 * l,
                    Relation::AtLeast,
                )
                .with_statement("consistent with the bound: unknown users' messages carry one input's worth each"),
            );

            let mut r = conditional_mutual_information(
                space,
                format!("I(X{tbar:?}->{k}; W{tbar:?} | C{t:?}, W{k}, Z{k})"),
                &msgs,
                &w_tbar,
                &cond,
            );
            r = AuditResult::new(r.quantity, r.value, l, Relation::Equal, r.exact_zero)
                .with_statement("consistent with the identity: only the partial sum (L units) is revealed");
            out.push(r);

            let mut key_cond = keys(&t);
            key_cond.push(V::key(k));
            out.push(
                conditional_entropy_result(
                    space,
                    format!("H(Z{tbar:?} | Z{t:?}, Z{k})"),
                    &keys(&tbar),
                    &key_cond,
                    (tbar.len() as f64 - 1.0) * l,
                    Relation::AtLeast,
                )
                .with_statement("consistent with the bound: unknown users' keys keep |T'|-1 units of randomness"),
            );
        }
    }
    Ok(out)
}

/// `I(X_{k'}; W_{k'} | C_{[K] \ {k'}})`: with every other user's input and
/// key known, the message of `k'` exposes its input.
///
/// Requires a demonstration configuration, since the implied collusion set
/// has size `K - 2`.
pub fn leakage_without_sum(space: &SeedSpace, k: usize, k_prime: usize) -> Result<AuditResult, AuditError> {
    let cfg = space.config();
    if !cfg.is_demonstration() {
        return Err(AuditError::OverrideRequired);
    }
    check_user(cfg, k)?;
    check_user(cfg, k_prime)?;
    if k == k_prime {
        return Err(AuditError::InvalidCollusion {
            observer: k,
            collusion: vec![],
            reason: "k and k' must differ".into(),
        });
    }
    let known: Vec<usize> = (0..cfg.users()).filter(|&i| i != k_prime).collect();
    let t: Vec<usize> = known.iter().copied().filter(|&i| i != k).collect();
    let r = conditional_mutual_information(
        space,
        format!("leakage k={k} k'={k_prime} T={t:?}: I(X{k_prime}->{k}; W{k_prime} | C_(T+{k}))"),
        &[V::observed(k_prime, k)],
        &[V::input(k_prime)],
        &V::collusion(&known),
    );
    let value = r.value;
    Ok(AuditResult::new(r.quantity, value, cfg.input_len() as f64, Relation::Equal, r.exact_zero)
        .with_statement(format!("input of user {k_prime} exposed to user {k}: {value:.6} q-ary units")))
}

/// Serializable bundle of audit results.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub config: ConfigEcho,
    pub units: &'static str,
    pub results: Vec<AuditResult>,
    pub passed: bool,
}

impl AuditReport {
    pub fn new(space: &SeedSpace, budget: u64, results: Vec<AuditResult>) -> Self {
        let passed = results.iter().all(|r| r.passed);
        AuditReport {
            config: ConfigEcho { config: *space.config(), outcomes: space.outcome_count(), budget },
            units: "q-ary",
            results,
            passed,
        }
    }

    pub fn in_bits(mut self) -> Self {
        let q = self.config.config.modulus().get();
        self.results = self.results.into_iter().map(|r| r.in_bits(q)).collect();
        self.units = "bits";
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

/// Recovery for every user, security for every collusion set up to the
/// configured threshold, and the key-structure checks.
pub fn full_audit(space: &SeedSpace, budget: u64, opts: &AuditOptions) -> Result<AuditReport, AuditError> {
    let cfg = space.config();
    let mut results = Vec::new();
    for k in 0..cfg.users() {
        results.push(audit_recovery(space, k)?);
    }
    for k in 0..cfg.users() {
        for t in collusion_sets(cfg.users(), k, cfg.threshold(), opts) {
            results.push(audit_security(space, k, &t)?);
        }
    }
    results.extend(audit_key_structure(space, opts)?);
    Ok(AuditReport::new(space, budget, results))
}

/// A smaller configuration that fits the budget, shrinking `L`, then `q`,
/// then `K`.
pub fn suggest_within_budget(cfg: &ProtocolConfig, budget: u64) -> Option<ProtocolConfig> {
    let (k, t, l, q) = (cfg.users(), cfg.threshold(), cfg.input_len(), cfg.modulus().get());
    let mut candidates = vec![(k, t, 1, q), (k, t, l, 2), (k, t, 1, 2)];
    candidates.extend((3..k).rev().map(|kk| (kk, t.min(kk - 3), 1, 2)));
    candidates.into_iter().find_map(|(kk, tt, ll, qq)| {
        let c = ProtocolConfig::new(kk, tt, ll, qq, cfg.scheme()).ok()?;
        (outcome_count(&c) <= budget as u128).then_some(c)
    })
}
