// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fails.

mod oracle;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dsa_core::field::{FieldElement, Modulus};
use dsa_core::infoaudit::{
    audit_key_structure, audit_recovery, audit_security, collusion_sets, joint_table_with_workers,
    leakage_without_sum, AuditOptions, DerivedVariable as V, SeedSpace, DEFAULT_BUDGET,
};
use dsa_core::protocol::{feasibility_check, theoretical_rates, Feasibility, Rate, RateReport};
use dsa_core::simnet::{run_seeded, DeliveryOrder};
use dsa_core::{ProtocolConfig, Scheme};

/// Tolerance for every value without an exact certificate, in q-ary units.
const TOL: f64 = 1e-9;
const GOLDEN_LIMIT: Duration = Duration::from_secs(1);
const SWEEP_LIMIT: Duration = Duration::from_secs(30);
/// Leakage at `|T| = K - 2`, frozen from the brute-force oracle.
const ORACLE_LEAKAGE: f64 = 1.0;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn space(cfg: &ProtocolConfig) -> Result<SeedSpace, String> {
    SeedSpace::build(cfg, DEFAULT_BUDGET).map_err(|e| e.to_string())
}

fn cfg(k: usize, t: usize, q: u64, scheme: Scheme) -> Result<ProtocolConfig, String> {
    ProtocolConfig::new(k, t, 1, q, scheme).map_err(|e| e.to_string())
}

fn golden_example() -> Check {
    let start = Instant::now();
    let s = space(&cfg(3, 0, 2, Scheme::Optimal)?)?;
    ensure(s.outcome_count() == 32, || format!("{} outcomes, want 32", s.outcome_count()))?;
    for k in 0..3 {
        let r = audit_recovery(&s, k).map_err(|e| e.to_string())?;
        ensure(r.exact_zero, || format!("recovery at user {k}: {r}"))?;
    }
    let r = dsa_core::infoaudit::conditional_mutual_information(
        &s,
        "I(X1,X2; W1,W2 | W1+W2, W0, Z0)",
        &[V::observed(1, 0), V::observed(2, 0)],
        &[V::input(1), V::input(2)],
        &[V::partial_input_sum(&[1, 2]), V::input(0), V::key(0)],
    );
    ensure(r.exact_zero && r.value == 0.0, || format!("{r}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < GOLDEN_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("32 outcomes, recovery and security exact, {elapsed:.2?}"))
}

fn security_sweep() -> Check {
    let start = Instant::now();
    let mut audits = 0;
    let mut certified = 0;
    for k_users in [3, 4, 5] {
        for q in [2, 3] {
            let c = cfg(k_users, k_users - 3, q, Scheme::Optimal)?;
            let s = space(&c)?;
            for k in 0..k_users {
                for t in collusion_sets(k_users, k, k_users - 3, &AuditOptions::default()) {
                    let r = audit_security(&s, k, &t).map_err(|e| e.to_string())?;
                    ensure(r.value.abs() <= TOL && r.passed, || format!("K={k_users} q={q}: {r}"))?;
                    audits += 1;
                    certified += r.exact_zero as usize;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < SWEEP_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{audits} audits, {certified} certified exact, {elapsed:.2?}"))
}

fn rate_table() -> Check {
    for k in 3..=6u64 {
        let expected = [
            (Scheme::Optimal, (1, 1, k - 1)),
            (Scheme::Baseline, (k - 1, k - 1, k * (k - 1))),
        ];
        for (scheme, (rx, rz, rs)) in expected {
            let want = RateReport {
                message: Rate::integer(rx),
                key: Rate::integer(rz),
                source_key: Rate::integer(rs),
            };
            let c = cfg(k as usize, 0, 2, scheme)?;
            let theory = theoretical_rates(&c).map_err(|e| e.to_string())?;
            let run = run_seeded(&c, k, DeliveryOrder::Forward).map_err(|e| e.to_string())?;
            ensure(theory == want, || format!("K={k} {scheme}: theoretical {theory}, want {want}"))?;
            ensure(run.rates.rates == want, || format!("K={k} {scheme}: measured {}", run.rates.rates))?;
        }
    }
    Ok("K = 3..6, both schemes, exact rational equality".into())
}

fn key_structure() -> Check {
    let mut checked = 0;
    for k_users in [3usize, 4, 5] {
        let s = space(&cfg(k_users, 0, 2, Scheme::Optimal)?)?;
        let results = audit_key_structure(&s, &AuditOptions::default()).map_err(|e| e.to_string())?;
        if let Some(r) = results.iter().find(|r| !r.passed) {
            return Err(format!("K={k_users}: {r}"));
        }
        let count = |p: &dyn Fn(&str) -> bool| results.iter().filter(|r| p(&r.quantity)).count();
        let subsets = count(&|q| q.starts_with("H(Z[") && !q.contains('|'));
        ensure(subsets == (1 << k_users) - 2, || format!("K={k_users}: {subsets} key subsets"))?;
        let all = results.iter().find(|r| r.quantity == "H(Z_all)").ok_or("missing H(Z_all)")?;
        ensure((all.value - (k_users - 1) as f64).abs() <= TOL, || format!("{all}"))?;
        let own_input: Vec<_> = results.iter().filter(|r| r.quantity.starts_with("I(X") && !r.quantity.starts_with("I(X[")).collect();
        ensure(own_input.len() == k_users * (k_users - 1) && own_input.iter().all(|r| r.exact_zero), || {
            format!("K={k_users}: own-input independence over {} pairs", own_input.len())
        })?;
        let partial: Vec<_> = results.iter().filter(|r| r.quantity.starts_with("I(X[")).collect();
        let want: usize = (0..k_users)
            .map(|k| collusion_sets(k_users, k, k_users - 3, &AuditOptions::default()).len())
            .sum();
        ensure(partial.len() == want && partial.iter().all(|r| (r.value - 1.0).abs() <= TOL), || {
            format!("K={k_users}: partial-sum leakage over {} of {want} (k, T)", partial.len())
        })?;
        checked += results.len();
    }
    Ok(format!("{checked} key-structure quantities for K = 3, 4, 5"))
}

fn infeasibility_boundary() -> Check {
    for k_users in [3usize, 4] {
        let worlds = oracle::optimal_worlds(k_users, 2);
        let c = ProtocolConfig::demonstration(k_users, k_users - 2, 1, 2, Scheme::Optimal).map_err(|e| e.to_string())?;
        let s = space(&c)?;
        for k in 0..k_users {
            for kp in (0..k_users).filter(|&kp| kp != k) {
                let oracle_value = oracle::leakage(&worlds, k, kp, 2);
                ensure((oracle_value - ORACLE_LEAKAGE).abs() <= TOL, || format!("oracle gave {oracle_value}"))?;
                let r = leakage_without_sum(&s, k, kp).map_err(|e| e.to_string())?;
                ensure((r.value - ORACLE_LEAKAGE).abs() <= TOL, || format!("K={k_users}: {r}"))?;
            }
        }
    }
    for k in 2..=8usize {
        for t in 0..=6usize {
            let want = if k >= 3 && t + 3 <= k { Feasibility::Feasible } else { Feasibility::Infeasible };
            ensure(feasibility_check(k, t) == want, || format!("feasibility_check({k}, {t})"))?;
        }
    }
    Ok("leakage 1.0 at |T| = K-2 for K = 3, 4; feasibility grid matches".into())
}

fn baseline_correctness() -> Check {
    let s = space(&cfg(3, 0, 2, Scheme::Baseline)?)?;
    ensure(s.outcome_count() == 512, || format!("{} outcomes", s.outcome_count()))?;
    for k in 0..3 {
        let r = audit_recovery(&s, k).map_err(|e| e.to_string())?;
        ensure(r.exact_zero, || format!("{r}"))?;
        let r = audit_security(&s, k, &[]).map_err(|e| e.to_string())?;
        ensure(r.value.abs() <= TOL && r.passed, || format!("{r}"))?;
    }
    Ok("512 outcomes, recovery exact, security zero at T = 0".into())
}

fn property_suites() -> Check {
    for q in [2u64, 3, 5] {
        let m = Modulus::new(q).map_err(|e| e.to_string())?;
        let all: Vec<_> = (0..q).map(|v| FieldElement::new(v, m)).collect();
        let zero = FieldElement::zero(m);
        let add = |a: FieldElement, b: FieldElement| a.try_add(b).expect("same modulus");
        for &a in &all {
            ensure(add(a, zero) == a && add(a, -a) == zero, || format!("identity/inverse in F_{q}"))?;
            for &b in &all {
                ensure(add(a, b) == add(b, a), || format!("commutativity in F_{q}"))?;
                for &c in &all {
                    ensure(add(add(a, b), c) == add(a, add(b, c)), || format!("associativity in F_{q}"))?;
                }
            }
        }
    }

    for c in [cfg(4, 1, 2, Scheme::Optimal)?, cfg(3, 0, 2, Scheme::Baseline)?] {
        let s = space(&c)?;
        let a: Vec<V> = (1..c.users()).map(|i| V::observed(i, 0)).collect();
        let b = [V::input_sum(), V::key(0)];
        let groups: [&[V]; 2] = [&a, &b];
        let one = joint_table_with_workers(&s, &groups, 1);
        for w in [2, 8] {
            ensure(one == joint_table_with_workers(&s, &groups, w), || format!("{w} workers differ"))?;
        }
    }

    for scheme in [Scheme::Optimal, Scheme::Baseline] {
        for k in 3..=6 {
            let c = ProtocolConfig::new(k, k - 3, 3, 7, scheme).map_err(|e| e.to_string())?;
            for seed in 0..8u64 {
                let fwd = run_seeded(&c, seed, DeliveryOrder::Forward).map_err(|e| e.to_string())?;
                for order in [DeliveryOrder::Reverse, DeliveryOrder::Shuffled(seed)] {
                    let other = run_seeded(&c, seed, order).map_err(|e| e.to_string())?;
                    ensure(other.transcript.recovered == fwd.transcript.recovered, || format!("{order:?} changed recovery"))?;
                }
                let again = run_seeded(&c, seed, DeliveryOrder::Forward).map_err(|e| e.to_string())?;
                ensure(again.transcript == fwd.transcript, || format!("seed {seed} not deterministic"))?;
            }
        }
    }
    Ok("field axioms, partition independence, order invariance, determinism".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 golden example", golden_example),
        ("2 security sweep", security_sweep),
        ("3 rate table", rate_table),
        ("4 key structure", key_structure),
        ("5 infeasibility boundary", infeasibility_boundary),
        ("6 baseline correctness", baseline_correctness),
        ("7 property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("acceptance {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("acceptance {name}: FAIL ({why})");
            }
        }
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
