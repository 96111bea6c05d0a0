// SPDX-License-Identifier: Apache-2.0

//! Self-checks for the brute-force oracle. The values asserted here are the
//! ones frozen into the audit unit tests and the acceptance suite.

mod oracle;

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

#[test]
fn three_user_example() {
    let w = oracle::optimal_worlds(3, 2);
    assert_eq!(w.len(), 32);
    assert!(oracle::recovery_holds(&w, 2, true));
    for k in 0..3 {
        assert!(close(oracle::security(&w, k, &[], 2), 0.0));
    }
    assert!(close(oracle::entropy(&w, 2, |w| w.z.clone()), 2.0));
}

#[test]
fn leakage_at_the_boundary() {
    let w3 = oracle::optimal_worlds(3, 2);
    for (k, kp) in [(0, 2), (0, 1), (1, 2), (2, 0)] {
        assert!(close(oracle::leakage(&w3, k, kp, 2), 1.0));
    }
    let w4 = oracle::optimal_worlds(4, 2);
    assert!(close(oracle::leakage(&w4, 0, 3, 2), 1.0));
}

#[test]
fn feasible_collusion_leaks_nothing() {
    let w4 = oracle::optimal_worlds(4, 2);
    assert_eq!(w4.len(), 128);
    for k in 0..4 {
        for t in (0..4).filter(|&t| t != k) {
            assert!(close(oracle::security(&w4, k, &[t], 2), 0.0));
        }
    }
    let w5 = oracle::optimal_worlds(5, 2);
    assert_eq!(w5.len(), 512);
    assert!(close(oracle::security(&w5, 0, &[1, 2], 2), 0.0));
    assert!(close(oracle::entropy(&w4, 2, |w| (w.z[1].clone(), w.z[2].clone())), 2.0));
}

#[test]
fn larger_field_recovery() {
    let w = oracle::optimal_worlds(4, 3);
    assert_eq!(w.len(), 2187);
    assert!(oracle::recovery_holds(&w, 3, true));
}

#[test]
fn baseline_three_users() {
    let b = oracle::baseline_worlds(3, 2);
    assert_eq!(b.len(), 512);
    assert!(oracle::recovery_holds(&b, 2, false));
    for k in 0..3 {
        assert!(close(oracle::security(&b, k, &[], 2), 0.0));
    }
    assert!(close(oracle::entropy(&b, 2, |w| w.z.clone()), 3.0));
}
