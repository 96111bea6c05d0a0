// SPDX-License-Identifier: Apache-2.0

//! Independent brute-force oracle for single-symbol (L = 1) instances.
//!
//! Works on plain integers and a hash-map entropy, sharing no code with the
//! crate's protocol or audit implementation.

#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::Hash;

/// One joint realization of inputs, keys and observed messages.
#[derive(Debug, Clone)]
pub struct World {
    pub w: Vec<u64>,
    /// Per-user key symbols (one for optimal, K-1 for the baseline).
    pub z: Vec<Vec<u64>>,
    /// `seen[k][i]`: symbols user k observes from sender i (empty for i = k).
    pub seen: Vec<Vec<Vec<u64>>>,
}

fn digits(mut index: u64, radix: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let d = index % radix;
            index /= radix;
            d
        })
        .collect()
}

/// All q^(2K-1) realizations of the zero-sum scheme with L = 1.
pub fn optimal_worlds(k: usize, q: u64) -> Vec<World> {
    let total = q.pow((2 * k - 1) as u32);
    (0..total)
        .map(|idx| {
            let d = digits(idx, q, 2 * k - 1);
            let w = d[..k].to_vec();
            let n = &d[k..];
            let mut z: Vec<u64> = n.to_vec();
            let s: u64 = n.iter().sum::<u64>() % q;
            z.push((q - s) % q);
            let x: Vec<u64> = (0..k).map(|i| (w[i] + z[i]) % q).collect();
            let seen = (0..k)
                .map(|obs| (0..k).map(|i| if i == obs { vec![] } else { vec![x[i]] }).collect())
                .collect();
            World { w, z: z.into_iter().map(|v| vec![v]).collect(), seen }
        })
        .collect()
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// All realizations of the per-round baseline with L = 1.
pub fn baseline_worlds(k: usize, q: u64) -> Vec<World> {
    let perms = all_permutations(k - 1);
    let symbols = k + k * (k - 2);
    let sym_total = q.pow(symbols as u32);
    let perm_total = (perms.len() as u64).pow(k as u32);
    let mut out = Vec::with_capacity((sym_total * perm_total) as usize);
    for s_idx in 0..sym_total {
        let d = digits(s_idx, q, symbols);
        let w = d[..k].to_vec();
        for p_idx in 0..perm_total {
            let pd = digits(p_idx, perms.len() as u64, k);
            // round_keys[r][j]
            let round_keys: Vec<Vec<u64>> = (0..k)
                .map(|r| {
                    let seeds = &d[k + r * (k - 2)..k + (r + 1) * (k - 2)];
                    let mut keys = seeds.to_vec();
                    keys.push((q - seeds.iter().sum::<u64>() % q) % q);
                    keys
                })
                .collect();
            // key of sender i in round r
            let key_of = |i: usize, r: usize| {
                let senders: Vec<usize> = (0..k).filter(|&s| s != r).collect();
                let pos = senders.iter().position(|&s| s == i).unwrap();
                round_keys[r][perms[pd[r] as usize][pos]]
            };
            let z: Vec<Vec<u64>> = (0..k)
                .map(|i| (0..k).filter(|&r| r != i).map(|r| key_of(i, r)).collect())
                .collect();
            let seen = (0..k)
                .map(|obs| {
                    (0..k)
                        .map(|i| if i == obs { vec![] } else { vec![(w[i] + key_of(i, obs)) % q] })
                        .collect()
                })
                .collect();
            out.push(World { w: w.clone(), z, seen });
        }
    }
    out
}

/// Entropy in base-q units of `f` under the uniform distribution on `worlds`.
pub fn entropy<T: Hash + Eq>(worlds: &[World], q: u64, f: impl Fn(&World) -> T) -> f64 {
    let mut counts: HashMap<T, u64> = HashMap::new();
    for w in worlds {
        *counts.entry(f(w)).or_default() += 1;
    }
    let n = worlds.len() as f64;
    -counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
        / (q as f64).ln()
}

/// I(A; B | C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
pub fn cmi<A, B, C>(
    worlds: &[World],
    q: u64,
    a: impl Fn(&World) -> A,
    b: impl Fn(&World) -> B,
    c: impl Fn(&World) -> C,
) -> f64
where
    A: Hash + Eq,
    B: Hash + Eq,
    C: Hash + Eq,
{
    entropy(worlds, q, |w| (a(w), c(w))) + entropy(worlds, q, |w| (b(w), c(w)))
        - entropy(worlds, q, |w| (a(w), b(w), c(w)))
        - entropy(worlds, q, &c)
}

pub fn sum_w(w: &World, q: u64) -> u64 {
    w.w.iter().sum::<u64>() % q
}

/// Security quantity for observer `k` and collusion set `t`.
pub fn security(worlds: &[World], k: usize, t: &[usize], q: u64) -> f64 {
    let n = worlds[0].w.len();
    cmi(
        worlds,
        q,
        |w| (0..n).filter(|&i| i != k).map(|i| w.seen[k][i].clone()).collect::<Vec<_>>(),
        |w| (0..n).filter(|&i| i != k).map(|i| w.w[i]).collect::<Vec<_>>(),
        |w| {
            let mut v = vec![sum_w(w, q), w.w[k]];
            v.extend(&w.z[k]);
            for &i in t {
                v.push(w.w[i]);
                v.extend(&w.z[i]);
            }
            v
        },
    )
}

/// Leakage of W_{k'} through X_{k'} given the inputs and keys of everyone
/// except k'.
pub fn leakage(worlds: &[World], k: usize, kp: usize, q: u64) -> f64 {
    let n = worlds[0].w.len();
    cmi(
        worlds,
        q,
        |w| w.seen[k][kp].clone(),
        |w| w.w[kp],
        |w| {
            (0..n)
                .filter(|&i| i != kp)
                .flat_map(|i| std::iter::once(w.w[i]).chain(w.z[i].iter().copied()))
                .collect::<Vec<_>>()
        },
    )
}

/// Whether every observer recovers the input sum by adding what it sees
/// (plus its own key for the zero-sum scheme).
pub fn recovery_holds(worlds: &[World], q: u64, add_own_key: bool) -> bool {
    worlds.iter().all(|w| {
        let n = w.w.len();
        (0..n).all(|k| {
            let mut acc = w.w[k];
            for i in (0..n).filter(|&i| i != k) {
                acc += w.seen[k][i].iter().sum::<u64>();
            }
            if add_own_key {
                acc += w.z[k].iter().sum::<u64>();
            }
            acc % q == sum_w(w, q)
        })
    })
}
