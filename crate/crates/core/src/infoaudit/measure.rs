// SPDX-License-Identifier: Apache-2.0

//! Exact joint count tables and the information measures built on them.
//!
//! Probabilities are integer counts over the outcome total. Only the final
//! logarithm is floating point; zero certificates are integer identities.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;
use std::thread;

use super::space::{DerivedVariable, SeedSpace};
use super::{AuditResult, Relation};

/// Key of a joint table: one value per variable group.
pub type GroupKey = Vec<Vec<u64>>;

/// Exact counts of the joint values of several variable groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTable {
    groups: usize,
    counts: BTreeMap<GroupKey, u64>,
    total: u64,
}

impl JointTable {
    fn empty(groups: usize) -> Self {
        JointTable { groups, counts: BTreeMap::new(), total: 0 }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct joint values with nonzero count.
    pub fn support(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &BTreeMap<GroupKey, u64> {
        &self.counts
    }

    /// Adds another table's counts into this one.
    pub fn merge(&mut self, other: JointTable) {
        assert_eq!(self.groups, other.groups, "merging tables of different arity");
        for (k, c) in other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self.total += other.total;
    }

    /// Marginal table over the listed groups, in the listed order.
    pub fn marginal(&self, keep: &[usize]) -> JointTable {
        let mut out = JointTable::empty(keep.len());
        for (key, &c) in &self.counts {
            let k: GroupKey = keep.iter().map(|&g| key[g].clone()).collect();
            *out.counts.entry(k).or_default() += c;
        }
        out.total = self.total;
        out
    }

    /// Entropy in base-`base` units.
    pub fn entropy(&self, base: f64) -> f64 {
        entropy_of(self.counts.values().copied(), self.total, base)
    }
}

/// `-sum p log p` in base-`base` units from integer counts.
fn entropy_of(counts: impl Iterator<Item = u64>, total: u64, base: f64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let ln_n = n.ln();
    // Each term p * (ln N - ln c) is non-negative.
    // Summed in sorted order so the result does not depend on hash order.
    let mut counts: Vec<u64> = counts.collect();
    counts.sort_unstable();
    let nats: f64 = counts.iter().map(|&c| (c as f64 / n) * (ln_n - (c as f64).ln())).sum();
    nats / base.ln()
}

/// Counts keyed by per-group interned value ids. This is the working form
/// used by every measure; [`JointTable`] is its ordered, value-keyed view.
#[derive(Debug, Clone)]
struct Counts {
    interners: Vec<HashMap<Vec<u64>, u32>>,
    values: Vec<Vec<Vec<u64>>>,
    counts: HashMap<Vec<u32>, u64>,
    total: u64,
}

impl Counts {
    fn empty(groups: usize) -> Self {
        Counts {
            interners: vec![HashMap::new(); groups],
            values: vec![Vec::new(); groups],
            counts: HashMap::new(),
            total: 0,
        }
    }

    fn intern(&mut self, group: usize, value: &[u64]) -> u32 {
        if let Some(&id) = self.interners[group].get(value) {
            return id;
        }
        let id = self.values[group].len() as u32;
        self.values[group].push(value.to_vec());
        self.interners[group].insert(value.to_vec(), id);
        id
    }

    fn add(&mut self, ids: &[u32], c: u64) {
        match self.counts.get_mut(ids) {
            Some(n) => *n += c,
            None => {
                self.counts.insert(ids.to_vec(), c);
            }
        }
    }

    fn merge(&mut self, other: Counts) {
        let remap: Vec<Vec<u32>> = other
            .values
            .iter()
            .enumerate()
            .map(|(g, vals)| vals.iter().map(|v| self.intern(g, v)).collect())
            .collect();
        let mut ids = Vec::with_capacity(remap.len());
        for (key, c) in other.counts {
            ids.clear();
            ids.extend(key.iter().enumerate().map(|(g, &id)| remap[g][id as usize]));
            self.add(&ids, c);
        }
        self.total += other.total;
    }

    fn project<K: Hash + Eq>(&self, f: impl Fn(&[u32]) -> K) -> HashMap<K, u64> {
        let mut out = HashMap::new();
        for (key, &c) in &self.counts {
            *out.entry(f(key)).or_default() += c;
        }
        out
    }

    fn into_table(self) -> JointTable {
        let mut table = JointTable::empty(self.values.len());
        for (key, c) in self.counts {
            let k: GroupKey = key.iter().enumerate().map(|(g, &id)| self.values[g][id as usize].clone()).collect();
            table.counts.insert(k, c);
        }
        table.total = self.total;
        table
    }
}

fn chunk_counts(space: &SeedSpace, groups: &[&[DerivedVariable]], range: std::ops::Range<u64>) -> Counts {
    let mut counts = Counts::empty(groups.len());
    let mut buf = Vec::new();
    let mut ids = vec![0u32; groups.len()];
    space.for_each_in(range, |r| {
        for (g, vars) in groups.iter().enumerate() {
            buf.clear();
            for var in vars.iter() {
                var.evaluate_into(r, &mut buf);
            }
            ids[g] = counts.intern(g, &buf);
        }
        counts.add(&ids, 1);
        counts.total += 1;
    });
    counts
}

fn counts_with_workers(space: &SeedSpace, groups: &[&[DerivedVariable]], workers: usize) -> Counts {
    let n = space.outcome_count();
    let workers = (workers.max(1) as u64).min(n.max(1));
    if workers == 1 {
        return chunk_counts(space, groups, 0..n);
    }
    let step = n.div_ceil(workers);
    let parts: Vec<Counts> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * step).min(n)..((w + 1) * step).min(n);
                s.spawn(move || chunk_counts(space, groups, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("enumeration worker panicked")).collect()
    });
    let mut parts = parts.into_iter();
    let mut merged = parts.next().expect("at least one worker");
    for p in parts {
        merged.merge(p);
    }
    merged
}

fn counts(space: &SeedSpace, groups: &[&[DerivedVariable]]) -> Counts {
    counts_with_workers(space, groups, space.workers())
}

/// Enumerates every outcome with `workers` threads over disjoint contiguous
/// ranges and merges the per-thread counts.
pub fn joint_table_with_workers(
    space: &SeedSpace,
    groups: &[&[DerivedVariable]],
    workers: usize,
) -> JointTable {
    counts_with_workers(space, groups, workers).into_table()
}

/// Joint table using the space's configured worker count.
pub fn joint_table(space: &SeedSpace, groups: &[&[DerivedVariable]]) -> JointTable {
    joint_table_with_workers(space, groups, space.workers())
}

fn base(space: &SeedSpace) -> f64 {
    space.config().modulus().get() as f64
}

/// Joint entropy of `vars` in q-ary units.
pub fn entropy(space: &SeedSpace, vars: &[DerivedVariable]) -> f64 {
    assert!(!vars.is_empty(), "entropy of an empty variable set");
    let t = counts(space, &[vars]);
    entropy_of(t.counts.values().copied(), t.total, base(space))
}

/// `H(target | given)` as the average over conditioning cells of the
/// within-cell entropy. Independent of the `H(A,B) - H(B)` route.
pub fn conditional_entropy(space: &SeedSpace, target: &[DerivedVariable], given: &[DerivedVariable]) -> f64 {
    let t = counts(space, &[given, target]);
    let mut cells: HashMap<u32, Vec<u64>> = HashMap::new();
    for (key, &c) in &t.counts {
        cells.entry(key[0]).or_default().push(c);
    }
    let n = t.total as f64;
    let q = base(space);
    let mut terms: Vec<f64> = cells
        .values()
        .map(|cell| {
            let m: u64 = cell.iter().sum();
            (m as f64 / n) * entropy_of(cell.iter().copied(), m, q)
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Per-cell integer check that `A` and `B` are independent given `C`:
/// every cell's joint support is the full product of its marginal supports
/// and `n(a,b,c) n(c) = n(a,c) n(b,c)` on it.
fn certify_factorization(
    abc: &HashMap<Vec<u32>, u64>,
    ac: &HashMap<(u32, u32), u64>,
    bc: &HashMap<(u32, u32), u64>,
    c: &HashMap<u32, u64>,
) -> bool {
    let mut pairs: HashMap<u32, u64> = HashMap::new();
    for (key, &n_abc) in abc {
        let (a, b, cc) = (key[0], key[1], key[2]);
        if n_abc as u128 * c[&cc] as u128 != ac[&(a, cc)] as u128 * bc[&(b, cc)] as u128 {
            return false;
        }
        *pairs.entry(cc).or_default() += 1;
    }
    let mut a_in_cell: HashMap<u32, u64> = HashMap::new();
    for &(_, cc) in ac.keys() {
        *a_in_cell.entry(cc).or_default() += 1;
    }
    let mut b_in_cell: HashMap<u32, u64> = HashMap::new();
    for &(_, cc) in bc.keys() {
        *b_in_cell.entry(cc).or_default() += 1;
    }
    pairs.iter().all(|(cc, &p)| p == a_in_cell[cc] * b_in_cell[cc])
}

/// `I(A; B | C)` in q-ary units from one enumeration pass.
///
/// `exact_zero` is set when the count table factorizes in every
/// conditioning cell; the value is then reported as exactly zero.
pub fn conditional_mutual_information(
    space: &SeedSpace,
    quantity: impl Into<String>,
    a: &[DerivedVariable],
    b: &[DerivedVariable],
    c: &[DerivedVariable],
) -> AuditResult {
    assert!(!a.is_empty() && !b.is_empty(), "mutual information needs two non-empty sets");
    let abc = counts(space, &[a, b, c]);
    let ac = abc.project(|k| (k[0], k[2]));
    let bc = abc.project(|k| (k[1], k[2]));
    let cc = abc.project(|k| k[2]);
    let q = base(space);
    let exact_zero = certify_factorization(&abc.counts, &ac, &bc, &cc);
    let value = if exact_zero {
        0.0
    } else {
        let h = |m: &dyn Fn() -> Vec<u64>| entropy_of(m().into_iter(), abc.total, q);
        h(&|| ac.values().copied().collect()) + h(&|| bc.values().copied().collect())
            - h(&|| abc.counts.values().copied().collect())
            - h(&|| cc.values().copied().collect())
    };
    AuditResult::new(quantity, value, 0.0, Relation::Equal, exact_zero)
}

/// `H(target | given)` via `H(target, given) - H(given)`, with an exact-zero
/// certificate when every conditioning cell pins the target to one value.
pub fn conditional_entropy_result(
    space: &SeedSpace,
    quantity: impl Into<String>,
    target: &[DerivedVariable],
    given: &[DerivedVariable],
    expected: f64,
    relation: Relation,
) -> AuditResult {
    let joint = counts(space, &[target, given]);
    let cond = joint.project(|k| k[1]);
    let q = base(space);
    let exact_zero = joint.counts.len() == cond.len();
    let value = if exact_zero {
        0.0
    } else {
        entropy_of(joint.counts.values().copied(), joint.total, q) - entropy_of(cond.values().copied(), joint.total, q)
    };
    AuditResult::new(quantity, value, expected, relation, exact_zero)
}

/// Entropy as an audit result against an expected value.
pub fn entropy_result(
    space: &SeedSpace,
    quantity: impl Into<String>,
    vars: &[DerivedVariable],
    expected: f64,
) -> AuditResult {
    let t = counts(space, &[vars]);
    let exact_zero = t.counts.len() == 1;
    let value = if exact_zero { 0.0 } else { entropy_of(t.counts.values().copied(), t.total, base(space)) };
    AuditResult::new(quantity, value, expected, Relation::Equal, exact_zero)
}

/// Distinct values a variable set takes over the space.
pub fn support(space: &SeedSpace, vars: &[DerivedVariable]) -> BTreeSet<Vec<u64>> {
    counts(space, &[vars]).values.swap_remove(0).into_iter().collect()
}
