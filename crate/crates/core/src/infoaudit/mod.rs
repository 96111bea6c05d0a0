// SPDX-License-Identifier: Apache-2.0

//! Exact information-theoretic auditing by exhaustive enumeration.
//!
//! A [`SeedSpace`] lays out every primitive uniform symbol of a
//! configuration: all inputs, all source-key seeds and, for the baseline,
//! the per-round key permutations. Every outcome is equally likely, so joint
//! distributions of derived variables are integer count tables and all
//! entropies are exact up to the final logarithm.
//!
//! The audits check recovery, security against every admissible collusion
//! set, the key-structure properties of the schemes, and the leakage that
//! appears once the collusion threshold reaches `K - 2`. Lower-bound checks
//! only ever report that an implemented scheme is *consistent with* a bound;
//! enumeration over one scheme cannot establish a statement about all
//! schemes.

mod audits;
mod measure;
mod space;

use std::fmt;

use serde::Serialize;

use crate::protocol::{ProtocolConfig, ProtocolError};

pub use audits::{
    audit_key_structure, audit_recovery, audit_security, collusion_sets, full_audit,
    leakage_without_sum, suggest_within_budget, AuditOptions, AuditReport,
};
pub use measure::{
    conditional_entropy, conditional_entropy_result, conditional_mutual_information, entropy,
    entropy_result, joint_table, joint_table_with_workers, support, GroupKey, JointTable,
};
pub use space::{
    outcome_count, permutation_from_rank, DerivedVariable, Realization, SeedComponent, SeedSpace,
    CACHE_LIMIT, DEFAULT_BUDGET,
};

/// Tolerance, in q-ary units, for equalities that lack an exact certificate.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Errors raised by the auditor.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("seed space has {required} outcomes, above the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("invalid collusion set {collusion:?} for observer {observer}: {reason}")]
    InvalidCollusion {
        observer: usize,
        collusion: Vec<usize>,
        reason: String,
    },
    #[error("collusion set of size {size} is outside the feasible region for K = {users}; use a demonstration configuration")]
    Infeasible { users: usize, size: usize },
    #[error("this audit needs a demonstration configuration")]
    OverrideRequired,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// How a measured value is compared with its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtLeast,
}

/// One audited quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditResult {
    pub quantity: String,
    /// Measured value in q-ary units (bits after [`AuditResult::in_bits`]).
    pub value: f64,
    pub expected: f64,
    pub relation: Relation,
    /// The count structure proves the value is exactly zero.
    pub exact_zero: bool,
    pub tolerance: f64,
    pub passed: bool,
    /// Human-readable verdict, e.g. "consistent with ...".
    #[serde(skip_serializing_if = "String::is_empty")]
    pub statement: String,
}

impl AuditResult {
    pub fn new(
        quantity: impl Into<String>,
        value: f64,
        expected: f64,
        relation: Relation,
        exact_zero: bool,
    ) -> Self {
        debug_assert!(!exact_zero || value == 0.0);
        let tolerance = ZERO_TOLERANCE;
        let passed = match relation {
            Relation::Equal => (exact_zero && expected == 0.0) || (value - expected).abs() <= tolerance,
            Relation::AtLeast => value >= expected - tolerance,
        };
        AuditResult {
            quantity: quantity.into(),
            value,
            expected,
            relation,
            exact_zero,
            tolerance,
            passed,
            statement: String::new(),
        }
    }

    pub fn with_statement(mut self, statement: impl Into<String>) -> Self {
        self.statement = statement.into();
        self
    }

    /// Rescales value, reference and tolerance from q-ary units to bits.
    pub fn in_bits(mut self, q: u64) -> Self {
        let f = (q as f64).log2();
        self.value *= f;
        self.expected *= f;
        self.tolerance *= f;
        self
    }
}

impl fmt::Display for AuditResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::Equal => "=",
            Relation::AtLeast => ">=",
        };
        write!(
            f,
            "[{}] {} = {:.12} (want {} {}){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.quantity,
            self.value,
            rel,
            self.expected,
            if self.exact_zero { " exact" } else { "" }
        )?;
        if !self.statement.is_empty() {
            write!(f, " -- {}", self.statement)?;
        }
        Ok(())
    }
}

/// Echo of the audited configuration for serialized reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub config: ProtocolConfig,
    pub outcomes: u64,
    pub budget: u64,
}
