// SPDX-License-Identifier: Apache-2.0

//! Decentralized secure aggregation over prime fields.
//!
//! * [`field`]: prime-field symbols and uniform sampling.
//! * [`protocol`]: the zero-sum-key scheme, the per-round baseline, the
//!   feasibility region and the rate table.
//! * [`infoaudit`]: exact entropies and mutual informations by exhaustive
//!   enumeration of every input and key realization.
//! * [`simnet`]: a message-passing simulation with a dealer, broadcast
//!   channels, a passive colluding adversary and measured rates.

pub mod field;
pub mod infoaudit;
pub mod protocol;
pub mod simnet;

pub use field::{FieldElement, FieldError, Modulus, SymbolVector};

pub use protocol::{
    Feasibility, ProtocolConfig, ProtocolError, Rate, RateReport, Scheme, SourceKey, Transcript,
};

pub use infoaudit::{AuditError, AuditReport, AuditResult, SeedSpace};
pub use simnet::{AdversaryView, DeliveryOrder, MeasuredRates, SimError, SimulationRun};
