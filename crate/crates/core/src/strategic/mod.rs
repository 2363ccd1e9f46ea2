//! Strategic agents and exact incentive audits.

pub mod audit;
pub mod strategy;
pub mod tree;

pub use audit::{audit_single_round, AuditKind, Violation};
pub use strategy::{Decision, DeviationPolicy, Strategy};
pub use tree::{best_response_value, exact_expected_utilities, AuditReport, DEFAULT_NODE_BUDGET};
