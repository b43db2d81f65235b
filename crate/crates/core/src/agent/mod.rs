//! Governance inference: the on-chain familiarity branch, off-chain
//! delegation with document resolution and structural risk checks, and
//! the reputation ledger.

mod assess;
mod decide;
mod registry;
mod reputation;
mod rules;

pub use assess::{off_chain_assess, Finding, FindingCode, RiskReport, RiskVerdict};
pub use decide::{
    decide, infer_governance, Decision, Outcome, ProtocolOutcome, BASIS_NO_DISCLOSURE,
    BASIS_ONTOLOGY_MISMATCH, BASIS_UNKNOWN_TEMPLATE,
};
pub use registry::{Policy, RegistryError, TemplateEntry, TemplateRegistry};
pub use reputation::{update_reputation, ReputationLedger, ReputationRecord, Status};
pub use rules::{RuleError, RuleSet};
