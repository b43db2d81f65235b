use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FindingCode, RiskReport, RiskVerdict};
use crate::canonical::to_canonical_bytes;
use crate::chain::Address;
use crate::digest::Digest;

/// Ordered: status only ever moves towards `Blacklisted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[default]
    Trusted,
    Flagged,
    Blacklisted,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReputationRecord {
    pub status: Status,
    /// Fingerprints of the risk reports that informed the status.
    pub evidence: Vec<Digest>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReputationLedger {
    pub entries: BTreeMap<Address, ReputationRecord>,
}

impl ReputationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unknown contracts are trusted.
    pub fn status(&self, contract: &Address) -> Status {
        self.entries.get(contract).map_or(Status::Trusted, |r| r.status)
    }

    pub fn record(&self, contract: &Address) -> Option<&ReputationRecord> {
        self.entries.get(contract)
    }

    pub fn apply(&mut self, contract: Address, report: &RiskReport) -> Status {
        let record = self.entries.entry(contract).or_default();
        let prior = record.status;
        let misrepresents =
            report.has(FindingCode::MissingAnnotation) || report.has(FindingCode::OntologyMismatch);
        let next = match report.verdict {
            RiskVerdict::Acceptable => prior,
            RiskVerdict::Unverifiable => prior.max(Status::Flagged),
            RiskVerdict::Risky if misrepresents && prior >= Status::Flagged => Status::Blacklisted,
            RiskVerdict::Risky => prior.max(Status::Flagged),
        };
        record.status = next;
        record.evidence.push(report.fingerprint());
        next
    }

    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        to_canonical_bytes(self).expect("ledger has no floats")
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}

/// Returns `ledger` with `report` applied to `contract`.
pub fn update_reputation(mut ledger: ReputationLedger, contract: Address, report: &RiskReport) -> ReputationLedger {
    ledger.apply(contract, report);
    ledger
}
