use serde::{Deserialize, Serialize};

use super::{off_chain_assess, Policy, RiskReport, RuleSet, TemplateRegistry};
use crate::canonical::to_canonical_bytes;
use crate::cas::ContentResolver;
use crate::chain::{Address, ChainError, DisclosureField, Environment};
use crate::governance::OntologyDocument;

pub const BASIS_UNKNOWN_TEMPLATE: &str = "unknown template";
pub const BASIS_ONTOLOGY_MISMATCH: &str = "ontology mismatch";
pub const BASIS_NO_DISCLOSURE: &str = "no disclosure";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Proceed,
    Reject,
    DelegateOffChain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub outcome: Outcome,
    /// Template name for proceed/reject; the failed condition otherwise.
    pub basis: String,
}

impl Decision {
    fn delegate(basis: &str) -> Self {
        Self {
            outcome: Outcome::DelegateOffChain,
            basis: basis.to_string(),
        }
    }
}

/// The on-chain branch: fingerprint lookup against `registry`, touching
/// nothing but the chain.
pub fn decide(
    env: &mut Environment,
    this: Address,
    other: Address,
    registry: &TemplateRegistry,
) -> Result<Decision, ChainError> {
    if env.account(&this).is_none() {
        return Err(ChainError::UnknownAddress(this));
    }
    let decision = match env.call_disclosure(this, other, DisclosureField::Governance) {
        Err(ChainError::NoDisclosure(_)) => Decision::delegate(BASIS_NO_DISCLOSURE),
        Err(e) => return Err(e),
        Ok(governance) => {
            let ontology = env.call_disclosure(this, other, DisclosureField::Ontology)?;
            match registry.get(&governance) {
                None => Decision::delegate(BASIS_UNKNOWN_TEMPLATE),
                Some(entry) if entry.ontology_digest != ontology => {
                    Decision::delegate(BASIS_ONTOLOGY_MISMATCH)
                }
                Some(entry) => Decision {
                    outcome: match entry.policy {
                        Policy::Accept => Outcome::Proceed,
                        Policy::Reject => Outcome::Reject,
                    },
                    basis: entry.name.clone(),
                },
            }
        }
    };
    env.record(
        this,
        other,
        "decide",
        vec![],
        to_canonical_bytes(&decision).expect("decision has no floats"),
    );
    Ok(decision)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOutcome {
    pub decision: Decision,
    /// Present when the decision was delegated and `other` discloses.
    pub report: Option<RiskReport>,
}

/// Full inference flow: decide on-chain, and only when that delegates,
/// resolve documents through `resolver` and assess them off-chain.
pub fn infer_governance<R: ContentResolver + ?Sized>(
    env: &mut Environment,
    this: Address,
    other: Address,
    registry: &TemplateRegistry,
    resolver: &mut R,
    expected_ontology: Option<&OntologyDocument>,
    rules: &RuleSet,
) -> Result<ProtocolOutcome, ChainError> {
    let decision = decide(env, this, other, registry)?;
    let report = match (decision.outcome, env.account(&other).and_then(|a| a.disclosure)) {
        (Outcome::DelegateOffChain, Some(disclosure)) => Some(off_chain_assess(
            other,
            &disclosure,
            resolver,
            expected_ontology,
            rules,
        )),
        _ => None,
    };
    Ok(ProtocolOutcome { decision, report })
}
