use serde::{Deserialize, Serialize};

use super::RuleSet;
use crate::annotation::{parse_annotations, verify_annotations, Verdict};
use crate::canonical::to_canonical_bytes;
use crate::cas::ContentResolver;
use crate::chain::{Address, Disclosure};
use crate::digest::{fingerprint, Digest};
use crate::governance::{Cardinality, GovernanceModel, OntologyDocument};

/// Declared in lexicographic order so derived `Ord` matches the
/// serialized code names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingCode {
    MissingAnnotation,
    NoOwnerRole,
    OntologyMismatch,
    QuorumManipulationPower,
    UncheckedPrivilegedRole,
    UnresolvedDocument,
}

impl FindingCode {
    pub const ALL: [FindingCode; 6] = [
        FindingCode::MissingAnnotation,
        FindingCode::NoOwnerRole,
        FindingCode::OntologyMismatch,
        FindingCode::QuorumManipulationPower,
        FindingCode::UncheckedPrivilegedRole,
        FindingCode::UnresolvedDocument,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::MissingAnnotation => "missing_annotation",
            FindingCode::NoOwnerRole => "no_owner_role",
            FindingCode::OntologyMismatch => "ontology_mismatch",
            FindingCode::QuorumManipulationPower => "quorum_manipulation_power",
            FindingCode::UncheckedPrivilegedRole => "unchecked_privileged_role",
            FindingCode::UnresolvedDocument => "unresolved_document",
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Codes that make a fully resolved report risky.
    pub fn is_risk(self) -> bool {
        matches!(
            self,
            FindingCode::UncheckedPrivilegedRole
                | FindingCode::QuorumManipulationPower
                | FindingCode::OntologyMismatch
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    pub subject: String,
    pub detail: String,
}

impl Finding {
    fn new(code: FindingCode, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            code,
            subject: subject.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskVerdict {
    Acceptable,
    Risky,
    Unverifiable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskReport {
    pub contract: Address,
    /// Sorted by (code, subject, detail).
    pub findings: Vec<Finding>,
    pub verdict: RiskVerdict,
}

impl RiskReport {
    pub fn new(contract: Address, mut findings: Vec<Finding>) -> Self {
        findings.sort();
        findings.dedup();
        let verdict = if findings.iter().any(|f| f.code == FindingCode::UnresolvedDocument) {
            RiskVerdict::Unverifiable
        } else if findings.iter().any(|f| f.code.is_risk()) {
            RiskVerdict::Risky
        } else {
            RiskVerdict::Acceptable
        };
        Self {
            contract,
            findings,
            verdict,
        }
    }

    pub fn has(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn canonicalize(&self) -> Vec<u8> {
        to_canonical_bytes(self).expect("report has no floats")
    }

    pub fn fingerprint(&self) -> Digest {
        fingerprint(&self.canonicalize())
    }

    /// Human-readable rendering for review.
    pub fn render(&self) -> String {
        let mut out = format!("contract {}: {:?}\n", self.contract, self.verdict);
        for f in &self.findings {
            out.push_str(&format!("  [{}] {}: {}\n", f.code.as_str(), f.subject, f.detail));
        }
        out
    }
}

/// Fetches and re-verifies a disclosed document.
fn resolve_verified<R: ContentResolver + ?Sized>(
    resolver: &mut R,
    digest: &Digest,
) -> Result<Vec<u8>, String> {
    let bytes = resolver
        .resolve(digest)
        .ok_or_else(|| format!("{digest} not found in content store"))?;
    if fingerprint(&bytes) != *digest {
        return Err(format!("content returned for {digest} does not match its fingerprint"));
    }
    Ok(bytes)
}

/// Resolves the three disclosed documents and runs the structural rules.
/// Every failure becomes a finding; this never errors.
pub fn off_chain_assess<R: ContentResolver + ?Sized>(
    contract: Address,
    disclosure: &Disclosure,
    resolver: &mut R,
    expected_ontology: Option<&OntologyDocument>,
    rules: &RuleSet,
) -> RiskReport {
    let mut findings = Vec::new();
    let unresolved = |subject: &str, detail: String| {
        Finding::new(FindingCode::UnresolvedDocument, subject, detail)
    };

    let model = match resolve_verified(resolver, &disclosure.governance_digest) {
        Ok(bytes) => match GovernanceModel::from_json_bytes(&bytes) {
            Ok(m) => Some(m),
            Err(e) => {
                findings.push(unresolved("governance_model", format!("does not parse: {e}")));
                None
            }
        },
        Err(detail) => {
            findings.push(unresolved("governance_model", detail));
            None
        }
    };
    let ontology = match resolve_verified(resolver, &disclosure.ontology_digest) {
        Ok(bytes) => match OntologyDocument::from_json_bytes(&bytes) {
            Ok(o) => Some(o),
            Err(e) => {
                findings.push(unresolved("reference_ontology", format!("does not parse: {e}")));
                None
            }
        },
        Err(detail) => {
            findings.push(unresolved("reference_ontology", detail));
            None
        }
    };
    let source = match resolve_verified(resolver, &disclosure.annotated_source_digest) {
        Ok(bytes) => match String::from_utf8(bytes) {
            Ok(s) => Some(s),
            Err(_) => {
                findings.push(unresolved("annotated_source", "source is not UTF-8".into()));
                None
            }
        },
        Err(detail) => {
            findings.push(unresolved("annotated_source", detail));
            None
        }
    };

    if let Some(model) = &model {
        if rules.is_enabled(FindingCode::UncheckedPrivilegedRole) {
            findings.extend(unchecked_privileged_roles(model));
        }
        if rules.is_enabled(FindingCode::QuorumManipulationPower) {
            findings.extend(quorum_powers(model));
        }
        if rules.is_enabled(FindingCode::NoOwnerRole) && model.role("owner").is_none() {
            findings.push(Finding::new(
                FindingCode::NoOwnerRole,
                model.model_id(),
                "no role named \"owner\"; control is distributed across the declared roles",
            ));
        }
    }

    if rules.is_enabled(FindingCode::OntologyMismatch) {
        let mut mismatch = |subject: &str, detail: String| {
            findings.push(Finding::new(FindingCode::OntologyMismatch, subject, detail));
        };
        if let (Some(model), Some(onto)) = (&model, &ontology) {
            if onto.ontology_id() != model.ontology_id() {
                mismatch(
                    onto.ontology_id(),
                    format!("model {} is expressed in {:?}", model.model_id(), model.ontology_id()),
                );
            }
        }
        if let (Some(expected), Some(onto)) = (expected_ontology, &ontology) {
            if onto.ontology_id() != expected.ontology_id() {
                mismatch(onto.ontology_id(), format!("expected ontology {:?}", expected.ontology_id()));
            }
        }
    }

    if rules.is_enabled(FindingCode::MissingAnnotation) {
        if let (Some(model), Some(source)) = (&model, &source) {
            findings.extend(annotation_findings(model, source, resolver));
        }
    }

    RiskReport::new(contract, findings)
}

fn unchecked_privileged_roles(model: &GovernanceModel) -> Vec<Finding> {
    let mut out = Vec::new();
    for role in model.roles() {
        let powers = model.query_powers(&role.name).expect("role from model");
        let privileged: Vec<&str> = powers
            .iter()
            .filter(|p| p.is_privileged())
            .map(|p| p.name.as_str())
            .collect();
        if privileged.is_empty() {
            continue;
        }
        if model.query_checks(&role.name).expect("role from model").is_empty() {
            out.push(Finding::new(
                FindingCode::UncheckedPrivilegedRole,
                &role.name,
                format!("holds unconstrained powers [{}] with no checks relation", privileged.join(", ")),
            ));
        }
    }
    out
}

fn mentions_quorum(s: &str) -> bool {
    s.to_ascii_lowercase().contains("quorum")
}

fn quorum_powers(model: &GovernanceModel) -> Vec<Finding> {
    model
        .powers()
        .iter()
        .filter(|p| mentions_quorum(&p.name) || mentions_quorum(&p.target) || mentions_quorum(&p.effect))
        .filter(|p| model.role(&p.holder).is_some_and(|r| r.cardinality == Cardinality::One))
        .map(|p| {
            Finding::new(
                FindingCode::QuorumManipulationPower,
                &p.holder,
                format!("single-holder role controls quorum via power {:?}", p.name),
            )
        })
        .collect()
}

fn annotation_findings<R: ContentResolver + ?Sized>(
    model: &GovernanceModel,
    source: &str,
    resolver: &mut R,
) -> Vec<Finding> {
    let missing = |subject: &str, detail: String| Finding::new(FindingCode::MissingAnnotation, subject, detail);
    let annotated = match parse_annotations(source) {
        Ok(a) => a,
        Err(e) => return vec![missing("annotated_source", e.to_string())],
    };
    let report = verify_annotations(model, &annotated, resolver);
    if report.verdict == Verdict::Consistent {
        return Vec::new();
    }
    let mut out = Vec::new();
    for role in &report.unannotated_roles {
        out.push(missing(role, "no annotated code entity instantiates this role".into()));
    }
    for b in &report.unresolved_bindings {
        let subject = if b.entity_name.is_empty() { format!("line {}", b.line) } else { b.entity_name.clone() };
        out.push(missing(&subject, format!("instance document {} could not be resolved", b.instance_digest)));
    }
    for c in &report.conflicting {
        let subject = if c.binding.entity_name.is_empty() {
            format!("line {}", c.binding.line)
        } else {
            c.binding.entity_name.clone()
        };
        out.push(missing(&subject, format!("annotated as {:?}, which the model does not declare", c.claimed)));
    }
    out
}
