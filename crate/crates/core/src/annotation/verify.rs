use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AnnotatedSource, AnnotationBinding, Diagnostic, InstanceDocument};
use crate::cas::ContentResolver;
use crate::digest::fingerprint;
use crate::governance::GovernanceModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Incomplete,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedBinding {
    pub binding: AnnotationBinding,
    /// The model role or power named by the instance document.
    pub element: String,
}

/// A binding whose instance document names something the model lacks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictingBinding {
    pub binding: AnnotationBinding,
    pub claimed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub matched: Vec<MatchedBinding>,
    pub unresolved_bindings: Vec<AnnotationBinding>,
    pub conflicting: Vec<ConflictingBinding>,
    pub unannotated_roles: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub verdict: Verdict,
}

/// Checks annotated source against a declared governance model.
///
/// Each binding's instance document is fetched through `resolver` and
/// re-fingerprinted; fetch, integrity and parse failures leave the
/// binding unresolved with a diagnostic. The resolver is called once per
/// binding, sequentially.
pub fn verify_annotations<R: ContentResolver + ?Sized>(
    model: &GovernanceModel,
    annotated: &AnnotatedSource,
    resolver: &mut R,
) -> ConsistencyReport {
    let mut matched = Vec::new();
    let mut unresolved_bindings = Vec::new();
    let mut conflicting = Vec::new();
    let mut diagnostics = Vec::new();

    for binding in &annotated.bindings {
        let digest = binding.instance_digest;
        let mut unresolved = |message: String| {
            diagnostics.push(Diagnostic::warning(binding.line, message));
            unresolved_bindings.push(binding.clone());
        };
        let Some(bytes) = resolver.resolve(&digest) else {
            unresolved(format!("instance document {digest} could not be resolved"));
            continue;
        };
        if fingerprint(&bytes) != digest {
            unresolved(format!("instance document {digest} failed fingerprint verification"));
            continue;
        }
        let doc = match InstanceDocument::from_json_bytes(&bytes) {
            Ok(doc) => doc,
            Err(e) => {
                unresolved(format!("instance document {digest} is malformed: {e}"));
                continue;
            }
        };
        if doc.ontology_id != model.ontology_id() {
            diagnostics.push(Diagnostic::warning(
                binding.line,
                format!(
                    "instance {} uses ontology {:?}, model uses {:?}",
                    doc.instance_id,
                    doc.ontology_id,
                    model.ontology_id()
                ),
            ));
        }
        if model.names_element(&doc.role_or_power) {
            matched.push(MatchedBinding {
                binding: binding.clone(),
                element: doc.role_or_power,
            });
        } else {
            diagnostics.push(Diagnostic::warning(
                binding.line,
                format!("instance {} names {:?}, which the model does not declare", doc.instance_id, doc.role_or_power),
            ));
            conflicting.push(ConflictingBinding {
                binding: binding.clone(),
                claimed: doc.role_or_power,
            });
        }
    }

    let annotated_elements: BTreeSet<&str> = matched.iter().map(|m| m.element.as_str()).collect();
    let unannotated_roles: Vec<String> = model
        .roles()
        .iter()
        .filter(|r| !annotated_elements.contains(r.name.as_str()))
        .map(|r| r.name.clone())
        .collect();

    let verdict = if !conflicting.is_empty() {
        Verdict::Inconsistent
    } else if unresolved_bindings.is_empty() && unannotated_roles.is_empty() {
        Verdict::Consistent
    } else {
        Verdict::Incomplete
    };

    ConsistencyReport {
        matched,
        unresolved_bindings,
        conflicting,
        unannotated_roles,
        diagnostics,
        verdict,
    }
}
