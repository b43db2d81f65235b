use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_bytes;
use crate::digest::{fingerprint, Digest};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub name: String,
    pub definition: String,
    /// Subsuming term, if any.
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OntologyError {
    #[error("duplicate term {0:?}")]
    DuplicateTerm(String),
    #[error("term {term:?} names missing parent {parent:?}")]
    MissingParent { term: String, parent: String },
    #[error("subsumption cycle through term {0:?}")]
    Cycle(String),
    #[error("malformed ontology document: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyRecord {
    ontology_id: String,
    terms: Vec<Term>,
}

/// A small reference vocabulary with single-parent subsumption.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OntologyRecord", into = "OntologyRecord")]
pub struct OntologyDocument {
    ontology_id: String,
    terms: Vec<Term>,
}

impl OntologyDocument {
    pub fn new(ontology_id: impl Into<String>, mut terms: Vec<Term>) -> Result<Self, OntologyError> {
        let mut parents: BTreeMap<&str, Option<&str>> = BTreeMap::new();
        for term in &terms {
            if parents.insert(&term.name, term.parent.as_deref()).is_some() {
                return Err(OntologyError::DuplicateTerm(term.name.clone()));
            }
        }
        for term in &terms {
            if let Some(parent) = &term.parent {
                if !parents.contains_key(parent.as_str()) {
                    return Err(OntologyError::MissingParent {
                        term: term.name.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }
        // Every term has at most one parent, so walking up from each term
        // either reaches a root or revisits a term.
        for start in parents.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = Some(*start);
            while let Some(name) = cur {
                if !seen.insert(name) {
                    return Err(OntologyError::Cycle((*start).to_string()));
                }
                cur = parents[name];
            }
        }
        terms.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(Self {
            ontology_id: ontology_id.into(),
            terms,
        })
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, OntologyError> {
        let record: OntologyRecord =
            serde_json::from_slice(bytes).map_err(|e| OntologyError::Malformed(e.to_string()))?;
        Self::try_from(record)
    }

    pub fn ontology_id(&self) -> &str {
        &self.ontology_id
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    /// True when `name` equals `ancestor` or lies below it.
    pub fn is_subsumed_by(&self, name: &str, ancestor: &str) -> bool {
        let mut cur = self.term(name);
        while let Some(term) = cur {
            if term.name == ancestor {
                return true;
            }
            cur = term.parent.as_deref().and_then(|p| self.term(p));
        }
        false
    }

    pub fn canonicalize(&self) -> Vec<u8> {
        to_canonical_bytes(&OntologyRecord::from(self.clone())).expect("ontology is string-only")
    }

    pub fn fingerprint(&self) -> Digest {
        fingerprint(&self.canonicalize())
    }
}

impl TryFrom<OntologyRecord> for OntologyDocument {
    type Error = OntologyError;

    fn try_from(r: OntologyRecord) -> Result<Self, Self::Error> {
        OntologyDocument::new(r.ontology_id, r.terms)
    }
}

impl From<OntologyDocument> for OntologyRecord {
    fn from(d: OntologyDocument) -> Self {
        OntologyRecord {
            ontology_id: d.ontology_id,
            terms: d.terms,
        }
    }
}
