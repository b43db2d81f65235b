use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_bytes;
use crate::digest::Digest;
use crate::governance::GovernanceModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateEntry {
    pub name: String,
    pub model: GovernanceModel,
    /// Fingerprint of the ontology document the template is expressed in.
    pub ontology_digest: Digest,
    pub policy: Policy,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("template {name:?} hashes to {actual}, not to its key {key}")]
    KeyMismatch { name: String, key: Digest, actual: Digest },
    #[error("malformed registry: {0}")]
    Malformed(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryRecord {
    entries: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    governance_digest: Digest,
    #[serde(flatten)]
    entry: TemplateEntry,
}

/// Known governance templates keyed by the fingerprint of their
/// canonical encoding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateRegistry {
    entries: BTreeMap<Digest, TemplateEntry>,
}

impl TemplateRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts under an explicit key; rejected unless the model hashes
    /// to it.
    pub fn insert(&mut self, key: Digest, entry: TemplateEntry) -> Result<(), RegistryError> {
        let actual = entry.model.fingerprint();
        if actual != key {
            return Err(RegistryError::KeyMismatch {
                name: entry.name,
                key,
                actual,
            });
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        model: GovernanceModel,
        ontology_digest: Digest,
        policy: Policy,
    ) -> Digest {
        let key = model.fingerprint();
        self.entries.insert(
            key,
            TemplateEntry {
                name: name.into(),
                model,
                ontology_digest,
                policy,
            },
        );
        key
    }

    pub fn get(&self, key: &Digest) -> Option<&TemplateEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Digest, &TemplateEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let record = RegistryRecord {
            entries: self
                .entries
                .iter()
                .map(|(k, e)| EntryRecord {
                    governance_digest: *k,
                    entry: e.clone(),
                })
                .collect(),
        };
        to_canonical_bytes(&record).expect("registry has no floats")
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, RegistryError> {
        let record: RegistryRecord =
            serde_json::from_slice(bytes).map_err(|e| RegistryError::Malformed(e.to_string()))?;
        let mut registry = Self::new();
        for r in record.entries {
            registry.insert(r.governance_digest, r.entry)?;
        }
        Ok(registry)
    }
}
