use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_bytes;
use crate::digest::{fingerprint, Digest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cardinality {
    One,
    Many,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Role {
    pub name: String,
    pub description: String,
    /// Human-readable rule for how an agent comes to hold the role.
    pub acquisition: String,
    pub cardinality: Cardinality,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Power {
    pub name: String,
    /// Name of the role holding this power.
    pub holder: String,
    /// The governed function or parameter.
    pub target: String,
    pub effect: String,
    /// An empty list marks the power as privileged.
    pub constraints: Vec<String>,
}

impl Power {
    pub fn is_privileged(&self) -> bool {
        self.constraints.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Checks,
    Delegates,
    Appoints,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub kind: RelationKind,
    pub from_role: String,
    pub to_role: String,
    pub via_power: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("role name must not be empty")]
    EmptyRoleName,
    #[error("power name must not be empty")]
    EmptyPowerName,
    #[error("duplicate role {0:?}")]
    DuplicateRole(String),
    #[error("duplicate power {0:?}")]
    DuplicatePower(String),
    #[error("{context}: {field} references missing {kind} {missing:?}")]
    DanglingReference {
        context: String,
        field: &'static str,
        kind: &'static str,
        missing: String,
    },
    #[error("unknown role {0:?}")]
    UnknownRole(String),
    #[error("malformed governance model: {0}")]
    Malformed(String),
}

/// Serialized shape of a model; also the input to validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    model_id: String,
    ontology_id: String,
    roles: Vec<Role>,
    powers: Vec<Power>,
    relations: Vec<Relation>,
}

/// A validated governance structure. Entries are kept sorted, so two
/// models compare equal exactly when they canonicalize identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct GovernanceModel {
    model_id: String,
    ontology_id: String,
    roles: Vec<Role>,
    powers: Vec<Power>,
    relations: Vec<Relation>,
}

impl GovernanceModel {
    pub fn new(
        model_id: impl Into<String>,
        ontology_id: impl Into<String>,
        mut roles: Vec<Role>,
        mut powers: Vec<Power>,
        mut relations: Vec<Relation>,
    ) -> Result<Self, ModelError> {
        let mut role_names = BTreeSet::new();
        for role in &roles {
            if role.name.is_empty() {
                return Err(ModelError::EmptyRoleName);
            }
            if !role_names.insert(role.name.as_str()) {
                return Err(ModelError::DuplicateRole(role.name.clone()));
            }
        }
        let mut power_names = BTreeSet::new();
        for power in &powers {
            if power.name.is_empty() {
                return Err(ModelError::EmptyPowerName);
            }
            if !power_names.insert(power.name.as_str()) {
                return Err(ModelError::DuplicatePower(power.name.clone()));
            }
            if !role_names.contains(power.holder.as_str()) {
                return Err(dangling(format!("power {:?}", power.name), "holder", "role", &power.holder));
            }
        }
        for rel in &relations {
            let context = || format!("relation {:?}->{:?}", rel.from_role, rel.to_role);
            if !role_names.contains(rel.from_role.as_str()) {
                return Err(dangling(context(), "from_role", "role", &rel.from_role));
            }
            if !role_names.contains(rel.to_role.as_str()) {
                return Err(dangling(context(), "to_role", "role", &rel.to_role));
            }
            if !power_names.contains(rel.via_power.as_str()) {
                return Err(dangling(context(), "via_power", "power", &rel.via_power));
            }
        }

        roles.sort_by(|a, b| a.name.cmp(&b.name));
        powers.sort_by(|a, b| a.name.cmp(&b.name));
        // Relations carry no name; the full tuple gives a total order.
        relations.sort();
        relations.dedup();

        Ok(Self {
            model_id: model_id.into(),
            ontology_id: ontology_id.into(),
            roles,
            powers,
            relations,
        })
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let record: ModelRecord =
            serde_json::from_slice(bytes).map_err(|e| ModelError::Malformed(e.to_string()))?;
        Self::try_from(record)
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn ontology_id(&self) -> &str {
        &self.ontology_id
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn powers(&self) -> &[Power] {
        &self.powers
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn role(&self, name: &str) -> Option<&Role> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn power(&self, name: &str) -> Option<&Power> {
        self.powers.iter().find(|p| p.name == name)
    }

    /// True when `name` is a role or a power of this model.
    pub fn names_element(&self, name: &str) -> bool {
        self.role(name).is_some() || self.power(name).is_some()
    }

    /// Canonical JSON encoding. Validation at construction guarantees
    /// every cross-reference resolves, so encoding cannot fail.
    pub fn canonicalize(&self) -> Vec<u8> {
        to_canonical_bytes(&ModelRecord::from(self.clone()))
            .expect("governance model contains only strings and arrays")
    }

    pub fn fingerprint(&self) -> Digest {
        fingerprint(&self.canonicalize())
    }

    /// Powers held by `role`, sorted by name.
    pub fn query_powers(&self, role: &str) -> Result<Vec<&Power>, ModelError> {
        self.require_role(role)?;
        Ok(self.powers.iter().filter(|p| p.holder == role).collect())
    }

    /// `checks` relations constraining `role`.
    pub fn query_checks(&self, role: &str) -> Result<Vec<&Relation>, ModelError> {
        self.require_role(role)?;
        Ok(self
            .relations
            .iter()
            .filter(|r| r.kind == RelationKind::Checks && r.to_role == role)
            .collect())
    }

    fn require_role(&self, role: &str) -> Result<(), ModelError> {
        match self.role(role) {
            Some(_) => Ok(()),
            None => Err(ModelError::UnknownRole(role.to_string())),
        }
    }
}

fn dangling(context: String, field: &'static str, kind: &'static str, missing: &str) -> ModelError {
    ModelError::DanglingReference {
        context,
        field,
        kind,
        missing: missing.to_string(),
    }
}

impl TryFrom<ModelRecord> for GovernanceModel {
    type Error = ModelError;

    fn try_from(r: ModelRecord) -> Result<Self, Self::Error> {
        GovernanceModel::new(r.model_id, r.ontology_id, r.roles, r.powers, r.relations)
    }
}

impl From<GovernanceModel> for ModelRecord {
    fn from(m: GovernanceModel) -> Self {
        ModelRecord {
            model_id: m.model_id,
            ontology_id: m.ontology_id,
            roles: m.roles,
            powers: m.powers,
            relations: m.relations,
        }
    }
}

/// Canonicalizes a model; see [`GovernanceModel::canonicalize`].
pub fn canonicalize(model: &GovernanceModel) -> Vec<u8> {
    model.canonicalize()
}
