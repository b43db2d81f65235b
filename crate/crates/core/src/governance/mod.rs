//! Governance-structure data model: roles, powers and check-and-balance
//! relations, plus the reference ontology they are described in.

mod model;
mod ontology;
mod template;

pub use model::{
    canonicalize, Cardinality, GovernanceModel, ModelError, Power, Relation, RelationKind, Role,
};
pub use ontology::{OntologyDocument, OntologyError, Term};
pub use template::{
    build_the_dao_template, standard_governance_ontology, STANDARD_DAO_MODEL_ID,
    STANDARD_ONTOLOGY_ID,
};
