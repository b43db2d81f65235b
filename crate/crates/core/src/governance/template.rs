//! Built-in templates: the standard DAO governance structure and the
//! reference vocabulary it is expressed in.

use super::{Cardinality, GovernanceModel, OntologyDocument, Power, Relation, RelationKind, Role, Term};

pub const STANDARD_DAO_MODEL_ID: &str = "standard-dao";
pub const STANDARD_ONTOLOGY_ID: &str = "blockchain-governance/1";

/// The DAO: a single curator gatekeeping payouts, and token holders who
/// propose, vote and can split away from the curator. There is no owner.
pub fn build_the_dao_template() -> GovernanceModel {
    let roles = vec![
        Role {
            name: "curator".into(),
            description: "Gatekeeper appointed at creation; whitelists the addresses the contract may pay"
                .into(),
            acquisition: "appointed when the contract is created".into(),
            cardinality: Cardinality::One,
        },
        Role {
            name: "tokenHolder".into(),
            description: "Holder of DAO tokens with proposal, voting and split rights".into(),
            acquisition: "send ether into the contract".into(),
            cardinality: Cardinality::Many,
        },
    ];
    let powers = vec![
        Power {
            name: "manage-whitelist".into(),
            holder: "curator".into(),
            target: "payout whitelist".into(),
            effect: "add or remove addresses that the contract is permitted to send ether to".into(),
            constraints: vec![],
        },
        Power {
            name: "reduce-quorum".into(),
            holder: "curator".into(),
            target: "voting quorum".into(),
            effect: "reduce the number of token holders required to establish voting quorum".into(),
            constraints: vec![],
        },
        Power {
            name: "create-proposal".into(),
            holder: "tokenHolder".into(),
            target: "proposals".into(),
            effect: "submit a new spending proposal".into(),
            constraints: vec!["recipient must be on the payout whitelist".into()],
        },
        Power {
            name: "vote".into(),
            holder: "tokenHolder".into(),
            target: "proposals".into(),
            effect: "vote on open proposals".into(),
            constraints: vec!["voting weight proportional to tokens held".into()],
        },
        Power {
            name: "split".into(),
            holder: "tokenHolder".into(),
            target: "contract funds".into(),
            effect: "split the DAO into the original and a new child DAO with a new curator".into(),
            constraints: vec!["requires a split proposal".into()],
        },
    ];
    let relations = vec![Relation {
        kind: RelationKind::Checks,
        from_role: "tokenHolder".into(),
        to_role: "curator".into(),
        via_power: "split".into(),
    }];
    GovernanceModel::new(STANDARD_DAO_MODEL_ID, STANDARD_ONTOLOGY_ID, roles, powers, relations)
        .expect("built-in template is valid")
}

/// Vocabulary referenced by [`build_the_dao_template`].
pub fn standard_governance_ontology() -> OntologyDocument {
    let t = |name: &str, definition: &str, parent: Option<&str>| Term {
        name: name.into(),
        definition: definition.into(),
        parent: parent.map(Into::into),
    };
    OntologyDocument::new(
        STANDARD_ONTOLOGY_ID,
        vec![
            t("Agent", "An individual or contract that interacts with a smart contract", None),
            t("Role", "A position in a governance structure held by one or more agents", None),
            t("Power", "An action a role may take over a governed function or parameter", None),
            t("Relation", "A structural link between two roles mediated by a power", None),
            t("Curator", "Role that gatekeeps which addresses may receive funds", Some("Role")),
            t("TokenHolder", "Role acquired by contributing funds in exchange for tokens", Some("Role")),
            t("Owner", "Role with privileged control, typically the deployer", Some("Role")),
            t("Whitelist", "Set of addresses permitted to receive funds", None),
            t("Quorum", "Minimum participation required for a vote to be valid", None),
            t("CheckAndBalance", "Relation by which one role constrains another", Some("Relation")),
            t("Delegation", "Relation by which one role lends a power to another", Some("Relation")),
            t("Appointment", "Relation by which one role installs the holder of another", Some("Relation")),
        ],
    )
    .expect("built-in ontology is valid")
}
