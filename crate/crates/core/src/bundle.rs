//! The complete set of documents a disclosing contract publishes.

use crate::annotation::InstanceDocument;
use crate::chain::Disclosure;
use crate::digest::{fingerprint, Digest};
use crate::governance::{
    build_the_dao_template, standard_governance_ontology, GovernanceModel, OntologyDocument,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentBundle {
    pub model: GovernanceModel,
    pub ontology: OntologyDocument,
    pub instances: Vec<InstanceDocument>,
    pub source: String,
}

impl DocumentBundle {
    pub fn disclosure(&self) -> Disclosure {
        Disclosure {
            governance_digest: self.model.fingerprint(),
            ontology_digest: self.ontology.fingerprint(),
            annotated_source_digest: fingerprint(self.source.as_bytes()),
        }
    }

    /// `(digest, bytes)` for every document, in publication order:
    /// model, ontology, source, then instance documents.
    pub fn documents(&self) -> Vec<(Digest, Vec<u8>)> {
        let mut docs = vec![
            self.model.canonicalize(),
            self.ontology.canonicalize(),
            self.source.as_bytes().to_vec(),
        ];
        docs.extend(self.instances.iter().map(InstanceDocument::canonicalize));
        docs.into_iter().map(|b| (fingerprint(&b), b)).collect()
    }
}

/// Instance document for `element` under the model's ontology.
pub fn instance_for(model: &GovernanceModel, element: &str, notes: &str) -> InstanceDocument {
    InstanceDocument {
        instance_id: format!("{}/{}", model.model_id(), element),
        role_or_power: element.to_string(),
        ontology_id: model.ontology_id().to_string(),
        notes: notes.to_string(),
    }
}

/// The standard DAO template with an annotated Solidity-like source.
pub fn standard_dao_bundle() -> DocumentBundle {
    let model = build_the_dao_template();
    let curator = instance_for(&model, "curator", "address appointed at creation");
    let holders = instance_for(&model, "tokenHolder", "token balances define membership");
    let split = instance_for(&model, "split", "token holders leave with a new curator");
    let quorum = instance_for(&model, "reduce-quorum", "curator-only quorum adjustment");
    let source = format!(
        r#"pragma solidity ^0.4.4;

contract StandardDAO {{
    /** @ontoInstance 0x{curator} */
    address public curator;

    /** @ontoInstance 0x{holders} */
    mapping (address => uint256) public balances;

    uint public minQuorumDivisor;

    /// Curator-only: halve the quorum requirement.
    /** @ontoInstance 0x{quorum} */
    function halveMinQuorum() returns (bool _success) {{
        if (msg.sender != curator) throw;
        minQuorumDivisor *= 2;
        return true;
    }}

    /** @ontoInstance 0x{split} */
    function splitDAO(uint _proposalID, address _newCurator) returns (bool _success) {{
        return true;
    }}
}}
"#,
        curator = curator.fingerprint(),
        holders = holders.fingerprint(),
        quorum = quorum.fingerprint(),
        split = split.fingerprint(),
    );
    DocumentBundle {
        model,
        ontology: standard_governance_ontology(),
        instances: vec![curator, holders, quorum, split],
        source,
    }
}
