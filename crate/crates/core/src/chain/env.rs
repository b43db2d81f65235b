use std::collections::BTreeMap;

use super::types::{
    verify_chain, Address, Block, ChainError, ChainVerdict, ContractAccount, Disclosure,
    DisclosureField, KnownTemplate, Transaction,
};
use crate::canonical::to_canonical_bytes;
use crate::digest::Digest;

/// Caller recorded for deployments and for the off-chain agent's reads.
pub const DEPLOYER: Address = Address::ZERO;

const NO_DISCLOSURE: &[u8] = b"error:no-disclosure";

/// Single-owner state machine: accounts, a pending transaction set and
/// the sealed block log.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    accounts: BTreeMap<Address, ContractAccount>,
    pending: Vec<Transaction>,
    blocks: Vec<Block>,
    next_seq: u64,
    deployments: u64,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds an environment by verifying `blocks` and replaying their
    /// deployments.
    pub fn from_blocks(blocks: Vec<Block>) -> Result<Self, ChainError> {
        if let ChainVerdict::Invalid { index } = verify_chain(&blocks) {
            return Err(ChainError::InvalidChain(index));
        }
        let mut env = Environment::new();
        for (index, block) in blocks.iter().enumerate() {
            for tx in &block.transactions {
                env.next_seq = tx.seq + 1;
                if tx.method != "deploy" {
                    continue;
                }
                let replay = |message: String| ChainError::Replay { index, message };
                let expected = Address::for_deployment(env.deployments);
                if tx.target != expected {
                    return Err(replay(format!("deployment address {} != {expected}", tx.target)));
                }
                let [disclosure, templates] = tx.args.as_slice() else {
                    return Err(replay("deploy expects two arguments".into()));
                };
                let disclosure = if disclosure.is_empty() {
                    None
                } else {
                    Some(serde_json::from_slice(disclosure).map_err(|e| replay(e.to_string()))?)
                };
                let templates =
                    serde_json::from_slice(templates).map_err(|e| replay(e.to_string()))?;
                env.insert_account(expected, disclosure, templates);
            }
        }
        env.blocks = blocks;
        Ok(env)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn pending(&self) -> &[Transaction] {
        &self.pending
    }

    pub fn account(&self, address: &Address) -> Option<&ContractAccount> {
        self.accounts.get(address)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &ContractAccount> {
        self.accounts.values()
    }

    fn require(&self, address: &Address) -> Result<&ContractAccount, ChainError> {
        self.accounts
            .get(address)
            .ok_or(ChainError::UnknownAddress(*address))
    }

    pub(crate) fn record(
        &mut self,
        caller: Address,
        target: Address,
        method: &str,
        args: Vec<Vec<u8>>,
        result: Vec<u8>,
    ) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.push(Transaction {
            seq,
            caller,
            target,
            method: method.to_string(),
            args,
            result,
        });
    }

    fn insert_account(
        &mut self,
        address: Address,
        disclosure: Option<Disclosure>,
        known_templates: Vec<KnownTemplate>,
    ) {
        let mut storage = BTreeMap::new();
        if let Some(d) = &disclosure {
            for field in [DisclosureField::Governance, DisclosureField::Ontology, DisclosureField::AnnotatedSource] {
                storage.insert(field.method().to_string(), field.select(d).as_bytes().to_vec());
            }
        }
        self.accounts.insert(
            address,
            ContractAccount {
                address,
                disclosure,
                known_templates,
                storage,
            },
        );
        self.deployments += 1;
    }

    /// Creates a contract at the next deterministic address.
    pub fn deploy(&mut self, disclosure: Option<Disclosure>, known_templates: Vec<KnownTemplate>) -> Address {
        let address = Address::for_deployment(self.deployments);
        let disclosure_arg = disclosure
            .as_ref()
            .map(|d| to_canonical_bytes(d).expect("digests only"))
            .unwrap_or_default();
        let templates_arg = to_canonical_bytes(&known_templates).expect("digests only");
        self.insert_account(address, disclosure, known_templates);
        self.record(
            DEPLOYER,
            address,
            "deploy",
            vec![disclosure_arg, templates_arg],
            address.as_bytes().to_vec(),
        );
        address
    }

    /// One of the three disclosure getters, logged as a transaction.
    pub fn call_disclosure(
        &mut self,
        caller: Address,
        target: Address,
        which: DisclosureField,
    ) -> Result<Digest, ChainError> {
        let disclosure = self.require(&target)?.disclosure;
        match disclosure {
            Some(d) => {
                let digest = which.select(&d);
                self.record(caller, target, which.method(), vec![], digest.as_bytes().to_vec());
                Ok(digest)
            }
            None => {
                self.record(caller, target, which.method(), vec![], NO_DISCLOSURE.to_vec());
                Err(ChainError::NoDisclosure(target))
            }
        }
    }

    /// True iff `other` discloses a (governance, ontology) pair that
    /// `this` lists among its known templates.
    pub fn is_familiar_governance(&mut self, this: Address, other: Address) -> Result<bool, ChainError> {
        let known = &self.require(&this)?.known_templates;
        let familiar = match self.require(&other)?.disclosure {
            Some(d) => known.contains(&KnownTemplate {
                governance: d.governance_digest,
                ontology: d.ontology_digest,
            }),
            None => false,
        };
        self.record(
            this,
            other,
            "isFamiliarGovernance",
            vec![other.as_bytes().to_vec()],
            vec![familiar as u8],
        );
        Ok(familiar)
    }

    /// Moves all pending transactions into a new block.
    pub fn seal_block(&mut self) -> &Block {
        let prev = self.blocks.last().map_or(Digest::ZERO, |b| b.block_hash);
        let block = Block::seal(self.blocks.len() as u64, prev, std::mem::take(&mut self.pending));
        self.blocks.push(block);
        self.blocks.last().expect("just pushed")
    }

    /// Newline-delimited canonical JSON, one sealed block per line.
    pub fn export_jsonl(&self) -> String {
        let mut out = String::new();
        for block in &self.blocks {
            out.push_str(&block.to_canonical_line());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::parse_chain_jsonl;

    fn digest(s: &str) -> Digest {
        Digest::parse(s).unwrap()
    }

    fn inference_disclosure() -> Disclosure {
        Disclosure {
            governance_digest: digest("0x56B3CAEC460654DF16232C6207DFF138807401A2D439366BFEB80E981C1410BF"),
            ontology_digest: digest("0x329A16326F27E5C96A45BC1DDA19C49C18ED32593E868F7B2534CDAE3A0A0665"),
            annotated_source_digest: digest("0x0F9E141DA2589A9EE28BC3F825E03D08F8F69F5AA9530ED485E5A19904C52579"),
        }
    }

    #[test]
    fn deploys_get_distinct_addresses() {
        let mut env = Environment::new();
        let a = env.deploy(None, vec![]);
        let b = env.deploy(None, vec![]);
        assert_ne!(a, b);
        assert_eq!(a, Address::for_deployment(0));
        assert_eq!(env.pending().len(), 2);
    }

    #[test]
    fn getters_return_disclosed_digests() {
        let mut env = Environment::new();
        let d = inference_disclosure();
        let b = env.deploy(Some(d), vec![]);
        let a = env.deploy(None, vec![]);
        assert_eq!(env.call_disclosure(a, b, DisclosureField::Governance).unwrap(), d.governance_digest);
        assert_eq!(env.call_disclosure(a, b, DisclosureField::Ontology).unwrap(), d.ontology_digest);
        assert_eq!(
            env.call_disclosure(a, b, DisclosureField::AnnotatedSource).unwrap(),
            d.annotated_source_digest
        );
        assert!(matches!(
            env.call_disclosure(b, a, DisclosureField::Governance),
            Err(ChainError::NoDisclosure(x)) if x == a
        ));
        let ghost = Address::from_bytes([7; 20]);
        assert!(matches!(
            env.call_disclosure(a, ghost, DisclosureField::Governance),
            Err(ChainError::UnknownAddress(_))
        ));
        // deploys + four getter calls; the unknown target is not logged.
        assert_eq!(env.pending().len(), 6);
    }

    #[test]
    fn familiarity_needs_both_digests() {
        let mut env = Environment::new();
        let d = inference_disclosure();
        let me = env.deploy(
            None,
            vec![KnownTemplate { governance: d.governance_digest, ontology: d.ontology_digest }],
        );
        let same = env.deploy(Some(d), vec![]);
        let other_onto = env.deploy(
            Some(Disclosure { ontology_digest: Digest::ZERO, ..d }),
            vec![],
        );
        let silent = env.deploy(None, vec![]);
        assert!(env.is_familiar_governance(me, same).unwrap());
        assert!(!env.is_familiar_governance(me, other_onto).unwrap());
        assert!(!env.is_familiar_governance(me, silent).unwrap());
    }

    #[test]
    fn sealing_chains_blocks() {
        let mut env = Environment::new();
        let genesis = env.seal_block().clone();
        assert_eq!(genesis.index, 0);
        assert_eq!(genesis.prev_hash, Digest::ZERO);
        assert!(genesis.transactions.is_empty());
        env.deploy(None, vec![]);
        let next = env.seal_block().clone();
        assert_eq!(next.prev_hash, genesis.block_hash);
        assert!(env.pending().is_empty());
    }

    #[test]
    fn replay_restores_accounts() {
        let mut env = Environment::new();
        let b = env.deploy(Some(inference_disclosure()), vec![]);
        env.seal_block();
        let a = env.deploy(None, vec![]);
        env.call_disclosure(a, b, DisclosureField::Governance).unwrap();
        env.seal_block();

        let text = env.export_jsonl();
        let mut restored = Environment::from_blocks(parse_chain_jsonl(text.as_bytes()).unwrap()).unwrap();
        assert_eq!(restored.account(&b), env.account(&b));
        assert_eq!(restored.account(&a), env.account(&a));
        let c = restored.deploy(None, vec![]);
        assert_eq!(c, Address::for_deployment(2));
        restored.seal_block();
        assert_eq!(restored.blocks()[2].transactions[0].seq, 3);
    }
}
