use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical::to_canonical_bytes;
use crate::digest::{fingerprint, Digest};

pub const ADDRESS_LEN: usize = 20;

/// 20-byte account address, rendered `0x` + lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address([u8; ADDRESS_LEN]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid address {0:?}: expected 0x followed by 40 hex characters")]
pub struct AddressParseError(pub String);

impl Address {
    pub const ZERO: Address = Address([0u8; ADDRESS_LEN]);

    pub const fn from_bytes(bytes: [u8; ADDRESS_LEN]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; ADDRESS_LEN] {
        &self.0
    }

    /// Deterministic address of the `n`-th deployment: the first 20 bytes
    /// of SHA-256 over `n` as a big-endian u64.
    pub fn for_deployment(n: u64) -> Self {
        let d = fingerprint(&n.to_be_bytes());
        let mut out = [0u8; ADDRESS_LEN];
        out.copy_from_slice(&d.as_bytes()[..ADDRESS_LEN]);
        Self(out)
    }
}

impl FromStr for Address {
    type Err = AddressParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AddressParseError(s.to_string());
        let body = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).ok_or_else(err)?;
        if body.len() != ADDRESS_LEN * 2 {
            return Err(err());
        }
        let mut out = [0u8; ADDRESS_LEN];
        hex::decode_to_slice(body, &mut out).map_err(|_| err())?;
        Ok(Self(out))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The three fingerprints a contract publishes about itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disclosure {
    pub governance_digest: Digest,
    pub ontology_digest: Digest,
    pub annotated_source_digest: Digest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DisclosureField {
    Governance,
    Ontology,
    AnnotatedSource,
}

impl DisclosureField {
    /// Contract method name of the getter.
    pub fn method(self) -> &'static str {
        match self {
            DisclosureField::Governance => "getGovernanceModel",
            DisclosureField::Ontology => "getReferenceOntology",
            DisclosureField::AnnotatedSource => "getAnnotatedSource",
        }
    }

    pub fn select(self, d: &Disclosure) -> Digest {
        match self {
            DisclosureField::Governance => d.governance_digest,
            DisclosureField::Ontology => d.ontology_digest,
            DisclosureField::AnnotatedSource => d.annotated_source_digest,
        }
    }
}

/// A (governance, ontology) pair a contract recognizes on-chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownTemplate {
    pub governance: Digest,
    pub ontology: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractAccount {
    pub address: Address,
    pub disclosure: Option<Disclosure>,
    pub known_templates: Vec<KnownTemplate>,
    pub storage: BTreeMap<String, Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transaction {
    pub seq: u64,
    pub caller: Address,
    pub target: Address,
    pub method: String,
    #[serde(with = "hex_list")]
    pub args: Vec<Vec<u8>>,
    #[serde(with = "hex")]
    pub result: Vec<u8>,
}

mod hex_list {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(items: &[Vec<u8>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(items.iter().map(hex::encode))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<u8>>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|h| hex::decode(h).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub index: u64,
    pub prev_hash: Digest,
    pub transactions: Vec<Transaction>,
    pub block_hash: Digest,
}

impl Block {
    pub fn compute_hash(prev_hash: &Digest, transactions: &[Transaction]) -> Digest {
        let mut buf = prev_hash.as_bytes().to_vec();
        buf.extend_from_slice(&encode_transactions(transactions));
        fingerprint(&buf)
    }

    pub fn seal(index: u64, prev_hash: Digest, transactions: Vec<Transaction>) -> Self {
        let block_hash = Self::compute_hash(&prev_hash, &transactions);
        Self {
            index,
            prev_hash,
            transactions,
            block_hash,
        }
    }

    pub fn hash_is_valid(&self) -> bool {
        Self::compute_hash(&self.prev_hash, &self.transactions) == self.block_hash
    }

    /// One line of a `.chain.jsonl` file, without the newline.
    pub fn to_canonical_line(&self) -> String {
        String::from_utf8(to_canonical_bytes(self).expect("block has no floats"))
            .expect("canonical JSON is UTF-8")
    }
}

pub fn encode_transactions(transactions: &[Transaction]) -> Vec<u8> {
    to_canonical_bytes(transactions).expect("transactions have no floats")
}

impl Transaction {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_bytes(self).expect("transaction has no floats")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ChainVerdict {
    Valid,
    Invalid { index: usize },
}

impl ChainVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChainVerdict::Valid)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ChainError {
    #[error("unknown address {0}")]
    UnknownAddress(Address),
    #[error("contract {0} has no governance disclosure")]
    NoDisclosure(Address),
    #[error("chain is invalid starting at block {0}")]
    InvalidChain(usize),
    #[error("block {index}: {message}")]
    Replay { index: usize, message: String },
}

/// Reports the lowest block index that breaks the hash or linkage
/// invariants.
pub fn verify_chain(blocks: &[Block]) -> ChainVerdict {
    let mut prev = Digest::ZERO;
    let mut last_seq: Option<u64> = None;
    for (i, block) in blocks.iter().enumerate() {
        let seq_ok = block.transactions.iter().all(|tx| {
            let ok = last_seq.is_none_or(|s| tx.seq > s);
            last_seq = Some(tx.seq);
            ok
        });
        if block.index != i as u64 || block.prev_hash != prev || !block.hash_is_valid() || !seq_ok {
            return ChainVerdict::Invalid { index: i };
        }
        prev = block.block_hash;
    }
    ChainVerdict::Valid
}

/// Verifies a `.chain.jsonl` byte stream. A line that does not decode, or
/// is not in canonical form, counts as invalid at its position.
pub fn verify_chain_encoded(bytes: &[u8]) -> ChainVerdict {
    let (blocks, bad_line) = decode_lines(bytes);
    match (verify_chain(&blocks), bad_line) {
        (ChainVerdict::Invalid { index }, _) => ChainVerdict::Invalid { index },
        (ChainVerdict::Valid, Some(index)) => ChainVerdict::Invalid { index },
        (ChainVerdict::Valid, None) => ChainVerdict::Valid,
    }
}

/// Imports a `.chain.jsonl` file, rejecting it unless it verifies.
pub fn parse_chain_jsonl(bytes: &[u8]) -> Result<Vec<Block>, ChainError> {
    match verify_chain_encoded(bytes) {
        ChainVerdict::Valid => Ok(decode_lines(bytes).0),
        ChainVerdict::Invalid { index } => Err(ChainError::InvalidChain(index)),
    }
}

/// Decodes lines up to the first one that fails to decode or is not
/// canonical, returning that line's index.
fn decode_lines(bytes: &[u8]) -> (Vec<Block>, Option<usize>) {
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    let mut blocks = Vec::new();
    if body.is_empty() {
        return (blocks, None);
    }
    for (i, line) in body.split(|&b| b == b'\n').enumerate() {
        match serde_json::from_slice::<Block>(line) {
            Ok(block) if block.to_canonical_line().as_bytes() == line => blocks.push(block),
            _ => return (blocks, Some(i)),
        }
    }
    (blocks, None)
}
