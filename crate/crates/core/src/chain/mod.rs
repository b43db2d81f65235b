//! Deterministic simulated contract environment with a hash-chained
//! block log.
//!
//! ```text
//! block_hash[i] = SHA-256(prev_hash[i] || canonical_json(transactions[i]))
//! prev_hash[0]  = 0^32
//! ```

mod env;
mod types;

pub use env::{Environment, DEPLOYER};
pub use types::{
    parse_chain_jsonl, verify_chain, verify_chain_encoded, Address, AddressParseError, Block,
    ChainError, ChainVerdict, ContractAccount, Disclosure, DisclosureField, KnownTemplate,
    Transaction,
};
