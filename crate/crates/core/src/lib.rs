//! Machine-parseable smart-contract governance.
//!
//! Contracts disclose SHA-256 fingerprints of their governance model,
//! reference ontology and annotated source. A counterpart either
//! recognizes the fingerprints on-chain against known templates, or
//! delegates to an off-chain agent that resolves the documents from
//! content-addressable storage and assesses the governance structure.

pub mod agent;
pub mod annotation;
pub mod bundle;
pub mod canonical;
pub mod cas;
pub mod chain;
pub mod cli;
pub mod digest;
pub mod governance;

pub use digest::{fingerprint, Digest};
