//! Content-addressable storage.
//!
//! Documents are stored under their SHA-256 fingerprint and re-verified on
//! every read, locally and over the wire. No retrieval path returns bytes
//! whose fingerprint differs from the requested digest.

mod store;
mod wire;

use crate::digest::Digest;

pub use store::{CasEntry, CasStore, DEFAULT_MAX_CONTENT};
pub use wire::{fetch, CasServer, RemoteCas, Request, DEFAULT_PORT};

#[derive(Debug, thiserror::Error)]
pub enum CasError {
    #[error("content is {size} bytes, limit is {max}")]
    TooLarge { size: usize, max: usize },
    #[error("storage: {0}")]
    Storage(#[from] std::io::Error),
    #[error("integrity failure: content does not hash to {0}")]
    Integrity(Digest),
    #[error("transport: {0}")]
    Transport(std::io::Error),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("server error: {0}")]
    Remote(String),
}

/// Maps a digest to candidate content. Implementations may return bytes
/// that do not match; callers re-verify.
pub trait ContentResolver {
    fn resolve(&mut self, digest: &Digest) -> Option<Vec<u8>>;
}

impl<F> ContentResolver for F
where
    F: FnMut(&Digest) -> Option<Vec<u8>>,
{
    fn resolve(&mut self, digest: &Digest) -> Option<Vec<u8>> {
        self(digest)
    }
}

impl ContentResolver for CasStore {
    fn resolve(&mut self, digest: &Digest) -> Option<Vec<u8>> {
        self.get(digest).ok().flatten()
    }
}

impl ContentResolver for RemoteCas {
    fn resolve(&mut self, digest: &Digest) -> Option<Vec<u8>> {
        self.fetch(digest).ok().flatten()
    }
}
