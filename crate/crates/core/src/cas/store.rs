use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::UNIX_EPOCH;

use super::CasError;
use crate::digest::{fingerprint, Digest};

/// Default per-entry size limit (16 MiB).
pub const DEFAULT_MAX_CONTENT: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasEntry {
    pub digest: Digest,
    pub content: Vec<u8>,
    /// Seconds since the epoch; informational, never hashed.
    pub stored_at: u64,
}

/// Filesystem store laid out as `<root>/objects/ab/cdef…`.
#[derive(Debug, Clone)]
pub struct CasStore {
    root: PathBuf,
    max_content: usize,
}

impl CasStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, CasError> {
        let root = root.into();
        fs::create_dir_all(root.join("objects"))?;
        Ok(Self {
            root,
            max_content: DEFAULT_MAX_CONTENT,
        })
    }

    pub fn with_max_content(mut self, max: usize) -> Self {
        self.max_content = max;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn max_content(&self) -> usize {
        self.max_content
    }

    pub fn path_for(&self, digest: &Digest) -> PathBuf {
        let hex = digest.to_hex();
        self.root.join("objects").join(&hex[..2]).join(&hex[2..])
    }

    /// Stores `content` under its fingerprint. Re-putting identical content
    /// is a no-op unless the existing entry has been corrupted.
    pub fn put(&self, content: &[u8]) -> Result<Digest, CasError> {
        if content.len() > self.max_content {
            return Err(CasError::TooLarge {
                size: content.len(),
                max: self.max_content,
            });
        }
        let digest = fingerprint(content);
        if matches!(self.get(&digest), Ok(Some(_))) {
            return Ok(digest);
        }
        let path = self.path_for(&digest);
        let dir = path.parent().expect("fan-out directory");
        fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(content)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CasError::Storage(e.error))?;
        Ok(digest)
    }

    /// Returns the verified content for `digest`, `None` if absent.
    pub fn get(&self, digest: &Digest) -> Result<Option<Vec<u8>>, CasError> {
        match fs::read(self.path_for(digest)) {
            Ok(content) if fingerprint(&content) == *digest => Ok(Some(content)),
            Ok(_) => Err(CasError::Integrity(*digest)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn entry(&self, digest: &Digest) -> Result<Option<CasEntry>, CasError> {
        let Some(content) = self.get(digest)? else {
            return Ok(None);
        };
        let stored_at = fs::metadata(self.path_for(digest))?
            .modified()
            .ok()
            .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
            .map_or(0, |d| d.as_secs());
        Ok(Some(CasEntry {
            digest: *digest,
            content,
            stored_at,
        }))
    }

    pub fn contains(&self, digest: &Digest) -> bool {
        self.path_for(digest).is_file()
    }

    /// Deletes an entry; returns whether it existed.
    pub fn remove(&self, digest: &Digest) -> Result<bool, CasError> {
        match fs::remove_file(self.path_for(digest)) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(false),
            Err(e) => Err(e.into()),
        }
    }

    /// Digests of all entries, sorted.
    pub fn digests(&self) -> Result<Vec<Digest>, CasError> {
        let mut out = Vec::new();
        for fan in fs::read_dir(self.root.join("objects"))? {
            let fan = fan?;
            if !fan.file_type()?.is_dir() {
                continue;
            }
            let prefix = fan.file_name().to_string_lossy().into_owned();
            for entry in fs::read_dir(fan.path())? {
                let name = entry?.file_name().to_string_lossy().into_owned();
                if let Ok(d) = Digest::parse(&format!("{prefix}{name}")) {
                    out.push(d);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn len(&self) -> Result<usize, CasError> {
        self.digests().map(|d| d.len())
    }

    pub fn is_empty(&self) -> Result<bool, CasError> {
        self.len().map(|n| n == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_get_and_idempotence() {
        let dir = tempfile::tempdir().unwrap();
        let store = CasStore::open(dir.path()).unwrap();
        let d = store.put(b"hello").unwrap();
        assert_eq!(store.put(b"hello").unwrap(), d);
        assert_eq!(store.len().unwrap(), 1);
        assert_eq!(store.get(&d).unwrap().as_deref(), Some(&b"hello"[..]));
        let hex = d.to_hex();
        assert!(store.path_for(&d).ends_with(format!("objects/{}/{}", &hex[..2], &hex[2..])));
        assert!(store.entry(&d).unwrap().unwrap().stored_at > 0);
    }

    #[test]
    fn empty_content() {
        let dir = tempfile::tempdir().unwrap();
        let store = CasStore::open(dir.path()).unwrap();
        assert_eq!(
            store.put(b"").unwrap().to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn size_limit() {
        let dir = tempfile::tempdir().unwrap();
        let store = CasStore::open(dir.path()).unwrap().with_max_content(4);
        assert!(matches!(store.put(b"12345"), Err(CasError::TooLarge { size: 5, max: 4 })));
        assert!(store.put(b"1234").is_ok());
    }

    #[test]
    fn missing_vs_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = CasStore::open(dir.path()).unwrap();
        assert!(store.get(&fingerprint(b"never")).unwrap().is_none());

        let d = store.put(b"payload").unwrap();
        let path = store.path_for(&d);
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] ^= 0x01;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(store.get(&d), Err(CasError::Integrity(x)) if x == d));

        // Re-putting the original heals the entry.
        store.put(b"payload").unwrap();
        assert_eq!(store.get(&d).unwrap().unwrap(), b"payload");
    }
}
