//! `@ontoInstance` annotations in Solidity-like source.
//!
//! A Doxygen-style block comment `/** @ontoInstance <digest> */` binds the
//! next declaration to an ontology-instance document addressed by digest.
//! The scanner is lexical: it finds comments, string literals and code
//! tokens, and recognizes declarations by their leading keyword.

mod scanner;
mod verify;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_bytes;
use crate::digest::{fingerprint, Digest, DigestParseError};

pub use scanner::parse_annotations;
pub use verify::{verify_annotations, ConflictingBinding, ConsistencyReport, MatchedBinding, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    StateVariable,
    Function,
    Modifier,
    Contract,
    Unknown,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::StateVariable => "state_variable",
            EntityKind::Function => "function",
            EntityKind::Modifier => "modifier",
            EntityKind::Contract => "contract",
            EntityKind::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationBinding {
    /// Empty when `entity_kind` is `Unknown`.
    pub entity_name: String,
    pub entity_kind: EntityKind,
    pub instance_digest: Digest,
    /// 1-based line of the `@ontoInstance` tag.
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Warning,
    Error,
}

/// A line-numbered diagnostic, rendered as `LEVEL:LINE:MESSAGE`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub level: Level,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn warning(line: usize, message: impl Into<String>) -> Self {
        Self {
            level: Level::Warning,
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            Level::Warning => "WARNING",
            Level::Error => "ERROR",
        };
        write!(f, "{level}:{}:{}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSource {
    pub source_text: String,
    /// Sorted by line.
    pub bindings: Vec<AnnotationBinding>,
    /// Fingerprint of the UTF-8 bytes of `source_text`.
    pub source_digest: Digest,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("line {line}: malformed @ontoInstance digest: {source}")]
    MalformedDigest {
        line: usize,
        #[source]
        source: DigestParseError,
    },
    #[error("line {line}: @ontoInstance annotation is not followed by a declaration")]
    Dangling { line: usize },
}

impl AnnotationError {
    pub fn line(&self) -> usize {
        match self {
            AnnotationError::MalformedDigest { line, .. } | AnnotationError::Dangling { line } => *line,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let message = match self {
            AnnotationError::MalformedDigest { source, .. } => {
                format!("malformed @ontoInstance digest: {source}")
            }
            AnnotationError::Dangling { .. } => {
                "@ontoInstance annotation is not followed by a declaration".to_string()
            }
        };
        Diagnostic {
            level: Level::Error,
            line: self.line(),
            message,
        }
    }
}

/// The document an `@ontoInstance` digest dereferences to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub instance_id: String,
    /// Name of the role or power this code entity instantiates.
    pub role_or_power: String,
    pub ontology_id: String,
    pub notes: String,
}

impl InstanceDocument {
    pub fn canonicalize(&self) -> Vec<u8> {
        to_canonical_bytes(self).expect("instance document is string-only")
    }

    pub fn fingerprint(&self) -> Digest {
        fingerprint(&self.canonicalize())
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}
