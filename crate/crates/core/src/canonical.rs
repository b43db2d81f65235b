//! Canonical JSON profile used for every fingerprinted document.
//!
//! Rules: object keys sorted lexicographically, no whitespace outside
//! strings, UTF-8, no floating-point numbers. Array ordering is the
//! caller's responsibility (documents sort their entries before encoding).

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CanonicalError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("floating-point value not permitted in canonical JSON")]
    Float,
}

/// Encodes `value` in the canonical profile.
pub fn to_canonical_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CanonicalError> {
    // serde_json's Map is a BTreeMap without the preserve_order feature, so
    // going through Value yields sorted keys at every depth.
    let value = serde_json::to_value(value)?;
    reject_floats(&value)?;
    Ok(serde_json::to_vec(&value)?)
}

pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> Result<String, CanonicalError> {
    to_canonical_bytes(value).map(|b| String::from_utf8(b).expect("serde_json emits UTF-8"))
}

/// Decodes a document and reports whether `bytes` were already canonical.
pub fn from_json_bytes<T: DeserializeOwned + Serialize>(
    bytes: &[u8],
) -> Result<(T, bool), CanonicalError> {
    let value: T = serde_json::from_slice(bytes)?;
    let canonical = to_canonical_bytes(&value)? == bytes;
    Ok((value, canonical))
}

fn reject_floats(value: &Value) -> Result<(), CanonicalError> {
    match value {
        Value::Number(n) if n.is_f64() => Err(CanonicalError::Float),
        Value::Array(items) => items.iter().try_for_each(reject_floats),
        Value::Object(map) => map.values().try_for_each(reject_floats),
        _ => Ok(()),
    }
}
