//! Versioned, checksummed nomogram documents.
//!
//! A document is the nomogram's JSON object plus `version` and `checksum`
//! members. The checksum is the SHA-256 of the exact file bytes with the
//! checksum digits replaced by zeros, so any byte change is detected before
//! the payload is parsed.

use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::model::Nomogram;

pub const FORMAT_MAJOR: u32 = 1;
pub const FORMAT_MINOR: u32 = 1;

// top-level member of the pretty rendering; nested keys are indented deeper
const CHECKSUM_KEY: &str = "\n  \"checksum\": \"";
const DIGEST_HEX: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("checksum mismatch: document says {expected}, content hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("document has no checksum")]
    MissingChecksum,
    #[error("unsupported document version {found} (this build reads {FORMAT_MAJOR}.0 to {FORMAT_MAJOR}.{FORMAT_MINOR})")]
    VersionMismatch { found: String },
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedNomogram {
    pub nomogram: Nomogram,
    pub version: String,
    pub checksum: String,
    /// Notes about fields defaulted for an older minor version.
    pub compatibility: Vec<String>,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn locate_checksum(bytes: &[u8]) -> Option<usize> {
    let key = CHECKSUM_KEY.as_bytes();
    let at = bytes.windows(key.len()).position(|w| w == key)? + key.len();
    let digits = bytes.get(at..at + DIGEST_HEX)?;
    (digits.iter().all(u8::is_ascii_hexdigit) && bytes.get(at + DIGEST_HEX) == Some(&b'"')).then_some(at)
}

/// Adds a checksum to a document object and renders it.
///
/// # Panics
/// If `doc` is not a JSON object.
pub fn seal_document(mut doc: Value) -> Vec<u8> {
    let obj = doc.as_object_mut().expect("document is an object");
    obj.insert("checksum".into(), Value::String("0".repeat(DIGEST_HEX)));
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("JSON values serialize");
    bytes.push(b'\n');
    let at = locate_checksum(&bytes).expect("checksum member was just written");
    let sum = digest(&bytes);
    bytes[at..at + DIGEST_HEX].copy_from_slice(sum.as_bytes());
    bytes
}

/// Verifies the checksum and returns its digits.
pub fn verify_checksum(bytes: &[u8]) -> Result<String, DocumentError> {
    let at = locate_checksum(bytes).ok_or(DocumentError::MissingChecksum)?;
    let expected = String::from_utf8_lossy(&bytes[at..at + DIGEST_HEX]).into_owned();
    let mut zeroed = bytes.to_vec();
    zeroed[at..at + DIGEST_HEX].fill(b'0');
    let actual = digest(&zeroed);
    if actual != expected {
        return Err(DocumentError::ChecksumMismatch { expected, actual });
    }
    Ok(expected)
}

pub fn export_nomogram(n: &Nomogram) -> Vec<u8> {
    let mut v = serde_json::to_value(n).expect("nomograms serialize");
    v.as_object_mut()
        .expect("nomogram is an object")
        .insert("version".into(), Value::String(format!("{FORMAT_MAJOR}.{FORMAT_MINOR}")));
    seal_document(v)
}

fn parse_version(s: &str) -> Option<(u32, u32)> {
    let (a, b) = s.split_once('.')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

pub fn import_nomogram(bytes: &[u8]) -> Result<ImportedNomogram, DocumentError> {
    let checksum = verify_checksum(bytes)?;
    let mut v: Value = serde_json::from_slice(bytes).map_err(|e| DocumentError::Parse(e.to_string()))?;
    let obj = v.as_object_mut().ok_or_else(|| DocumentError::Parse("document is not an object".into()))?;
    obj.remove("checksum");
    let version = match obj.remove("version") {
        Some(Value::String(s)) => s,
        _ => return Err(DocumentError::Parse("missing version".into())),
    };
    let (major, minor) = parse_version(&version).ok_or_else(|| DocumentError::VersionMismatch { found: version.clone() })?;
    if major != FORMAT_MAJOR || minor > FORMAT_MINOR {
        return Err(DocumentError::VersionMismatch { found: version });
    }
    let mut compatibility = Vec::new();
    if minor < FORMAT_MINOR {
        for (field, what) in [("bands", "no recommendation bands"), ("points_resolution", "unquantized points")] {
            if !obj.contains_key(field) {
                compatibility.push(format!("version {version} has no {field}; using {what}"));
            }
        }
    }
    let nomogram = serde_json::from_value(v).map_err(|e| DocumentError::Parse(e.to_string()))?;
    Ok(ImportedNomogram { nomogram, version, checksum, compatibility })
}

pub fn write_nomogram(n: &Nomogram, path: &Path) -> Result<Vec<u8>, DocumentError> {
    let bytes = export_nomogram(n);
    std::fs::write(path, &bytes).map_err(|e| DocumentError::Io { path: path.display().to_string(), message: e.to_string() })?;
    Ok(bytes)
}

pub fn read_nomogram(path: &Path) -> Result<ImportedNomogram, DocumentError> {
    let bytes = std::fs::read(path).map_err(|e| DocumentError::Io { path: path.display().to_string(), message: e.to_string() })?;
    import_nomogram(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{paper_fixture_nomogram, Task};

    #[test]
    fn round_trip_is_exact() {
        let n = paper_fixture_nomogram(Task::Biopsy, Some(-1.234567890123));
        let bytes = export_nomogram(&n);
        let back = import_nomogram(&bytes).unwrap();
        assert_eq!(back.nomogram, n);
        assert!(back.compatibility.is_empty());
        assert_eq!(export_nomogram(&back.nomogram), bytes);
    }

    #[test]
    fn any_flipped_bit_is_caught() {
        let bytes = export_nomogram(&paper_fixture_nomogram(Task::Malignancy, None));
        for pos in (0..bytes.len()).step_by(37) {
            for bit in [0, 3, 6] {
                let mut t = bytes.clone();
                t[pos] ^= 1 << bit;
                let e = import_nomogram(&t).unwrap_err();
                assert!(matches!(e, DocumentError::ChecksumMismatch { .. } | DocumentError::MissingChecksum), "{pos} {e}");
            }
        }
    }

    #[test]
    fn version_rules() {
        let n = paper_fixture_nomogram(Task::Malignancy, None);
        let with = |ver: &str, strip: bool| {
            let mut v = serde_json::to_value(&n).unwrap();
            let o = v.as_object_mut().unwrap();
            o.insert("version".into(), Value::String(ver.into()));
            if strip {
                o.remove("bands");
                o.remove("points_resolution");
            }
            seal_document(v)
        };
        let old = import_nomogram(&with("1.0", true)).unwrap();
        assert_eq!(old.compatibility.len(), 2);
        assert_eq!(old.nomogram, n);
        assert!(matches!(import_nomogram(&with("0.9", false)), Err(DocumentError::VersionMismatch { .. })));
        assert!(matches!(import_nomogram(&with("1.2", false)), Err(DocumentError::VersionMismatch { .. })));
        assert!(matches!(import_nomogram(&with("2.0", false)), Err(DocumentError::VersionMismatch { .. })));
    }
}
