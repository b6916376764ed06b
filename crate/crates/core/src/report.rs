//! Run reports and JSON certificate persistence.
//!
//! Every artifact is canonical JSON: schema version field `v: 1`, fixed
//! struct field order, compact formatting. Canonical form makes the
//! load / re-verify / re-serialize round trip byte-exact.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::cremona::{verify_alpha_bound, verify_certificate, AlphaBound, EmptinessCertificate};
use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Verified,
    Falsified,
    Inconclusive,
}

/// The top-level artifact every CLI command emits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub v: u32,
    pub command: String,
    pub parameters: serde_json::Value,
    pub outcome: Outcome,
    /// the mathematical statement this run certifies or tests
    pub statement: String,
    /// embedded certificates or paths of certificate files written
    pub certificates: Vec<serde_json::Value>,
    pub timing_ms: u128,
}

impl RunReport {
    pub fn new(command: &str, parameters: serde_json::Value, statement: &str) -> Self {
        RunReport {
            v: 1,
            command: command.to_string(),
            parameters,
            outcome: Outcome::Inconclusive,
            statement: statement.to_string(),
            certificates: Vec::new(),
            timing_ms: 0,
        }
    }
}

/// Canonical serialization: compact JSON plus a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    std::fs::write(path, to_canonical_json(value)?)?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// The certificate flavors the CLI persists. Serialization is untagged, so
/// files contain the bare certificate object; the distinct field sets keep
/// deserialization unambiguous (an alpha bound wraps its chain in
/// `certificate`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CertificateFile {
    Alpha(AlphaBound),
    Emptiness(EmptinessCertificate),
}

impl CertificateFile {
    pub fn verify(&self) -> Result<(), Error> {
        match self {
            CertificateFile::Alpha(ab) => verify_alpha_bound(ab),
            CertificateFile::Emptiness(c) => verify_certificate(c),
        }
    }
}

/// Loads a certificate, re-verifies it, and checks that re-serializing
/// reproduces the file bytes exactly.
pub fn cert_roundtrip(path: &Path) -> Result<CertificateFile, Error> {
    let original = std::fs::read_to_string(path)?;
    let cert: CertificateFile = serde_json::from_str(&original)?;
    cert.verify()?;
    let again = to_canonical_json(&cert)?;
    if again.trim_end() != original.trim_end() {
        return Err(Error::BadCertificate(format!(
            "file {} is not in canonical form (re-serialization differs)",
            path.display()
        )));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cremona::{prove_alpha_bound, ScriptStep};

    #[test]
    fn alpha_bound_roundtrip_is_byte_identical() {
        // the (8m-1; 6m,6m,6m,3m,3m) chain
        let ab = prove_alpha_bound(&[2, 2, 2, 1, 1], 3, 8, &[ScriptStep::cremona_auto()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bound.json");
        save_json(&CertificateFile::Alpha(ab), &path).unwrap();
        let bytes_before = std::fs::read(&path).unwrap();
        let cert = cert_roundtrip(&path).unwrap();
        let bytes_after = to_canonical_json(&cert).unwrap().into_bytes();
        assert_eq!(bytes_before, bytes_after);
    }

    #[test]
    fn tampered_certificate_rejected() {
        let ab = prove_alpha_bound(&[1, 1, 1, 1, 1], 3, 5, &[ScriptStep::cremona_auto()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bound.json");
        save_json(&CertificateFile::Alpha(ab), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // mutate the recorded k of the Cremona step
        let tampered = text.replace("-2*m-2", "-2*m-3");
        assert_ne!(text, tampered);
        std::fs::write(&path, tampered).unwrap();
        assert!(cert_roundtrip(&path).is_err());
    }

    #[test]
    fn malformed_json_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"v\":1,\"steps\":[{\"kind\":\"unknown_rule\"}]}").unwrap();
        match cert_roundtrip(&path) {
            Err(Error::Json(_)) => {}
            other => panic!("expected a schema error, got {other:?}"),
        }
    }
}
