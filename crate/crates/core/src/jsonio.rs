//! Canonical JSON serialization: object keys sorted, so identical values
//! always produce identical bytes.

use crate::error::{Error, Result};
use serde::{de::DeserializeOwned, Serialize};
use std::path::Path;

/// Serialize with sorted object keys (serde_json's default map is ordered).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Data(format!("serialize: {e}")))?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::Data(format!("serialize: {e}")))
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = to_canonical_json(value)?;
    body.push('\n');
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&body)
        .map_err(|e| Error::Schema(format!("{}: invalid JSON: {e}", path.display())))
}
