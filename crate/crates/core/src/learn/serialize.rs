//! Model persistence: four magic bytes, one format-version byte, then a
//! canonical (sorted-keys) JSON body. Future versions are refused.

use super::Model;
use crate::error::{Error, Result};
use serde::{de::DeserializeOwned, Serialize};
use std::io::{Read, Write};

const MODEL_MAGIC: [u8; 4] = *b"DSML";
const MODEL_VERSION: u8 = 1;

/// Write any serializable value in the magic + version + JSON envelope.
pub fn write_magic_json<T: Serialize>(
    magic: [u8; 4],
    version: u8,
    value: &T,
    sink: &mut dyn Write,
) -> Result<()> {
    let v = serde_json::to_value(value).map_err(|e| Error::Data(format!("serialize: {e}")))?;
    let body = serde_json::to_vec(&v).map_err(|e| Error::Data(format!("serialize: {e}")))?;
    sink.write_all(&magic)
        .and_then(|()| sink.write_all(&[version]))
        .and_then(|()| sink.write_all(&body))
        .map_err(|e| Error::Data(format!("write: {e}")))
}

/// Read a value back from the envelope, refusing wrong magic and versions
/// newer than `supported`.
pub fn read_magic_json<T: DeserializeOwned>(
    magic: [u8; 4],
    supported: u8,
    source: &mut dyn Read,
) -> Result<T> {
    let mut header = [0u8; 5];
    source
        .read_exact(&mut header)
        .map_err(|e| Error::ModelFormat(format!("file too short for header: {e}")))?;
    if header[..4] != magic {
        return Err(Error::ModelFormat(format!(
            "bad magic bytes {:?}, expected {:?}",
            &header[..4],
            magic
        )));
    }
    let found = header[4];
    if found == 0 || found > supported {
        return Err(Error::ModelVersion { found, supported });
    }
    let mut body = Vec::new();
    source
        .read_to_end(&mut body)
        .map_err(|e| Error::ModelFormat(format!("truncated body: {e}")))?;
    serde_json::from_slice(&body).map_err(|e| Error::ModelFormat(format!("corrupt body: {e}")))
}

pub fn save_model(model: &Model, sink: &mut dyn Write) -> Result<()> {
    write_magic_json(MODEL_MAGIC, MODEL_VERSION, model, sink)
}

pub fn load_model(source: &mut dyn Read) -> Result<Model> {
    read_magic_json(MODEL_MAGIC, MODEL_VERSION, source)
}
