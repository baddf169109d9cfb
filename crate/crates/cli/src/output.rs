//! Artifact writers. JSON documents carry the schema version and the hash of
//! the configuration that produced them; keys are emitted in sorted order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "v1";

pub struct Output {
    dir: PathBuf,
    config_hash: String,
}

impl Output {
    pub fn new(dir: &Path, config_hash: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            config_hash,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Wraps `body` (which must serialize to an object) with `version`,
    /// `config_hash` and `kind`.
    pub fn json(&self, name: &str, kind: &str, body: &impl Serialize) -> Result<PathBuf, CliError> {
        let mut map = match serde_json::to_value(body)? {
            Value::Object(map) => map,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        map.insert("version".into(), SCHEMA_VERSION.into());
        map.insert("config_hash".into(), self.config_hash.clone().into());
        map.insert("kind".into(), kind.into());
        let mut text = serde_json::to_string_pretty(&Value::Object(map))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn csv<R: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// Numeric table with explicit headers, for layouts whose width depends on the run.
    pub fn table(&self, name: &str, headers: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(headers)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn bytes(&self, name: &str, data: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, data).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
