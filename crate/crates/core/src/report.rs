//! Machine-readable run reports and CSV value tables.
//!
//! A report body depends only on the inputs, flags and seed; wall-clock
//! timing is kept out of the body so reruns compare byte for byte.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 over every input, each prefixed by its role.
    pub inputs_digest: String,
    pub method: String,
    pub numeric_mode: String,
    /// Effective flags, defaults included.
    pub settings: Map<String, Value>,
    pub notes: Vec<String>,
    pub results: Map<String, Value>,
    pub residuals: Map<String, Value>,
    #[serde(skip)]
    pub timing: Option<Duration>,
}

impl RunReport {
    pub fn new(command: &str, method: &str, numeric_mode: &str) -> Self {
        RunReport {
            command: command.into(),
            inputs_digest: InputDigest::new().finish(),
            method: method.into(),
            numeric_mode: numeric_mode.into(),
            settings: Map::new(),
            notes: Vec::new(),
            results: Map::new(),
            residuals: Map::new(),
            timing: None,
        }
    }

    pub fn setting(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.settings.insert(key.into(), to_value(value));
        self
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.results.insert(key.into(), to_value(value));
        self
    }

    pub fn residual(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.residuals.insert(key.into(), to_value(value));
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Pretty JSON body, newline-terminated.
    pub fn body(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.body())?;
        Ok(())
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("report fields serialize")
}

/// Incremental digest of named inputs.
#[derive(Clone, Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, role: &str, bytes: &[u8]) -> &mut Self {
        self.0.update((role.len() as u64).to_le_bytes());
        self.0.update(role.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub fn finish(&self) -> String {
        self.0.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Writes a table with a `state` column followed by one column per series.
pub fn write_values_csv(path: impl AsRef<Path>, states: &[String], columns: &[(&str, Vec<String>)]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header = vec!["state"];
    header.extend(columns.iter().map(|(name, _)| *name));
    writer.write_record(&header).map_err(csv_error)?;
    for (i, state) in states.iter().enumerate() {
        let mut record = vec![state.as_str()];
        record.extend(columns.iter().map(|(_, values)| values[i].as_str()));
        writer.write_record(&record).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::InvalidInput(format!("csv: {other:?}")),
    }
}

/// `{state name: value}` in state order.
pub fn named_table<V: Serialize>(names: &[String], values: &[V]) -> Map<String, Value> {
    names.iter().zip(values).map(|(n, v)| (n.clone(), to_value(v))).collect()
}
