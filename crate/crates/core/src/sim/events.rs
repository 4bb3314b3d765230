//! Optional JSON Lines event log: one record per discrete event.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct EventRecord<'a> {
    pub t_s: f64,
    pub kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elevator: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passenger: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_component: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

/// Sink for event records. Per-infra-step penalties are not logged; they are
/// recoverable from the ledger and would dominate the file.
pub struct EventLog {
    writer: BufWriter<File>,
}

impl EventLog {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        Ok(Self {
            writer: BufWriter::new(File::create(path)?),
        })
    }

    pub fn record(&mut self, record: &EventRecord<'_>) {
        // Serialization of these plain records cannot fail; IO errors are
        // surfaced on flush.
        if let Ok(line) = serde_json::to_string(record) {
            let _ = writeln!(self.writer, "{line}");
        }
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.writer.flush()
    }
}

impl std::fmt::Debug for EventLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("EventLog")
    }
}
