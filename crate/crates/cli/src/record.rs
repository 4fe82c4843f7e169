//! JSON-lines run records.

use std::io::{self, BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::scenario::TaskKind;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    /// The task's hypotheses do not hold; the payload says why.
    Degenerate,
    BudgetExhausted,
}

/// One line of `givp run` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub scenario: String,
    pub task: TaskKind,
    pub seed: u64,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub certificate: serde_json::Value,
}

pub fn write_records<W: Write>(mut w: W, records: &[RunRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Reads a record stream, skipping blank lines.
pub fn read_records<R: BufRead>(r: R) -> io::Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RunRecord = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("record on line {}: {e}", i + 1)))?;
        if rec.schema != SCHEMA {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("record on line {}: schema {} is not {SCHEMA}", i + 1, rec.schema),
            ));
        }
        out.push(rec);
    }
    Ok(out)
}
