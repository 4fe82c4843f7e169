//! Tidy CSV of sequence histories, one row per recorded iterate.
//!
//! Ekeland rows carry `step = ‖x_{n+1} − x_n‖` against `bound = δ/(ε·2^{n+1})`;
//! Palais-Smale rows carry `grad_norm = ‖∇φ(x_n)‖_*` against `bound = 1/n`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use givp::consequences::PalaisSmaleRun;
use givp::ekeland::EkelandCertificate;
use serde::Serialize;

use crate::record::RunRecord;
use crate::scenario::TaskKind;

pub const FILE_NAME: &str = "sequences.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub scenario: String,
    pub n: usize,
    pub value: f64,
    pub grad_norm: Option<f64>,
    pub step: Option<f64>,
    pub bound: Option<f64>,
}

/// Rows for every record with a sequence history; other records are skipped.
pub fn rows(records: &[RunRecord]) -> Vec<Row> {
    let mut out = Vec::new();
    for r in records {
        match r.task {
            TaskKind::Ekeland => {
                let Ok(c) = serde_json::from_value::<EkelandCertificate>(r.certificate.clone()) else {
                    continue;
                };
                out.extend(c.history.iter().map(|s| Row {
                    scenario: r.scenario.clone(),
                    n: s.k,
                    value: s.phi,
                    grad_norm: None,
                    step: s.step,
                    bound: s.bound,
                }));
            }
            TaskKind::PalaisSmale => {
                let Ok(run) = serde_json::from_value::<PalaisSmaleRun>(r.certificate.clone()) else {
                    continue;
                };
                for i in 0..run.values.len() {
                    out.push(Row {
                        scenario: r.scenario.clone(),
                        n: i + 1,
                        value: run.values[i],
                        grad_norm: Some(run.grad_norms[i]),
                        step: (i > 0).then(|| (&run.points[i] - &run.points[i - 1]).norm()),
                        bound: Some(1.0 / (i + 1) as f64),
                    });
                }
            }
            _ => {}
        }
    }
    out
}

/// Writes `dir/sequences.csv`, creating `dir` if needed. An empty record
/// stream still produces the header.
pub fn emit(records: &[RunRecord], dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(FILE_NAME);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path)?;
    w.write_record(["scenario", "n", "value", "grad_norm", "step", "bound"])?;
    for row in rows(records) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = emit(&[], dir.path()).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "scenario,n,value,grad_norm,step,bound\n");
    }
}
