//! Residual reports: a CSV table `name,value,threshold,pass` and a JSON sidecar with
//! provenance and timing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{write_atomic, write_json};

pub const CSV_HEADER: &str = "name,value,threshold,pass";

/// One named residual; `pass` is derived from `value <= threshold` and a NaN never passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pass: bool,
}

impl ResidualEntry {
    pub fn new(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        ResidualEntry { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn pass(&self) -> bool {
        self.pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: Vec<String>,
    pub config_hash: String,
    pub seed: u64,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
    pub provenance: Provenance,
}

impl ResidualReport {
    pub fn new(command: Vec<String>, config: &RunConfig) -> Self {
        ResidualReport {
            entries: Vec::new(),
            provenance: Provenance { command, config_hash: config.hash(), seed: config.seed, elapsed_ms: 0.0 },
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.entries.push(ResidualEntry::new(name, value, threshold));
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(ResidualEntry::pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualEntry> {
        self.entries.iter().filter(|e| !e.pass())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(','))?;
        for e in &self.entries {
            w.serialize(e)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Entries of a CSV table; rows whose `pass` column disagrees with the values are rejected.
    pub fn parse_csv(text: &str) -> Result<Vec<ResidualEntry>> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header.join(",") != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected report header {:?}", header.join(","))));
        }
        let mut out = Vec::new();
        for row in r.deserialize() {
            let e: ResidualEntry = row?;
            if e.pass != (e.value <= e.threshold) {
                return Err(Error::Parse(format!("row {:?} has an inconsistent pass flag", e.name)));
            }
            out.push(e);
        }
        Ok(out)
    }

    /// Sidecar path of a report: `r.csv` -> `r.csv.json`.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes the CSV table and its JSON sidecar, each atomically.
    pub fn emit(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv()?.as_bytes())?;
        write_json(&Self::sidecar_path(path), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report() -> ResidualReport {
        ResidualReport::new(vec!["suite".into()], &RunConfig::default())
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(report().to_csv().unwrap(), "name,value,threshold,pass\n");
    }

    #[test]
    fn single_entry_row() {
        let mut r = report();
        r.push("residual", 0.0, 1e-9);
        let csv = r.to_csv().unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(",true"), "{csv}");
        r.push("bad", f64::NAN, 1.0);
        assert!(!r.all_pass());
    }

    #[test]
    fn inconsistent_pass_is_rejected() {
        assert!(ResidualReport::parse_csv("name,value,threshold,pass\nx,2.0,1.0,true\n").is_err());
        assert!(ResidualReport::parse_csv("a,b\n").is_err());
    }

    #[test]
    fn emit_writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut r = report();
        r.push("x", 1e-3, 1e-2);
        r.emit(&path).unwrap();
        let back = ResidualReport::parse_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, r.entries);
        let side: ResidualReport = crate::io::read_json(&ResidualReport::sidecar_path(&path)).unwrap();
        assert_eq!(side, r);
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(("[a-z_,\" ]{1,12}", -1e300f64..1e300, 0f64..1e10), 0..20)) {
            let mut r = report();
            for (name, value, threshold) in rows {
                r.push(name, value, threshold);
            }
            prop_assert_eq!(ResidualReport::parse_csv(&r.to_csv().unwrap()).unwrap(), r.entries);
        }
    }
}
