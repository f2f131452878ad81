//! Result persistence: JSONL result records, RFC-4180 CSV emission, and run
//! manifests.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// One estimated quantity; one JSON object per line in result files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub suite: String,
    pub op: String,
    pub inputs: serde_json::Value,
    pub estimate: f64,
    pub stderr: f64,
    pub ci: (f64, f64),
    pub n: u64,
    pub seed: u64,
    /// Hex FNV-1a digest of the canonicalized run configuration.
    pub manifest_digest: String,
}

/// Reproducibility sidecar written next to every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub code_version: String,
    pub wall_time: f64,
    pub outputs: Vec<String>,
}

pub fn write_jsonl(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// RFC-4180 CSV with a fixed header row and CRLF line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let head: Vec<String> = header.iter().map(|h| csv_quote(h)).collect();
    f.write_all(head.join(",").as_bytes())?;
    f.write_all(b"\r\n")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| csv_quote(c)).collect();
        f.write_all(cells.join(",").as_bytes())?;
        f.write_all(b"\r\n")?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[1.0 / 3.0, 0.1, 6.18391688566808614e-1, 1.5871280197383745e-52] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_quote("plain"), "plain");
        assert_eq!(csv_quote("a,b"), "\"a,b\"");
        assert_eq!(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = std::env::temp_dir().join("kinetic-exit-test-records");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.jsonl");
        let rec = ResultRecord {
            suite: "s".into(),
            op: "o".into(),
            inputs: serde_json::json!({"q": 0.5}),
            estimate: 0.25,
            stderr: 0.001,
            ci: (0.24, 0.26),
            n: 1000,
            seed: 7,
            manifest_digest: "deadbeef".into(),
        };
        write_jsonl(&path, &[rec.clone()]).unwrap();
        let back = read_jsonl(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].estimate, rec.estimate);
        assert_eq!(back[0].manifest_digest, rec.manifest_digest);
    }
}
