use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use perc_core::graphs::Graph;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

/// CSV body with `#`-prefixed header comments.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    /// Column header followed by data lines, comma separated.
    pub lines: Vec<String>,
}

/// Everything a subcommand produces.
#[derive(Debug, Default)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub graph: Option<GraphInfo>,
    pub result: Value,
    /// Pre-serialised JSONL rows.
    pub rows: Vec<String>,
    pub table: Option<Table>,
    /// Set when a statistical decision could not be made.
    pub inconclusive: Option<String>,
    /// Set when a validation check failed.
    pub failed: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphInfo {
    pub family: String,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl GraphInfo {
    pub fn of(g: &Graph) -> Self {
        GraphInfo {
            family: g.family().family.clone(),
            n_vertices: g.n_vertices(),
            n_edges: g.n_edges(),
            sha256: sha256_hex(g.to_json_string().as_bytes()),
        }
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serialises")
}

pub fn row_line<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("row serialises")
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `PREFIX.jsonl`, `PREFIX.csv` and `PREFIX.summary.json` as
/// applicable; returns the summary, which embeds provenance.
pub fn finish(report: &Report, out: Option<&Path>, threads: Option<usize>, elapsed: Duration) -> CliResult<Value> {
    let mut outputs = serde_json::Map::new();
    if let Some(prefix) = out {
        if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        if !report.rows.is_empty() {
            let path = with_suffix(prefix, ".jsonl");
            let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
            for line in &report.rows {
                f.write_all(line.as_bytes())?;
                f.write_all(b"\n")?;
            }
            f.flush()?;
            outputs.insert("jsonl".into(), json!(path.display().to_string()));
        }
        if let Some(table) = &report.table {
            let path = with_suffix(prefix, ".csv");
            let mut body = String::new();
            for c in &table.comments {
                body.push_str("# ");
                body.push_str(c);
                body.push('\n');
            }
            for l in &table.lines {
                body.push_str(l);
                body.push('\n');
            }
            fs::write(&path, body)?;
            outputs.insert("csv".into(), json!(path.display().to_string()));
        }
    }
    let mut summary = json!({
        "tool": "perclab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": report.command,
        "config": report.config,
        "seed": report.seed,
        "threads": threads,
        "wall_clock_seconds": elapsed.as_secs_f64(),
        "graph": report.graph,
        "rows": report.rows.len(),
        "status": if report.failed.is_some() { "failed" } else if report.inconclusive.is_some() { "inconclusive" } else { "ok" },
        "result": report.result,
    });
    if let Some(prefix) = out {
        let path = with_suffix(prefix, ".summary.json");
        outputs.insert("summary".into(), json!(path.display().to_string()));
        summary["outputs"] = Value::Object(outputs);
        fs::write(&path, serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n")?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn files_are_written_under_prefix() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("sub/run");
        let report = Report {
            command: "x".into(),
            rows: vec!["{\"a\":1}".into()],
            table: Some(Table { comments: vec!["note".into()], lines: vec!["a,b".into(), "1,2".into()] }),
            ..Default::default()
        };
        let s = finish(&report, Some(&prefix), None, Duration::from_millis(5)).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("sub/run.jsonl")).unwrap(), "{\"a\":1}\n");
        assert_eq!(fs::read_to_string(dir.path().join("sub/run.csv")).unwrap(), "# note\na,b\n1,2\n");
        assert_eq!(s["status"], "ok");
        assert!(dir.path().join("sub/run.summary.json").exists());
    }
}
