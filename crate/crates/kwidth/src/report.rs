//! Report assembly and output.
//!
//! Every report carries the tool name, version and the resolved config. CSV
//! reports put both in leading `#` comment lines; JSON reports hold them in
//! the `tool`, `version` and `config` fields.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use serde_json::{json, Value};

use crate::io::write_atomic;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Clean = 0,
    Failed = 1,
    Indeterminate = 2,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Failure dominates indeterminacy.
    pub fn worst(self, other: Status) -> Status {
        match (self, other) {
            (Status::Failed, _) | (_, Status::Failed) => Status::Failed,
            (Status::Indeterminate, _) | (_, Status::Indeterminate) => Status::Indeterminate,
            _ => Status::Clean,
        }
    }
}

/// A table with a JSON summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key: value` lines in CSV output.
    pub notes: Vec<(String, String)>,
    pub results: Value,
    pub status: Status,
    /// Writes a JSON twin next to CSV output.
    pub twin: bool,
}

/// Shortest round-trip decimal; non-finite values are spelled out.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "config": self.config,
            "results": self.results,
        });
        Ok(format!("{}\n", serde_json::to_string_pretty(&doc)?))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# {TOOL} {VERSION}\n"));
        out.push_str(&format!("# config: {}\n", serde_json::to_string(&self.config)?));
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    /// Renders everything first, then writes; nothing is written on error.
    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let main = match format {
            Format::Csv => self.to_csv()?,
            Format::Json => self.to_json()?,
        };
        let twin = if self.twin && format == Format::Csv { Some(self.to_json()?) } else { None };
        match out {
            Some(path) => {
                if let Some(text) = twin {
                    let twin_path = twin_path(path);
                    if twin_path == path {
                        bail!("cannot place the JSON twin of {} next to it", path.display());
                    }
                    write_atomic(&twin_path, text.as_bytes())?;
                }
                write_atomic(path, main.as_bytes())
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(main.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

/// `widths.csv` → `widths.json`; a path already ending in `.json` gets
/// `.json.json`.
pub fn twin_path(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "json") {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    } else {
        path.with_extension("json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, 1.0 / 3.0, 6.0 / 13f64.sqrt(), 1e-300, -2.5e10] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let r = Report {
            config: json!({"seed": 0}),
            header: vec!["a", "b"],
            rows: vec![vec!["1".into(), "x,y".into()]],
            notes: vec![("verdict".into(), "ok".into())],
            results: json!({}),
            status: Status::Clean,
            twin: false,
        };
        let text = r.to_csv().unwrap();
        assert!(text.starts_with(&format!("# {TOOL} {VERSION}\n# config: {{\"seed\":0}}\n# verdict: ok\na,b\n")));
        assert!(text.ends_with("1,\"x,y\"\n"));
    }

    #[test]
    fn twin_names() {
        assert_eq!(twin_path(Path::new("out/w.csv")), PathBuf::from("out/w.json"));
        assert_eq!(twin_path(Path::new("w")), PathBuf::from("w.json"));
        assert_eq!(twin_path(Path::new("w.json")), PathBuf::from("w.json.json"));
    }

    #[test]
    fn status_order() {
        assert_eq!(Status::Clean.worst(Status::Indeterminate), Status::Indeterminate);
        assert_eq!(Status::Indeterminate.worst(Status::Failed), Status::Failed);
    }
}
