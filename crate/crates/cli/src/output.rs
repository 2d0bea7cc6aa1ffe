//! CSV and console formatting.
//!
//! CSV numbers carry 17 significant digits in scientific notation with a `.`
//! separator, independent of locale. Files open with `#` manifest lines that
//! record how they were produced.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use squeezetap::experiment::ScanResult;

/// 17 significant digits; parses back to the identical `f64`.
pub fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn exact_or_undefined(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_owned(), exact)
}

/// Rounded for people: at most ten decimals, trailing zeros trimmed.
pub fn human(x: f64) -> String {
    let mut s = format!("{x:.10}");
    if s.contains('.') {
        while s.ends_with('0') && !s.ends_with(".0") {
            s.pop();
        }
    }
    if s == "-0.0" {
        s = "0.0".into();
    }
    s
}

pub fn human_or_undefined(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_owned(), human)
}

/// Provenance written at the top of every output file.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: &'static str,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Resolved configuration as `key = value` lines.
    pub config: Vec<String>,
    /// Command-specific arguments as `key = value` lines.
    pub args: Vec<String>,
}

impl RunManifest {
    pub fn lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# squeezetap {}", env!("CARGO_PKG_VERSION")),
            format!("# command: {}", self.command),
            format!(
                "# output: {}",
                self.output
                    .as_deref()
                    .map_or_else(|| "-".to_owned(), |p| p.display().to_string())
            ),
        ];
        if let Some(seed) = self.seed {
            lines.push(format!("# seed: {seed}"));
        }
        lines.extend(self.config.iter().map(|l| format!("# {l}")));
        lines.extend(self.args.iter().map(|l| format!("# arg {l}")));
        lines
    }
}

/// Writes manifest, header and rows with LF line endings to `path`, or to
/// stdout when no path is given.
pub fn write_csv(
    path: Option<&Path>,
    manifest: &RunManifest,
    header: &[&str],
    rows: &[Vec<String>],
) -> io::Result<()> {
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for line in manifest.lines() {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.write_all(header.join(",").as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        out.write_all(row.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub const SCAN_HEADER: [&str; 7] = ["phi", "n1", "n2", "variance", "shot_noise", "ratio", "db"];
pub const SPECTRUM_HEADER: [&str; 7] =
    ["freq", "n1", "n2", "variance", "shot_noise", "ratio", "db"];

pub fn scan_rows(scan: &ScanResult) -> Vec<Vec<String>> {
    scan.records
        .iter()
        .map(|rec| {
            vec![
                exact(rec.value),
                exact(rec.n1),
                exact(rec.n2),
                exact(rec.variance),
                exact(rec.shot_noise),
                exact_or_undefined(rec.ratio),
                exact_or_undefined(rec.db()),
            ]
        })
        .collect()
}
