//! Report assembly and emission.
//!
//! A report gathers one or more run blocks (one per parity sector, φ
//! value, or sweep dimension), each holding ER-sorted eigenvalue records
//! and any discarded scan steps, plus a provenance block (configuration
//! hash, dimensions, W, timestamp). All floating-point values are
//! emitted with 17 significant digits so the files round-trip doubles
//! exactly; identical configurations therefore produce byte-identical
//! report bodies, with the timestamp as the only varying line. Files are
//! written atomically (temp file, then rename).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::resonance_engine::{ResonanceRecord, ScanFailure};

use super::config::ProblemConfig;
use super::CliError;

/// Output format of a report file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl ReportFormat {
    /// File extension used for default output paths.
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Text => "txt",
        }
    }

    /// Parses a `--format` argument.
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(CliError::Config(format!(
                "unknown format '{other}' (known: json, csv, text)"
            ))),
        }
    }
}

/// One eigenvalue row: the scan record plus any probe results.
#[derive(Debug, Clone)]
pub struct RecordRow {
    pub record: ResonanceRecord,
    /// Probe values aligned with the block's probe list; `None` marks a
    /// probe that failed for this row (details land in `probe_notes`).
    pub probe_values: Vec<Option<(f64, f64)>>,
}

/// One executed run (a single scan) inside a report.
#[derive(Debug, Clone)]
pub struct RunBlock {
    /// Human-readable run label (parity sector, φ value, dimension…).
    pub label: String,
    /// Fully resolved configuration of this run.
    pub config: ProblemConfig,
    /// Retained eigenvalues, ascending in ER.
    pub rows: Vec<RecordRow>,
    /// Grid steps that errored or failed to converge.
    pub failures: Vec<ScanFailure>,
    /// Probe failure notes as (row index, probe index, message).
    pub probe_notes: Vec<(usize, usize, String)>,
}

/// Provenance of a report.
#[derive(Debug, Clone)]
pub struct Provenance {
    /// SHA-256 over the canonical TOML of every block's configuration,
    /// concatenated in block order.
    pub config_hash: String,
    /// Distinct basis dimensions in block order.
    pub dimensions: Vec<usize>,
    /// Basis W of the first block.
    pub w: [f64; 2],
    /// UTC timestamp (ISO-8601); the only non-deterministic field.
    pub timestamp: String,
}

/// A complete report: provenance plus run blocks.
#[derive(Debug, Clone)]
pub struct Report {
    pub provenance: Provenance,
    pub blocks: Vec<RunBlock>,
}

impl Report {
    /// Assembles provenance from the given blocks at the current time.
    pub fn new(blocks: Vec<RunBlock>) -> Self {
        let mut hasher = Sha256::new();
        for b in &blocks {
            hasher.update(b.config.to_toml().as_bytes());
        }
        let config_hash = hex_string(&hasher.finalize());
        let mut dimensions = Vec::new();
        for b in &blocks {
            if !dimensions.contains(&b.config.dim) {
                dimensions.push(b.config.dim);
            }
        }
        let w = blocks.first().map(|b| b.config.w).unwrap_or([0.0, 0.0]);
        Report {
            provenance: Provenance {
                config_hash,
                dimensions,
                w,
                timestamp: utc_timestamp(),
            },
            blocks,
        }
    }

    /// Renders the report in the requested format.
    pub fn emit(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.emit_json(),
            ReportFormat::Csv => self.emit_csv(),
            ReportFormat::Text => self.emit_text(),
        }
    }

    fn emit_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let p = &self.provenance;
        s.push_str("  \"provenance\": {\n");
        let _ = writeln!(s, "    \"config_hash\": \"{}\",", p.config_hash);
        let dims: Vec<String> = p.dimensions.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "    \"dimensions\": [{}],", dims.join(", "));
        let _ = writeln!(s, "    \"w\": [{}, {}],", f17(p.w[0]), f17(p.w[1]));
        let _ = writeln!(s, "    \"timestamp\": \"{}\"", p.timestamp);
        s.push_str("  },\n");
        s.push_str("  \"runs\": [\n");
        for (bi, b) in self.blocks.iter().enumerate() {
            s.push_str("    {\n");
            let _ = writeln!(s, "      \"label\": {},", json_string(&b.label));
            let _ = writeln!(s, "      \"dim\": {},", b.config.dim);
            let _ = writeln!(
                s,
                "      \"w\": [{}, {}],",
                f17(b.config.w[0]),
                f17(b.config.w[1])
            );
            let _ = writeln!(s, "      \"parity\": \"{}\",", b.config.parity);
            s.push_str("      \"records\": [\n");
            for (ri, row) in b.rows.iter().enumerate() {
                let r = &row.record;
                s.push_str("        {");
                let _ = write!(
                    s,
                    "\"er\": {}, \"ei\": {}, \"iterations\": {}, \"residual\": {}, \"persistence\": {}, \"reference_row\": {}",
                    f17(r.energy.re),
                    f17(r.energy.im),
                    r.iterations,
                    f17(r.residual),
                    r.persistence,
                    r.reference_row
                );
                if !row.probe_values.is_empty() {
                    s.push_str(", \"probes\": [");
                    for (pi, v) in row.probe_values.iter().enumerate() {
                        if pi > 0 {
                            s.push_str(", ");
                        }
                        match v {
                            Some((re, im)) => {
                                let _ = write!(s, "[{}, {}]", f17(*re), f17(*im));
                            }
                            None => s.push_str("null"),
                        }
                    }
                    s.push(']');
                }
                s.push('}');
                s.push_str(if ri + 1 < b.rows.len() { ",\n" } else { "\n" });
            }
            s.push_str("      ],\n");
            s.push_str("      \"failures\": [\n");
            for (fi, f) in b.failures.iter().enumerate() {
                let _ = write!(
                    s,
                    "        {{\"e0\": {}, \"reason\": {}}}",
                    f17(f.e0),
                    json_string(&f.reason)
                );
                s.push_str(if fi + 1 < b.failures.len() { ",\n" } else { "\n" });
            }
            s.push_str("      ]");
            if !b.probe_notes.is_empty() {
                s.push_str(",\n      \"probe_notes\": [\n");
                for (ni, (row, probe, msg)) in b.probe_notes.iter().enumerate() {
                    let _ = write!(
                        s,
                        "        {{\"row\": {row}, \"probe\": {probe}, \"message\": {}}}",
                        json_string(msg)
                    );
                    s.push_str(if ni + 1 < b.probe_notes.len() { ",\n" } else { "\n" });
                }
                s.push_str("      ]");
            }
            s.push('\n');
            s.push_str(if bi + 1 < self.blocks.len() {
                "    },\n"
            } else {
                "    }\n"
            });
        }
        s.push_str("  ]\n}\n");
        s
    }

    fn emit_csv(&self) -> String {
        // Pure tabular form: mandated column order first, then the run
        // label and probe columns. Provenance lives in the JSON/text
        // forms so the CSV stays machine-trivial.
        let mut probe_headers: Vec<String> = Vec::new();
        for b in &self.blocks {
            for p in b.config.probe_list() {
                let h = format!("probe_x{}", p.power);
                if !probe_headers.contains(&h) {
                    probe_headers.push(h);
                }
            }
        }
        let mut s = String::from("er,ei,iterations,residual,persistence,reference_row,run");
        for h in &probe_headers {
            let _ = write!(s, ",{h}_re,{h}_im");
        }
        s.push('\n');
        for b in &self.blocks {
            let block_probes: Vec<String> = b
                .config
                .probe_list()
                .iter()
                .map(|p| format!("probe_x{}", p.power))
                .collect();
            for row in &b.rows {
                let r = &row.record;
                let _ = write!(
                    s,
                    "{},{},{},{},{},{},{}",
                    f17(r.energy.re),
                    f17(r.energy.im),
                    r.iterations,
                    f17(r.residual),
                    r.persistence,
                    r.reference_row,
                    b.label
                );
                for h in &probe_headers {
                    match block_probes
                        .iter()
                        .position(|bp| bp == h)
                        .and_then(|pi| row.probe_values.get(pi))
                        .and_then(|v| v.as_ref())
                    {
                        Some((re, im)) => {
                            let _ = write!(s, ",{},{}", f17(*re), f17(*im));
                        }
                        None => s.push_str(",,"),
                    }
                }
                s.push('\n');
            }
        }
        s
    }

    fn emit_text(&self) -> String {
        let mut s = String::new();
        let p = &self.provenance;
        let _ = writeln!(s, "# config_hash: {}", p.config_hash);
        let dims: Vec<String> = p.dimensions.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            s,
            "# dimensions: {}   W = ({}, {})",
            dims.join(","),
            p.w[0],
            p.w[1]
        );
        let _ = writeln!(s, "# timestamp: {}", p.timestamp);
        for b in &self.blocks {
            s.push('\n');
            let _ = writeln!(
                s,
                "== {}  (parity={}, dim={}, W=({}, {}))",
                b.label, b.config.parity, b.config.dim, b.config.w[0], b.config.w[1]
            );
            let probes = b.config.probe_list();
            let mut header = format!(
                "{:>24}  {:>24}  {:>6}  {:>10}  {:>7}  {:>4}",
                "ER", "EI", "iters", "residual", "persist", "row"
            );
            for probe in &probes {
                let _ = write!(header, "  {:>49}", format!("<x^{}>", probe.power));
            }
            let _ = writeln!(s, "{header}");
            for row in &b.rows {
                let r = &row.record;
                let mut line = format!(
                    "{:>24}  {:>24}  {:>6}  {:>10.3e}  {:>7}  {:>4}",
                    f17(r.energy.re),
                    f17(r.energy.im),
                    r.iterations,
                    r.residual,
                    r.persistence,
                    r.reference_row
                );
                for v in &row.probe_values {
                    match v {
                        Some((re, im)) => {
                            let _ = write!(line, "  {:>24} {:>24}", f17(*re), f17(*im));
                        }
                        None => {
                            let _ = write!(line, "  {:>24} {:>24}", "-", "-");
                        }
                    }
                }
                let _ = writeln!(s, "{line}");
            }
            if b.rows.is_empty() {
                let _ = writeln!(s, "(no eigenvalues retained)");
            }
            for f in &b.failures {
                let _ = writeln!(s, "! step e0={:.6}: {}", f.e0, f.reason);
            }
            for (row, probe, msg) in &b.probe_notes {
                let _ = writeln!(s, "! probe {probe} on row {row}: {msg}");
            }
        }
        s
    }
}

/// 17-significant-digit rendering: round-trips any f64 exactly.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

fn json_string(text: &str) -> String {
    let mut s = String::with_capacity(text.len() + 2);
    s.push('"');
    for ch in text.chars() {
        match ch {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\r' => s.push_str("\\r"),
            '\t' => s.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(s, "\\u{:04x}", c as u32);
            }
            c => s.push(c),
        }
    }
    s.push('"');
    s
}

/// Current time as an ISO-8601 UTC stamp (civil-from-days conversion; no
/// external clock library needed for whole-second resolution).
pub fn utc_timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format_epoch_seconds(secs)
}

/// Renders whole seconds since the Unix epoch as `YYYY-MM-DDThh:mm:ssZ`.
pub fn format_epoch_seconds(secs: u64) -> String {
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (h, m, sec) = (rem / 3600, (rem % 3600) / 60, rem % 60);

    // Civil-from-days (Gregorian), era-based.
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = if month <= 2 { y + 1 } else { y };

    format!("{year:04}-{month:02}-{d:02}T{h:02}:{m:02}:{sec:02}Z")
}

/// Writes contents atomically: temp file in the target directory, then
/// rename over the destination.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let stem = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("bad output path {}", path.display())))?;
    let tmp = match dir {
        Some(d) => d.join(format!(".{}.tmp-{}", stem.to_string_lossy(), std::process::id())),
        None => std::path::PathBuf::from(format!(
            ".{}.tmp-{}",
            stem.to_string_lossy(),
            std::process::id()
        )),
    };
    fs::write(&tmp, contents)
        .map_err(|e| CliError::Numerical(format!("writing {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::Numerical(format!("renaming into {}: {e}", path.display()))
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance_engine::ResonanceRecord;
    use crate::ComplexScalar;

    fn sample_config() -> ProblemConfig {
        ProblemConfig::from_toml(
            r#"
alpha = 1.0
w = [1.0, 0.0]
parity = "full"
dim = 10
[scan]
e_min = 0.5
e_max = 5.5
de = 0.5
[[potential]]
power = 2
coeff_re = 1.0
"#,
        )
        .unwrap()
    }

    fn sample_report(rows: usize) -> Report {
        let config = sample_config();
        let rows = (0..rows)
            .map(|i| RecordRow {
                record: ResonanceRecord {
                    energy: ComplexScalar::new(1.0 + 2.0 * i as f64, -1e-5 * i as f64),
                    iterations: 7 + i,
                    residual: 3.5e-15,
                    persistence: 3,
                    reference_row: 1,
                },
                probe_values: vec![],
            })
            .collect();
        Report::new(vec![RunBlock {
            label: "full".into(),
            config,
            rows,
            failures: vec![],
            probe_notes: vec![],
        }])
    }

    #[test]
    fn f17_round_trips_doubles() {
        for x in [
            0.1,
            -7.94775543926e-5,
            0.93255571582478,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            1.7976931348623157e308,
        ] {
            let s = f17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn empty_report_emits_header_only_csv() {
        let report = sample_report(0);
        let csv = report.emit(ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].starts_with("er,ei,iterations,residual,persistence"));
    }

    #[test]
    fn csv_rows_match_records() {
        let report = sample_report(2);
        let csv = report.emit(ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0].parse::<f64>().unwrap(), 1.0);
        assert_eq!(first[2], "7");
        assert_eq!(first[6], "full");
    }

    #[test]
    fn json_is_parseable_and_carries_provenance() {
        let report = sample_report(2);
        let text = report.emit(ReportFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["provenance"]["dimensions"][0], 10);
        assert_eq!(v["runs"][0]["records"][1]["iterations"], 8);
        let hash = v["provenance"]["config_hash"].as_str().unwrap();
        assert_eq!(hash.len(), 64);
        let er = v["runs"][0]["records"][0]["er"].as_f64().unwrap();
        assert_eq!(er, 1.0);
    }

    #[test]
    fn report_body_is_deterministic_excluding_timestamp() {
        let strip = |r: &Report, f: ReportFormat| -> String {
            r.emit(f)
                .lines()
                .filter(|l| !l.contains("timestamp"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = sample_report(3);
        let b = sample_report(3);
        for f in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Text] {
            assert_eq!(strip(&a, f), strip(&b, f));
        }
    }

    #[test]
    fn config_hash_tracks_config_changes() {
        let a = sample_report(1);
        let mut blocks = a.blocks.clone();
        blocks[0].config.dim = 11;
        let b = Report::new(blocks);
        assert_ne!(a.provenance.config_hash, b.provenance.config_hash);
    }

    #[test]
    fn timestamp_formatting_known_instants() {
        assert_eq!(format_epoch_seconds(0), "1970-01-01T00:00:00Z");
        assert_eq!(format_epoch_seconds(951_782_400), "2000-02-29T00:00:00Z");
        assert_eq!(format_epoch_seconds(1_704_067_199), "2023-12-31T23:59:59Z");
        assert_eq!(format_epoch_seconds(1_704_067_200), "2024-01-01T00:00:00Z");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_atomic(&path, "first").unwrap();
        write_atomic(&path, "second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        // No stray temp files left behind.
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn text_format_marks_failed_probes() {
        let mut report = sample_report(1);
        report.blocks[0].rows[0].probe_values = vec![None];
        report.blocks[0].config.probes = Some(vec![super::super::config::ProbeSection {
            power: 2,
            delta: 5e-5,
        }]);
        report.blocks[0]
            .probe_notes
            .push((0, 0, "branch jump".into()));
        let text = report.emit(ReportFormat::Text);
        assert!(text.contains("<x^2>"));
        assert!(text.contains("! probe 0 on row 0: branch jump"));
    }
}
