//! Report records, CSV/JSON serialisation, and the config hash.

use serde::Serialize;
use std::io::Write;

/// Per-case verification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "warning(membership)")]
    WarningMembership,
    #[serde(rename = "failed(tolerance)")]
    FailedTolerance,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::WarningMembership => "warning(membership)",
            Status::FailedTolerance => "failed(tolerance)",
        }
    }
}

/// One grid record. Fields that could not be computed are `None` and the
/// reason is carried in `status`/`note`.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub mu: f64,
    pub eps: f64,
    pub s: Option<f64>,
    pub sharp_const: Option<f64>,
    pub extremal_quotient: Option<f64>,
    pub identity_gap_max: Option<f64>,
    pub minimiser_value: Option<f64>,
    pub min_minus_sharp: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool_version: String,
    pub config_hash: String,
    /// Unix seconds; lives only in the JSON report so CSV stays
    /// byte-reproducible.
    pub generated_at_unix: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub metadata: Metadata,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(config_hash: String, records: Vec<Record>) -> Self {
        let generated_at_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            metadata: Metadata {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash,
                generated_at_unix,
            },
            records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// CSV with the fixed column set, 17 significant digits, LF endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(CSV_HEADER.as_bytes())?;
        w.write_all(b"\n")?;
        for r in &self.records {
            let line = [
                fmt_f64(Some(r.mu)),
                fmt_f64(Some(r.eps)),
                fmt_f64(r.s),
                fmt_f64(r.sharp_const),
                fmt_f64(r.extremal_quotient),
                fmt_f64(r.identity_gap_max),
                fmt_f64(r.minimiser_value),
                fmt_f64(r.min_minus_sharp),
                r.status.as_str().to_string(),
            ]
            .join(",");
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub const CSV_HEADER: &str =
    "mu,eps,s,sharp_const,extremal_quotient,identity_gap_max,minimiser_value,min_minus_sharp,status";

/// 17 significant digits — round-trips f64 exactly.
pub fn fmt_f64(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.16e}"),
        None => String::new(),
    }
}

/// FNV-1a, stable across platforms and releases; good enough to fingerprint
/// a config line.
pub fn config_hash(canonical: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
