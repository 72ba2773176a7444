//! Report assembly and emission.
//!
//! JSON reports carry energies both as exact decimal picojoule strings and
//! as f64 joules for convenience. All output is byte-stable: identical runs
//! serialize to identical bytes on every platform, and files are written
//! atomically (temp file plus rename) so failed runs leave nothing partial.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{Counters, EnergyAmount};
use crate::sim::{MacTracePoint, SeriesPoint};

/// One energy figure: exact picojoules plus a float convenience value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub pj: String,
    pub joules: f64,
}

impl EnergyBreakdown {
    pub fn of(e: EnergyAmount) -> EnergyBreakdown {
        EnergyBreakdown {
            pj: e.pj_string(),
            joules: e.to_joules(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTotals {
    pub core_dynamic: EnergyBreakdown,
    pub core_leakage: EnergyBreakdown,
    pub link: EnergyBreakdown,
    pub mac: EnergyBreakdown,
    pub total: EnergyBreakdown,
    pub counters: Counters,
}

/// One active core's summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreRow {
    pub chip: (u32, u32),
    pub core: u32,
    pub neurons: u32,
    pub spikes: u64,
    pub misses: u64,
    pub dynamic: EnergyAmount,
    pub leakage: EnergyAmount,
}

/// The full run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub version: u32,
    pub config_digest: String,
    pub timesteps: u64,
    pub totals: ReportTotals,
    pub per_core: Vec<CoreRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raster: Option<Vec<(u64, u32)>>,
    #[serde(default)]
    pub raster_truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mac_outputs: Option<Vec<MacTracePoint>>,
}

/// Canonical JSON bytes for a report.
pub fn report_json(report: &SimReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_report(text: &str) -> Result<SimReport> {
    serde_json::from_str(text).map_err(|source| Error::Syntax {
        context: "report".into(),
        source,
    })
}

/// Per-timestep CSV: `t,spikes,dynamic_j,leakage_j,link_j,misses`.
/// Energy columns are exact decimal joules, so column sums reproduce the
/// report totals exactly.
pub fn series_csv(series: &[SeriesPoint]) -> String {
    let mut out = String::from("t,spikes,dynamic_j,leakage_j,link_j,misses\n");
    for p in series {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.t,
            p.spikes,
            p.dynamic.joules_string(),
            p.leakage.joules_string(),
            p.link.joules_string(),
            p.misses
        ));
    }
    out
}

/// Spike raster CSV: `t,key` with hex keys.
pub fn raster_csv(raster: &[(u64, u32)]) -> String {
    let mut out = String::from("t,key\n");
    for &(t, key) in raster {
        out.push_str(&format!("{t},{key:#010x}\n"));
    }
    out
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &str, contents: &str) -> Result<()> {
    let tmp = format!("{path}.tmp.{}", std::process::id());
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })?;
    Ok(())
}

/// Write the JSON report and any requested CSV sidecars.
pub fn emit_report(
    report: &SimReport,
    out_path: &str,
    csv_path: Option<&str>,
    raster_path: Option<&str>,
) -> Result<()> {
    if let Some(csv) = csv_path {
        let series = report.series.as_ref().ok_or_else(|| {
            Error::Validation("csv output requested but no series was recorded".into())
        })?;
        write_atomic(csv, &series_csv(series))?;
    }
    if let Some(raster) = raster_path {
        let points = report.raster.as_ref().ok_or_else(|| {
            Error::Validation("raster output requested but no raster was recorded".into())
        })?;
        write_atomic(raster, &raster_csv(points))?;
    }
    write_atomic(out_path, &report_json(report))
}
