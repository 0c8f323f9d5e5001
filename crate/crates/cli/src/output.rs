//! CSV rows and the run manifest.
//!
//! Column order is fixed. Probabilities are written with 9 significant
//! digits; grid coordinates use the shortest exact representation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use iqsc_core::analytics::AnalyticReference;
use iqsc_core::engine::{PointResult, SweepConfig, SweepPoint};
use serde::Serialize;

pub const ANALYTIC_HEADER: &str = "scheme,modulation,irr_db,snr_db,rate,metric,value";
pub const SWEEP_HEADER: &str = "scheme,modulation,irr_db,snr_db,rate,metric,value,ci_lo,ci_hi,trials,events,analytic,flag";

pub fn prob(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        grid_value(x)
    }
}

fn grid_value(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_owned()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_owned()
    } else {
        format!("{x}")
    }
}

fn point_prefix(p: &SweepPoint) -> String {
    format!(
        "{},{},{},{},{},{}",
        p.scheme,
        p.modulation.map_or("", |m| m.name()),
        grid_value(p.irr_db),
        grid_value(p.snr_db),
        p.metric.rate().map_or(String::new(), grid_value),
        p.metric.name(),
    )
}

pub fn analytic_csv(rows: &[(SweepPoint, Option<AnalyticReference>)]) -> String {
    let mut out = String::from(ANALYTIC_HEADER);
    out.push('\n');
    for (p, r) in rows {
        let value = r.map_or(String::new(), |r| prob(r.value));
        let _ = writeln!(out, "{},{value}", point_prefix(p));
    }
    out
}

pub fn sweep_csv(results: &[PointResult]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in results {
        let e = &r.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            point_prefix(&r.point),
            prob(e.estimate),
            prob(e.ci95.0),
            prob(e.ci95.1),
            e.trials,
            e.events,
            e.analytic.map_or(String::new(), |a| prob(a.value)),
            e.flag.map_or("", |f| f.name()),
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp: String,
    pub seed: u64,
    pub workers: usize,
    pub config: serde_json::Value,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, config: &SweepConfig, workers: usize, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            seed: config.seed,
            workers,
            config: config.to_json(),
            outputs,
        }
    }
}

/// `results.csv` -> `results.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_have_nine_significant_digits() {
        assert_eq!(prob(0.0232687), "2.32687000e-2");
        assert_eq!(prob(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(prob(0.0), "0.00000000e0");
    }

    #[test]
    fn manifest_sits_next_to_csv() {
        assert_eq!(
            manifest_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.manifest.json")
        );
    }
}
