//! JSON reports. Canonical mode drops timing and timestamps so that two runs
//! with the same seeds produce identical bytes.

use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use splinetaylor_core::{ExtractConfig, ExtractionReport};

use crate::error::{CliError, Result};
use crate::formats::{BoundsDoc, ExtractConfigDoc};

const VOLATILE_KEYS: &[&str] = &["elapsed_seconds", "created_unix_seconds"];

#[derive(Debug, Clone, Serialize)]
pub struct LevelDoc {
    pub index: Vec<u32>,
    pub label: String,
    pub rmse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroTestDoc {
    pub is_zero: bool,
    pub max_abs: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractReportDoc {
    pub format_version: u32,
    pub polynomial: String,
    pub config: ExtractConfigDoc,
    pub levels: Vec<LevelDoc>,
    pub level_bounds: Vec<BoundsDoc>,
    pub centers: Vec<Vec<f64>>,
    /// Per center, chain values in the same order as `levels`.
    pub center_values: Vec<Vec<f64>>,
    pub zero_test: ZeroTestDoc,
    pub extrapolated: bool,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
}

pub fn extract_report_doc(polynomial: String, cfg: &ExtractConfig, r: &ExtractionReport) -> ExtractReportDoc {
    ExtractReportDoc {
        format_version: 1,
        polynomial,
        config: cfg.into(),
        levels: r
            .level_rmse
            .iter()
            .map(|(a, rmse)| LevelDoc { index: a.exponents().to_vec(), label: a.label(), rmse: *rmse })
            .collect(),
        level_bounds: r.level_bounds.iter().map(Into::into).collect(),
        centers: r.centers.clone(),
        center_values: r.center_values.iter().map(|m| m.values().copied().collect()).collect(),
        zero_test: ZeroTestDoc {
            is_zero: r.zero_test.is_zero,
            max_abs: r.zero_test.max_abs,
            threshold: r.zero_test.threshold,
        },
        extrapolated: r.extrapolated,
        mean_abs_error: r.mean_abs_error,
        max_abs_error: r.max_abs_error,
    }
}

/// Serializes `doc`, adding timing fields unless `canonical`.
pub fn render<T: Serialize>(doc: &T, elapsed: Duration, canonical: bool) -> Result<String> {
    let mut value = serde_json::to_value(doc)?;
    if let Value::Object(map) = &mut value {
        if canonical {
            strip_volatile(map);
        } else {
            map.insert("elapsed_seconds".into(), elapsed.as_secs_f64().into());
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            map.insert("created_unix_seconds".into(), now.into());
        }
    }
    let mut s = serde_json::to_string_pretty(&value)?;
    s.push('\n');
    Ok(s)
}

fn strip_volatile(map: &mut Map<String, Value>) {
    for k in VOLATILE_KEYS {
        map.remove(*k);
    }
}

pub fn write_report<T: Serialize>(path: &Path, doc: &T, elapsed: Duration, canonical: bool) -> Result<()> {
    std::fs::write(path, render(doc, elapsed, canonical)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}
