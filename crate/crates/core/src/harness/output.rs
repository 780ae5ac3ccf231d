//! CSV and JSON emitters. Output format is chosen from the file extension.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::experiment::ExperimentResult;
use super::sweep::{FusionRow, RocPoint};
use crate::error::{PlaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
            Some(e) if e == "csv" => Ok(OutputFormat::Csv),
            Some(e) if e == "json" => Ok(OutputFormat::Json),
            _ => Err(PlaError::config(
                "--out",
                format!("{}: extension must be .csv or .json", path.display()),
            )),
        }
    }
}

fn csv_err(e: csv::Error) -> PlaError {
    PlaError::Io(std::io::Error::other(e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| PlaError::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

/// `alpha,p_false_alarm,p_detect`
pub fn write_roc_csv<W: Write>(rows: &[RocPoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "p_false_alarm", "p_detect"]).map_err(csv_err)?;
    for r in rows {
        out.write_record([r.alpha.to_string(), r.p_false_alarm.to_string(), r.p_detect.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `beta,rule,p_detect_joint,p_false_alarm_joint,p_detect_empirical,p_false_alarm_empirical`;
/// empirical cells are empty for analytic-only sweeps.
pub fn write_fusion_csv<W: Write>(rows: &[FusionRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "beta",
        "rule",
        "p_detect_joint",
        "p_false_alarm_joint",
        "p_detect_empirical",
        "p_false_alarm_empirical",
    ])
    .map_err(csv_err)?;
    for r in rows {
        out.write_record([
            r.beta.to_string(),
            r.rule.clone(),
            r.p_detect_joint.to_string(),
            r.p_false_alarm_joint.to_string(),
            opt(r.p_detect_empirical),
            opt(r.p_false_alarm_empirical),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per reported rule:
/// `rule,quorum,p_detect_joint,p_false_alarm_joint,p_detect_empirical,p_false_alarm_empirical,trials`.
pub fn write_experiment_csv<W: Write>(result: &ExperimentResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "rule",
        "quorum",
        "p_detect_joint",
        "p_false_alarm_joint",
        "p_detect_empirical",
        "p_false_alarm_empirical",
        "trials",
    ])
    .map_err(csv_err)?;
    for r in &result.rules {
        out.write_record([
            r.rule.clone(),
            r.quorum.to_string(),
            r.analytic.p_detect_joint.to_string(),
            r.analytic.p_false_alarm_joint.to_string(),
            r.empirical.p_detect.to_string(),
            r.empirical.p_false_alarm.to_string(),
            r.empirical.trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
