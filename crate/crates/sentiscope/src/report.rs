//! JSON rendering of the treatment and taxonomy reports.
//!
//! The CLI and the HTTP service both emit [`render_report`] output, so the
//! two paths agree byte for byte.

use std::str::FromStr;

use sentiscope_core::analytics::{
    build_treatment_report, taxonomy_from_metrics, AnalyticsError, TaxonomyReport, TreatmentReport,
};
use sentiscope_core::session::{MetricsSet, SessionMetrics};
use sentiscope_core::stats::{StatTestResult, StatsError};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Treatment,
    Taxonomy,
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "treatment" => Ok(ReportKind::Treatment),
            "taxonomy" => Ok(ReportKind::Taxonomy),
            other => Err(format!(
                "unknown report kind {other:?} (expected treatment or taxonomy)"
            )),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("no complete streams")]
    NoData,
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

fn test_json(test: &Result<StatTestResult, StatsError>, statistic: &str) -> Value {
    match test {
        Ok(r) => json!({
            statistic: r.statistic,
            "p": r.p_value,
            "method": r.method.as_str(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn treatment_json(report: &TreatmentReport) -> Value {
    let mut rows = Map::new();
    for row in &report.rows {
        let mut means = Map::new();
        let mut counts = Map::new();
        for cell in &row.cells {
            means.insert(cell.treatment.as_str().into(), json!(cell.mean));
            counts.insert(cell.treatment.as_str().into(), json!(cell.n));
        }
        let post_hoc: Vec<Value> = row
            .post_hoc
            .iter()
            .map(|pair| {
                let mut v = json!({
                    "pair": format!("{}-{}", pair.first, pair.second),
                });
                if let (Value::Object(obj), Value::Object(test)) = (&mut v, test_json(&pair.test, "U")) {
                    obj.extend(test);
                    obj.insert("significant".into(), json!(pair.significant));
                }
                v
            })
            .collect();
        rows.insert(
            row.label.into(),
            json!({
                "means": means,
                "n": counts,
                "kruskal_wallis": test_json(&row.kruskal_wallis, "K"),
                "post_hoc": post_hoc,
            }),
        );
    }
    json!({
        "report": "treatment",
        "treatments": report.treatments.iter().map(|t| t.as_str()).collect::<Vec<_>>(),
        "alpha": report.alpha,
        "bonferroni_threshold": report.bonferroni_threshold,
        "rows": rows,
    })
}

pub fn taxonomy_json(report: &TaxonomyReport) -> Value {
    let mut rows = Map::new();
    for row in &report.rows {
        let mut v = json!({
            "achievers": { "n": row.achiever_n, "mean": row.achiever_mean },
            "explorers": { "n": row.explorer_n, "mean": row.explorer_mean },
        });
        if let (Value::Object(obj), Value::Object(test)) = (&mut v, test_json(&row.test, "U")) {
            obj.extend(test);
        }
        rows.insert(row.label.clone(), v);
    }
    let classifications: Vec<Value> = report
        .classifications
        .iter()
        .map(|c| {
            json!({
                "user_id": c.user_id,
                "exploration_score": c.exploration_score,
                "class": c.class.as_str(),
            })
        })
        .collect();
    json!({
        "report": "taxonomy",
        "classifications": classifications,
        "unclassified": report.unclassified,
        "rows": rows,
    })
}

/// Builds and renders a report from completed-stream metrics.
pub fn render_report(kind: ReportKind, metrics: &[SessionMetrics]) -> Result<String, ReportError> {
    if metrics.is_empty() {
        return Err(ReportError::NoData);
    }
    let value = match kind {
        ReportKind::Treatment => treatment_json(&build_treatment_report(metrics)?),
        ReportKind::Taxonomy => taxonomy_json(&taxonomy_from_metrics(metrics)?),
    };
    let mut text = serde_json::to_string_pretty(&value).expect("report values always serialize");
    text.push('\n');
    Ok(text)
}

pub fn render_from_set(kind: ReportKind, set: &MetricsSet) -> Result<String, ReportError> {
    render_report(kind, &set.metrics)
}
