//! Engagement, the explorer/achiever taxonomy and the two study reports.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::session::{SessionMetrics, Treatment};
use crate::stats::{bonferroni_threshold, kruskal_wallis, rank_sum_test, StatTestResult, StatsError};

/// Family-wise significance level of the post-hoc comparisons.
pub const DEFAULT_ALPHA: f64 = 0.05;

pub const QUERY_COUNT: &str = "Query Count";
pub const TASK_TIME: &str = "Task Time (s)";
pub const PERCEIVED_TIME: &str = "Perceived Time";
pub const COGNITIVE_ENGAGEMENT: &str = "Cognitive Engagement";
pub const AESTHETICS: &str = "Aesthetics";
pub const TOTAL_QUERIES: &str = "Total Queries";
pub const TOTAL_TIME: &str = "Total Time";

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticsError {
    NonPositive(&'static str),
    TooFewUsers(usize),
    TooFewTreatments(usize),
    EmptyTreatment(Treatment),
    EmptyClass(UserClass),
    Unclassified(String),
    DuplicateObservation { user_id: String, treatment: Treatment },
}

impl fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticsError::NonPositive(what) => write!(f, "{what} must be positive"),
            AnalyticsError::TooFewUsers(n) => {
                write!(f, "classification needs at least 2 users, got {n}")
            }
            AnalyticsError::TooFewTreatments(n) => {
                write!(f, "report needs at least 2 treatments, got {n}")
            }
            AnalyticsError::EmptyTreatment(t) => write!(f, "treatment {t} has no users"),
            AnalyticsError::EmptyClass(c) => write!(f, "no users classified as {}", c.as_str()),
            AnalyticsError::Unclassified(u) => write!(f, "user {u} has no classification"),
            AnalyticsError::DuplicateObservation { user_id, treatment } => {
                write!(f, "user {user_id} has more than one task under {treatment}")
            }
        }
    }
}

impl core::error::Error for AnalyticsError {}

/// Actual minus perceived task time; positive means positively engaged.
pub fn cognitive_engagement(task_time_s: f64, perceived_time_s: f64) -> Result<f64, AnalyticsError> {
    if !(task_time_s.is_finite() && task_time_s > 0.0) {
        return Err(AnalyticsError::NonPositive("task time"));
    }
    if !(perceived_time_s.is_finite() && perceived_time_s > 0.0) {
        return Err(AnalyticsError::NonPositive("perceived time"));
    }
    Ok(task_time_s - perceived_time_s)
}

/// Geometric mean of total task time and total queries.
pub fn exploration_score(total_task_time_s: f64, total_queries: u32) -> Result<f64, AnalyticsError> {
    if !(total_task_time_s.is_finite() && total_task_time_s > 0.0) {
        return Err(AnalyticsError::NonPositive("total task time"));
    }
    if total_queries == 0 {
        return Err(AnalyticsError::NonPositive("total query count"));
    }
    Ok(libm::sqrt(total_task_time_s * f64::from(total_queries)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserClass {
    Achiever,
    Explorer,
}

impl UserClass {
    pub fn as_str(self) -> &'static str {
        match self {
            UserClass::Achiever => "achiever",
            UserClass::Explorer => "explorer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserClassification {
    pub user_id: String,
    pub exploration_score: f64,
    pub class: UserClass,
}

/// Bottom half by score (ties by user id) are achievers; `⌊N/2⌋` of them.
pub fn classify_users(scores: &[(String, f64)]) -> Result<Vec<UserClassification>, AnalyticsError> {
    if scores.len() < 2 {
        return Err(AnalyticsError::TooFewUsers(scores.len()));
    }
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let achievers = sorted.len() / 2;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, (user_id, score))| UserClassification {
            user_id: user_id.clone(),
            exploration_score: *score,
            class: if i < achievers {
                UserClass::Achiever
            } else {
                UserClass::Explorer
            },
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserTotals {
    pub user_id: String,
    pub total_queries: u32,
    pub total_time_s: f64,
}

/// Per-user sums over every completed task, ordered by user id.
pub fn user_totals(metrics: &[SessionMetrics]) -> Vec<UserTotals> {
    let mut totals: BTreeMap<&str, (u32, f64)> = BTreeMap::new();
    for m in metrics {
        let entry = totals.entry(&m.user_id).or_insert((0, 0.0));
        entry.0 += m.query_count;
        entry.1 += m.task_time_s;
    }
    totals
        .into_iter()
        .map(|(user_id, (total_queries, total_time_s))| UserTotals {
            user_id: user_id.into(),
            total_queries,
            total_time_s,
        })
        .collect()
}

/// Classifications of every user with a defined exploration score.
#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub classifications: Vec<UserClassification>,
    /// Users whose score is undefined (no queries or no time).
    pub unclassified: Vec<String>,
}

pub fn classify_from_metrics(metrics: &[SessionMetrics]) -> Result<Classified, AnalyticsError> {
    let mut scores = Vec::new();
    let mut unclassified = Vec::new();
    for t in user_totals(metrics) {
        match exploration_score(t.total_time_s, t.total_queries) {
            Ok(s) => scores.push((t.user_id, s)),
            Err(_) => unclassified.push(t.user_id),
        }
    }
    Ok(Classified {
        classifications: classify_users(&scores)?,
        unclassified,
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Measure {
    Queries,
    TaskTime,
    PerceivedTime,
    Engagement,
    Aesthetics,
}

impl Measure {
    fn value(self, m: &SessionMetrics) -> Option<f64> {
        match self {
            Measure::Queries => Some(f64::from(m.query_count)),
            Measure::TaskTime => Some(m.task_time_s),
            Measure::PerceivedTime => m.perceived_time_s,
            Measure::Engagement => m
                .perceived_time_s
                .and_then(|p| cognitive_engagement(m.task_time_s, p).ok()),
            Measure::Aesthetics => m.aesthetics_total.map(f64::from),
        }
    }
}

fn check_unique(metrics: &[SessionMetrics]) -> Result<(), AnalyticsError> {
    let mut seen = BTreeMap::new();
    for m in metrics {
        if seen.insert((m.user_id.as_str(), m.treatment), ()).is_some() {
            return Err(AnalyticsError::DuplicateObservation {
                user_id: m.user_id.clone(),
                treatment: m.treatment,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentCell {
    pub treatment: Treatment,
    pub n: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseComparison {
    pub first: Treatment,
    pub second: Treatment,
    pub test: Result<StatTestResult, StatsError>,
    /// `p < ` the Bonferroni threshold.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentRow {
    pub label: &'static str,
    pub cells: Vec<TreatmentCell>,
    pub kruskal_wallis: Result<StatTestResult, StatsError>,
    pub post_hoc: Vec<PairwiseComparison>,
}

/// Per-treatment means with omnibus and post-hoc tests for every metric.
#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentReport {
    pub treatments: Vec<Treatment>,
    pub alpha: f64,
    pub bonferroni_threshold: f64,
    pub rows: Vec<TreatmentRow>,
}

/// Report over the treatments that occur in `metrics`.
pub fn build_treatment_report(metrics: &[SessionMetrics]) -> Result<TreatmentReport, AnalyticsError> {
    let present: Vec<Treatment> = Treatment::ALL
        .into_iter()
        .filter(|t| metrics.iter().any(|m| m.treatment == *t))
        .collect();
    build_treatment_report_for(metrics, &present)
}

/// Report over an explicit treatment list; each must have at least one user.
pub fn build_treatment_report_for(
    metrics: &[SessionMetrics],
    treatments: &[Treatment],
) -> Result<TreatmentReport, AnalyticsError> {
    if treatments.len() < 2 {
        return Err(AnalyticsError::TooFewTreatments(treatments.len()));
    }
    for &t in treatments {
        if !metrics.iter().any(|m| m.treatment == t) {
            return Err(AnalyticsError::EmptyTreatment(t));
        }
    }
    check_unique(metrics)?;

    let pairs: Vec<(Treatment, Treatment)> = treatments
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| treatments[i + 1..].iter().map(move |&b| (a, b)))
        .collect();
    let threshold = bonferroni_threshold(DEFAULT_ALPHA, pairs.len());

    let measures = [
        (QUERY_COUNT, Measure::Queries),
        (TASK_TIME, Measure::TaskTime),
        (PERCEIVED_TIME, Measure::PerceivedTime),
        (COGNITIVE_ENGAGEMENT, Measure::Engagement),
        (AESTHETICS, Measure::Aesthetics),
    ];
    let rows = measures
        .into_iter()
        .map(|(label, measure)| {
            let groups: Vec<Vec<f64>> = treatments
                .iter()
                .map(|&t| {
                    metrics
                        .iter()
                        .filter(|m| m.treatment == t)
                        .filter_map(|m| measure.value(m))
                        .collect()
                })
                .collect();
            let cells = treatments
                .iter()
                .zip(&groups)
                .map(|(&treatment, g)| TreatmentCell {
                    treatment,
                    n: g.len(),
                    mean: mean(g),
                })
                .collect();
            let post_hoc = pairs
                .iter()
                .map(|&(first, second)| {
                    let ia = treatments.iter().position(|&t| t == first).unwrap_or(0);
                    let ib = treatments.iter().position(|&t| t == second).unwrap_or(0);
                    let test = rank_sum_test(&groups[ia], &groups[ib]);
                    let significant = matches!(&test, Ok(r) if r.p_value < threshold);
                    PairwiseComparison {
                        first,
                        second,
                        test,
                        significant,
                    }
                })
                .collect();
            TreatmentRow {
                label,
                cells,
                kruskal_wallis: kruskal_wallis(&groups),
                post_hoc,
            }
        })
        .collect();

    Ok(TreatmentReport {
        treatments: treatments.to_vec(),
        alpha: DEFAULT_ALPHA,
        bonferroni_threshold: threshold,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomyRow {
    pub label: String,
    pub achiever_n: usize,
    pub achiever_mean: Option<f64>,
    pub explorer_n: usize,
    pub explorer_mean: Option<f64>,
    pub test: Result<StatTestResult, StatsError>,
}

/// Achiever vs explorer means and rank-sum p for totals and per-treatment measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomyReport {
    pub classifications: Vec<UserClassification>,
    pub unclassified: Vec<String>,
    pub rows: Vec<TaxonomyRow>,
}

fn taxonomy_row(label: String, achievers: Vec<f64>, explorers: Vec<f64>) -> TaxonomyRow {
    TaxonomyRow {
        achiever_n: achievers.len(),
        achiever_mean: mean(&achievers),
        explorer_n: explorers.len(),
        explorer_mean: mean(&explorers),
        test: rank_sum_test(&achievers, &explorers),
        label,
    }
}

/// Report for users classified in `classifications`; every user in `metrics`
/// must be either classified or listed in `unclassified`.
pub fn build_taxonomy_report(
    metrics: &[SessionMetrics],
    classifications: &[UserClassification],
    unclassified: &[String],
) -> Result<TaxonomyReport, AnalyticsError> {
    check_unique(metrics)?;
    let classes: BTreeMap<&str, UserClass> = classifications.iter().map(|c| (c.user_id.as_str(), c.class)).collect();
    for m in metrics {
        if !classes.contains_key(m.user_id.as_str()) && !unclassified.contains(&m.user_id) {
            return Err(AnalyticsError::Unclassified(m.user_id.clone()));
        }
    }
    for class in [UserClass::Achiever, UserClass::Explorer] {
        if !classes.values().any(|&c| c == class) {
            return Err(AnalyticsError::EmptyClass(class));
        }
    }

    let split = |values: &mut dyn Iterator<Item = (&str, f64)>| {
        let mut achievers = Vec::new();
        let mut explorers = Vec::new();
        for (user, v) in values {
            match classes.get(user) {
                Some(UserClass::Achiever) => achievers.push(v),
                Some(UserClass::Explorer) => explorers.push(v),
                None => {}
            }
        }
        (achievers, explorers)
    };

    let totals = user_totals(metrics);
    let mut rows = Vec::new();
    let (a, e) = split(&mut totals.iter().map(|t| (t.user_id.as_str(), f64::from(t.total_queries))));
    rows.push(taxonomy_row(TOTAL_QUERIES.into(), a, e));
    let (a, e) = split(&mut totals.iter().map(|t| (t.user_id.as_str(), t.total_time_s)));
    rows.push(taxonomy_row(TOTAL_TIME.into(), a, e));

    let present: Vec<Treatment> = Treatment::ALL
        .into_iter()
        .filter(|t| metrics.iter().any(|m| m.treatment == *t))
        .collect();
    let measures = [
        ("Queries", Measure::Queries),
        ("Task Time", Measure::TaskTime),
        ("Perceived Time", Measure::PerceivedTime),
        ("C. Engagement", Measure::Engagement),
    ];
    for (prefix, measure) in measures {
        for &t in &present {
            let (a, e) = split(
                &mut metrics
                    .iter()
                    .filter(|m| m.treatment == t)
                    .filter_map(|m| measure.value(m).map(|v| (m.user_id.as_str(), v))),
            );
            let mut label = String::from(prefix);
            label.push(' ');
            label.push_str(t.as_str());
            rows.push(taxonomy_row(label, a, e));
        }
    }

    Ok(TaxonomyReport {
        classifications: classifications.to_vec(),
        unclassified: unclassified.to_vec(),
        rows,
    })
}

/// Classifies the users found in `metrics` and builds their taxonomy report.
pub fn taxonomy_from_metrics(metrics: &[SessionMetrics]) -> Result<TaxonomyReport, AnalyticsError> {
    let classified = classify_from_metrics(metrics)?;
    build_taxonomy_report(metrics, &classified.classifications, &classified.unclassified)
}
