//! Session events, stream sequencing and per-task metrics.
//!
//! A stream is every event sharing `(user_id, treatment, task_id)`. It opens
//! with exactly one `task_start`, may close with one `task_end`, and its
//! timestamps never decrease.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::facets::SentimentRect;

pub const LIKERT_ITEMS: usize = 5;

/// Filter widget condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Treatment {
    /// Text-button baseline.
    BA,
    /// Scatter plot.
    SC,
    /// Parallel coordinates.
    PC,
}

impl Treatment {
    pub const ALL: [Treatment; 3] = [Treatment::BA, Treatment::SC, Treatment::PC];

    pub fn as_str(self) -> &'static str {
        match self {
            Treatment::BA => "BA",
            Treatment::SC => "SC",
            Treatment::PC => "PC",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "BA" => Some(Treatment::BA),
            "SC" => Some(Treatment::SC),
            "PC" => Some(Treatment::PC),
            _ => None,
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Questionnaire {
    /// Likert answers, each in `1..=5`.
    pub aesthetics: [u8; LIKERT_ITEMS],
    pub perceived_time_s: f64,
    pub summary: String,
}

impl Questionnaire {
    pub fn aesthetics_total(&self) -> u32 {
        self.aesthetics.iter().map(|&a| u32::from(a)).sum()
    }

    pub fn validate(&self) -> Result<(), EventError> {
        if self.aesthetics.iter().any(|a| !(1..=5).contains(a)) {
            return Err(EventError::LikertOutOfRange);
        }
        if !(self.perceived_time_s.is_finite() && self.perceived_time_s > 0.0) {
            return Err(EventError::PerceivedTimeNotPositive);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    TaskStart,
    Query { text: String },
    FilterChange { rect: SentimentRect },
    ResultSelect { doc_id: String },
    Questionnaire(Questionnaire),
    TaskEnd,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::TaskStart => "task_start",
            EventKind::Query { .. } => "query",
            EventKind::FilterChange { .. } => "filter_change",
            EventKind::ResultSelect { .. } => "result_select",
            EventKind::Questionnaire(_) => "questionnaire",
            EventKind::TaskEnd => "task_end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub ts_ms: u64,
    pub user_id: String,
    pub treatment: Treatment,
    pub task_id: String,
    pub kind: EventKind,
}

impl SessionEvent {
    pub fn stream_key(&self) -> StreamKey {
        StreamKey {
            user_id: self.user_id.clone(),
            treatment: self.treatment,
            task_id: self.task_id.clone(),
        }
    }

    /// Payload-level invariants that do not depend on the stream.
    pub fn validate(&self) -> Result<(), EventError> {
        match &self.kind {
            EventKind::Questionnaire(q) => q.validate(),
            EventKind::FilterChange { rect } => rect.validate().map_err(|_| EventError::InvalidRect),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub user_id: String,
    pub treatment: Treatment,
    pub task_id: String,
}

impl fmt::Display for StreamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.user_id, self.treatment, self.task_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventError {
    LikertOutOfRange,
    PerceivedTimeNotPositive,
    InvalidRect,
}

impl fmt::Display for EventError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventError::LikertOutOfRange => f.write_str("aesthetics answers must be 5 integers in 1..=5"),
            EventError::PerceivedTimeNotPositive => f.write_str("perceived_time_s must be positive"),
            EventError::InvalidRect => f.write_str("filter rectangle is invalid"),
        }
    }
}

impl core::error::Error for EventError {}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceError {
    NotStarted(StreamKey),
    AlreadyStarted(StreamKey),
    AlreadyEnded(StreamKey),
    DuplicateQuestionnaire(StreamKey),
    TimestampRegression {
        stream: StreamKey,
        last_ms: u64,
        got_ms: u64,
    },
}

impl SequenceError {
    pub fn stream(&self) -> &StreamKey {
        match self {
            SequenceError::NotStarted(k)
            | SequenceError::AlreadyStarted(k)
            | SequenceError::AlreadyEnded(k)
            | SequenceError::DuplicateQuestionnaire(k) => k,
            SequenceError::TimestampRegression { stream, .. } => stream,
        }
    }
}

impl fmt::Display for SequenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceError::NotStarted(k) => write!(f, "stream {k}: event before task_start"),
            SequenceError::AlreadyStarted(k) => write!(f, "stream {k}: second task_start"),
            SequenceError::AlreadyEnded(k) => write!(f, "stream {k}: event after task_end"),
            SequenceError::DuplicateQuestionnaire(k) => {
                write!(f, "stream {k}: questionnaire already answered")
            }
            SequenceError::TimestampRegression {
                stream,
                last_ms,
                got_ms,
            } => write!(
                f,
                "stream {stream}: timestamp {got_ms} precedes previous event at {last_ms}"
            ),
        }
    }
}

impl core::error::Error for SequenceError {}

#[derive(Debug, Clone, PartialEq)]
pub enum RecordError {
    Invalid(EventError),
    Sequence(SequenceError),
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordError::Invalid(e) => e.fmt(f),
            RecordError::Sequence(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for RecordError {}

impl From<EventError> for RecordError {
    fn from(e: EventError) -> Self {
        RecordError::Invalid(e)
    }
}

impl From<SequenceError> for RecordError {
    fn from(e: SequenceError) -> Self {
        RecordError::Sequence(e)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct StreamState {
    start_ms: u64,
    last_ms: u64,
    end_ms: Option<u64>,
    query_count: u32,
    questionnaire: Option<Questionnaire>,
}

/// Aggregates for one completed task stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub user_id: String,
    pub treatment: Treatment,
    pub task_id: String,
    pub query_count: u32,
    pub task_time_s: f64,
    pub perceived_time_s: Option<f64>,
    pub aesthetics_total: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    NoStream { user_id: String, treatment: Treatment },
    Incomplete(StreamKey),
    Ambiguous { user_id: String, treatment: Treatment },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::NoStream { user_id, treatment } => {
                write!(f, "no stream for user {user_id} under {treatment}")
            }
            MetricsError::Incomplete(k) => write!(f, "incomplete task: stream {k} has no task_end"),
            MetricsError::Ambiguous { user_id, treatment } => {
                write!(f, "user {user_id} has several tasks under {treatment}")
            }
        }
    }
}

impl core::error::Error for MetricsError {}

/// Every complete stream's metrics plus the keys of streams lacking `task_end`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsSet {
    pub metrics: Vec<SessionMetrics>,
    pub incomplete: Vec<StreamKey>,
}

/// In-memory, append-only event log enforcing stream sequencing.
#[derive(Debug, Clone, Default)]
pub struct SessionLog {
    events: Vec<SessionEvent>,
    streams: BTreeMap<StreamKey, StreamState>,
}

impl SessionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Checks whether `event` could be appended, without appending it.
    pub fn check(&self, event: &SessionEvent) -> Result<(), RecordError> {
        event.validate()?;
        let key = event.stream_key();
        let state = self.streams.get(&key);
        match (&event.kind, state) {
            (EventKind::TaskStart, None) => Ok(()),
            (EventKind::TaskStart, Some(_)) => Err(SequenceError::AlreadyStarted(key).into()),
            (_, None) => Err(SequenceError::NotStarted(key).into()),
            (kind, Some(state)) => {
                if state.end_ms.is_some() {
                    return Err(SequenceError::AlreadyEnded(key).into());
                }
                if event.ts_ms < state.last_ms {
                    return Err(SequenceError::TimestampRegression {
                        stream: key,
                        last_ms: state.last_ms,
                        got_ms: event.ts_ms,
                    }
                    .into());
                }
                if matches!(kind, EventKind::Questionnaire(_)) && state.questionnaire.is_some() {
                    return Err(SequenceError::DuplicateQuestionnaire(key).into());
                }
                Ok(())
            }
        }
    }

    /// Appends `event` if it respects its stream's sequencing.
    pub fn record_event(&mut self, event: SessionEvent) -> Result<(), RecordError> {
        self.check(&event)?;
        let key = event.stream_key();
        let state = self.streams.entry(key).or_default();
        match &event.kind {
            EventKind::TaskStart => {
                state.start_ms = event.ts_ms;
            }
            EventKind::Query { .. } => state.query_count += 1,
            EventKind::Questionnaire(q) => state.questionnaire = Some(q.clone()),
            EventKind::TaskEnd => state.end_ms = Some(event.ts_ms),
            EventKind::FilterChange { .. } | EventKind::ResultSelect { .. } => {}
        }
        state.last_ms = event.ts_ms;
        self.events.push(event);
        Ok(())
    }

    fn stream_metrics(key: &StreamKey, state: &StreamState) -> Result<SessionMetrics, MetricsError> {
        let end_ms = state.end_ms.ok_or_else(|| MetricsError::Incomplete(key.clone()))?;
        Ok(SessionMetrics {
            user_id: key.user_id.clone(),
            treatment: key.treatment,
            task_id: key.task_id.clone(),
            query_count: state.query_count,
            task_time_s: (end_ms - state.start_ms) as f64 / 1000.0,
            perceived_time_s: state.questionnaire.as_ref().map(|q| q.perceived_time_s),
            aesthetics_total: state.questionnaire.as_ref().map(Questionnaire::aesthetics_total),
        })
    }

    /// Metrics of the single task `user_id` performed under `treatment`.
    pub fn compute_session_metrics(&self, user_id: &str, treatment: Treatment) -> Result<SessionMetrics, MetricsError> {
        let mut found = self
            .streams
            .iter()
            .filter(|(k, _)| k.user_id == user_id && k.treatment == treatment);
        let (key, state) = found.next().ok_or_else(|| MetricsError::NoStream {
            user_id: user_id.into(),
            treatment,
        })?;
        if found.next().is_some() {
            return Err(MetricsError::Ambiguous {
                user_id: user_id.into(),
                treatment,
            });
        }
        Self::stream_metrics(key, state)
    }

    /// Metrics for all complete streams, ordered by stream key.
    pub fn all_metrics(&self) -> MetricsSet {
        let mut set = MetricsSet::default();
        for (key, state) in &self.streams {
            match Self::stream_metrics(key, state) {
                Ok(m) => set.metrics.push(m),
                Err(_) => set.incomplete.push(key.clone()),
            }
        }
        set
    }
}
