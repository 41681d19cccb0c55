//! Wire format and durable on-disk storage for session events.
//!
//! Each line of a log file is one JSON object with the keys `ts_ms`,
//! `user_id`, `treatment`, `task_id`, `kind` and `payload`. The same object
//! is the body of `POST /events`.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sentiscope_core::facets::SentimentRect;
use sentiscope_core::session::{
    EventKind, MetricsSet, Questionnaire, RecordError, SessionEvent, SessionLog, Treatment, LIKERT_ITEMS,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireEvent {
    pub ts_ms: u64,
    pub user_id: String,
    pub treatment: String,
    pub task_id: String,
    pub kind: String,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Debug, Error, PartialEq)]
pub enum WireError {
    #[error("unknown event kind {0:?}")]
    UnknownKind(String),
    #[error("unknown treatment {0:?} (expected BA, SC or PC)")]
    UnknownTreatment(String),
    #[error("bad {kind} payload: {reason}")]
    BadPayload { kind: &'static str, reason: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryPayload {
    text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectPayload {
    doc_id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RectPayload {
    pos_min: f64,
    pos_max: f64,
    neg_min: f64,
    neg_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionnairePayload {
    aesthetics: Vec<i64>,
    perceived_time_s: f64,
    #[serde(default)]
    summary: String,
}

fn payload<T: for<'de> Deserialize<'de>>(kind: &'static str, value: Value) -> Result<T, WireError> {
    serde_json::from_value(value).map_err(|e| WireError::BadPayload {
        kind,
        reason: e.to_string(),
    })
}

fn empty_payload(kind: &'static str, value: &Value) -> Result<(), WireError> {
    match value {
        Value::Null => Ok(()),
        Value::Object(m) if m.is_empty() => Ok(()),
        _ => Err(WireError::BadPayload {
            kind,
            reason: "expected an empty object".into(),
        }),
    }
}

impl WireEvent {
    pub fn decode(self) -> Result<SessionEvent, WireError> {
        let treatment =
            Treatment::parse(&self.treatment).ok_or_else(|| WireError::UnknownTreatment(self.treatment.clone()))?;
        let kind = match self.kind.as_str() {
            "task_start" => {
                empty_payload("task_start", &self.payload)?;
                EventKind::TaskStart
            }
            "task_end" => {
                empty_payload("task_end", &self.payload)?;
                EventKind::TaskEnd
            }
            "query" => {
                let p: QueryPayload = payload("query", self.payload)?;
                EventKind::Query { text: p.text }
            }
            "filter_change" => {
                let p: RectPayload = payload("filter_change", self.payload)?;
                EventKind::FilterChange {
                    rect: SentimentRect {
                        pos_min: p.pos_min,
                        pos_max: p.pos_max,
                        neg_min: p.neg_min,
                        neg_max: p.neg_max,
                    },
                }
            }
            "result_select" => {
                let p: SelectPayload = payload("result_select", self.payload)?;
                EventKind::ResultSelect { doc_id: p.doc_id }
            }
            "questionnaire" => {
                let p: QuestionnairePayload = payload("questionnaire", self.payload)?;
                let bad = |reason: &str| WireError::BadPayload {
                    kind: "questionnaire",
                    reason: reason.into(),
                };
                if p.aesthetics.len() != LIKERT_ITEMS {
                    return Err(bad("aesthetics must hold exactly 5 answers"));
                }
                let mut aesthetics = [0u8; LIKERT_ITEMS];
                for (slot, &a) in aesthetics.iter_mut().zip(&p.aesthetics) {
                    if !(1..=5).contains(&a) {
                        return Err(bad("aesthetics answers must be integers in 1..=5"));
                    }
                    *slot = a as u8;
                }
                EventKind::Questionnaire(Questionnaire {
                    aesthetics,
                    perceived_time_s: p.perceived_time_s,
                    summary: p.summary,
                })
            }
            other => return Err(WireError::UnknownKind(other.to_string())),
        };
        Ok(SessionEvent {
            ts_ms: self.ts_ms,
            user_id: self.user_id,
            treatment,
            task_id: self.task_id,
            kind,
        })
    }

    pub fn encode(event: &SessionEvent) -> WireEvent {
        let payload = match &event.kind {
            EventKind::TaskStart | EventKind::TaskEnd => json!({}),
            EventKind::Query { text } => json!({ "text": text }),
            EventKind::FilterChange { rect } => json!({
                "pos_min": rect.pos_min,
                "pos_max": rect.pos_max,
                "neg_min": rect.neg_min,
                "neg_max": rect.neg_max,
            }),
            EventKind::ResultSelect { doc_id } => json!({ "doc_id": doc_id }),
            EventKind::Questionnaire(q) => json!({
                "aesthetics": q.aesthetics,
                "perceived_time_s": q.perceived_time_s,
                "summary": q.summary,
            }),
        };
        WireEvent {
            ts_ms: event.ts_ms,
            user_id: event.user_id.clone(),
            treatment: event.treatment.as_str().to_string(),
            task_id: event.task_id.clone(),
            kind: event.kind.name().to_string(),
            payload,
        }
    }
}

/// Serializes `event` as one log line, newline included.
pub fn encode_line(event: &SessionEvent) -> String {
    let mut line = serde_json::to_string(&WireEvent::encode(event)).expect("wire events always serialize");
    line.push('\n');
    line
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("cannot access event log {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} line {line}: {reason}")]
    Line { path: PathBuf, line: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum AppendError {
    #[error(transparent)]
    Rejected(#[from] RecordError),
    #[error("failed to persist event: {0}")]
    Io(#[from] io::Error),
}

/// Log contents read back from disk.
#[derive(Debug, Default)]
pub struct ReadLog {
    pub log: SessionLog,
    /// Byte length of the well-formed prefix.
    pub valid_len: u64,
    /// An unterminated, unparseable final line was found (crash during a write).
    pub torn_tail: bool,
}

fn parse_line(line: &str) -> Result<SessionEvent, String> {
    let wire: WireEvent = serde_json::from_str(line).map_err(|e| e.to_string())?;
    wire.decode().map_err(|e| e.to_string())
}

/// Reads and sequences every event in `path`.
pub fn read_log(path: &Path) -> Result<ReadLog, LogError> {
    let bytes = fs::read(path).map_err(|source| LogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let mut out = ReadLog::default();
    let mut offset = 0usize;
    for (i, chunk) in text.split_inclusive('\n').enumerate() {
        let terminated = chunk.ends_with('\n');
        let line = chunk.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            offset += chunk.len();
            continue;
        }
        let event = match parse_line(line) {
            Ok(event) => event,
            Err(_) if !terminated => {
                out.torn_tail = true;
                break;
            }
            Err(reason) => {
                return Err(LogError::Line {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason,
                })
            }
        };
        out.log.record_event(event).map_err(|e| LogError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        offset += chunk.len();
    }
    out.valid_len = offset as u64;
    Ok(out)
}

/// Metrics for every complete stream in the log at `path`.
pub fn replay_log(path: &Path) -> Result<MetricsSet, LogError> {
    Ok(read_log(path)?.log.all_metrics())
}

/// Single-writer handle on an append-only log file.
///
/// `append` returns only after the event's line has reached stable storage.
#[derive(Debug)]
pub struct EventLogFile {
    path: PathBuf,
    file: File,
    log: SessionLog,
}

impl EventLogFile {
    /// Opens or creates `path`, replaying existing events and repairing a torn tail.
    pub fn open(path: &Path) -> Result<Self, LogError> {
        let io_err = |source| LogError::Io {
            path: path.to_path_buf(),
            source,
        };
        let log = if path.exists() {
            let read = read_log(path)?;
            let len = fs::metadata(path).map_err(io_err)?.len();
            if read.valid_len < len {
                let file = OpenOptions::new().write(true).open(path).map_err(io_err)?;
                // drop the torn tail, or terminate a complete but unterminated line
                file.set_len(read.valid_len).map_err(io_err)?;
                file.sync_all().map_err(io_err)?;
            }
            let bytes = fs::read(path).map_err(io_err)?;
            if bytes.last().is_some_and(|&b| b != b'\n') {
                let mut file = OpenOptions::new().append(true).open(path).map_err(io_err)?;
                file.write_all(b"\n").map_err(io_err)?;
                file.sync_all().map_err(io_err)?;
            }
            read.log
        } else {
            SessionLog::new()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err)?;
        Ok(EventLogFile {
            path: path.to_path_buf(),
            file,
            log,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    /// Validates, persists and then records `event`. Returns the event count.
    pub fn append(&mut self, event: SessionEvent) -> Result<usize, AppendError> {
        self.log.check(&event)?;
        self.file.write_all(encode_line(&event).as_bytes())?;
        self.file.sync_data()?;
        self.log.record_event(event)?;
        Ok(self.log.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire(kind: &str, payload: Value) -> WireEvent {
        WireEvent {
            ts_ms: 1,
            user_id: "u1".into(),
            treatment: "SC".into(),
            task_id: "t1".into(),
            kind: kind.into(),
            payload,
        }
    }

    #[test]
    fn decode_every_kind() {
        let kinds = [
            wire("task_start", json!({})),
            wire("query", json!({"text": "war"})),
            wire(
                "filter_change",
                json!({"pos_min": 2.0, "pos_max": 4.0, "neg_min": 1.0, "neg_max": 3.0}),
            ),
            wire("result_select", json!({"doc_id": "Q1"})),
            wire(
                "questionnaire",
                json!({"aesthetics": [3, 3, 3, 2, 2], "perceived_time_s": 900.0, "summary": "s"}),
            ),
            wire("task_end", Value::Null),
        ];
        for w in kinds {
            let event = w.clone().decode().unwrap();
            let back = WireEvent::encode(&event);
            assert_eq!(back.decode().unwrap(), event);
        }
    }

    #[test]
    fn decode_errors() {
        assert_eq!(
            wire("scroll", json!({})).decode(),
            Err(WireError::UnknownKind("scroll".into()))
        );
        let mut w = wire("task_start", json!({}));
        w.treatment = "XX".into();
        assert!(matches!(w.decode(), Err(WireError::UnknownTreatment(_))));
        assert!(matches!(
            wire(
                "questionnaire",
                json!({"aesthetics": [3, 3, 3, 2], "perceived_time_s": 1.0})
            )
            .decode(),
            Err(WireError::BadPayload { .. })
        ));
        assert!(matches!(
            wire(
                "questionnaire",
                json!({"aesthetics": [3, 3, 3, 2, 9], "perceived_time_s": 1.0})
            )
            .decode(),
            Err(WireError::BadPayload { .. })
        ));
        assert!(matches!(
            wire("query", json!({})).decode(),
            Err(WireError::BadPayload { .. })
        ));
    }

    fn event(ts: u64, kind: EventKind) -> SessionEvent {
        SessionEvent {
            ts_ms: ts,
            user_id: "u1".into(),
            treatment: Treatment::BA,
            task_id: "t1".into(),
            kind,
        }
    }

    #[test]
    fn reopen_recovers_appended_events() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.log");
        {
            let mut log = EventLogFile::open(&path).unwrap();
            log.append(event(0, EventKind::TaskStart)).unwrap();
            log.append(event(5, EventKind::Query { text: "a".into() })).unwrap();
            assert!(log.append(event(6, EventKind::TaskStart)).is_err());
        }
        let mut log = EventLogFile::open(&path).unwrap();
        assert_eq!(log.log().len(), 2);
        // sequencing state survives the reopen
        assert!(matches!(
            log.append(event(7, EventKind::TaskStart)),
            Err(AppendError::Rejected(_))
        ));
        log.append(event(9, EventKind::TaskEnd)).unwrap();
        let metrics = replay_log(&path).unwrap();
        assert_eq!(metrics.metrics.len(), 1);
        assert_eq!(metrics.metrics[0].query_count, 1);
    }

    #[test]
    fn torn_tail_is_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.log");
        {
            let mut log = EventLogFile::open(&path).unwrap();
            log.append(event(0, EventKind::TaskStart)).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"ts_ms":3,"user_id":"u1","treat"#).unwrap();
        drop(f);

        let read = read_log(&path).unwrap();
        assert!(read.torn_tail);
        assert_eq!(read.log.len(), 1);

        let mut log = EventLogFile::open(&path).unwrap();
        log.append(event(4, EventKind::TaskEnd)).unwrap();
        let read = read_log(&path).unwrap();
        assert!(!read.torn_tail);
        assert_eq!(read.log.len(), 2);
    }

    #[test]
    fn unparseable_line_names_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.log");
        let good = encode_line(&event(0, EventKind::TaskStart));
        fs::write(&path, format!("{good}garbage\n{good}")).unwrap();
        let err = replay_log(&path).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn empty_file_has_no_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.log");
        fs::write(&path, "").unwrap();
        assert_eq!(replay_log(&path).unwrap(), MetricsSet::default());
    }
}
