//! Fixtures shared by the integration tests and the acceptance suite.

#![allow(dead_code)]

use std::path::Path;

use sentiscope::event_log::encode_line;
use sentiscope_core::corpus::Document;
use sentiscope_core::facets::SentimentRect;
use sentiscope_core::session::{EventKind, Questionnaire, SessionEvent, Treatment};

/// One participant's outcome for one treatment.
#[derive(Debug, Clone)]
pub struct Session {
    pub queries: u32,
    pub task_time_ms: u64,
    pub perceived_time_s: f64,
    pub aesthetics: [u8; 5],
}

/// Per-user sessions in `[BA, SC, PC]` order.
pub struct Participant {
    pub user_id: String,
    pub sessions: [Session; 3],
}

const LIKERT_13: [u8; 5] = [3, 3, 3, 2, 2];
const LIKERT_14: [u8; 5] = [3, 3, 3, 3, 2];
const LIKERT_15: [u8; 5] = [3, 3, 3, 3, 3];
const LIKERT_16: [u8; 5] = [4, 3, 3, 3, 3];
const LIKERT_17: [u8; 5] = [4, 4, 3, 3, 3];
const LIKERT_18: [u8; 5] = [4, 4, 4, 3, 3];

/// Thirteen participants whose group means match the published study tables:
/// six low-exploration users (`a1`..`a6`) and seven high-exploration users
/// (`e1`..`e7`).
pub fn study_participants() -> Vec<Participant> {
    let low_queries = [[6, 9, 10], [7, 9, 10], [7, 9, 10], [6, 9, 10], [7, 9, 10], [7, 8, 9]];
    let low_time_s = [
        [326, 566, 479],
        [327, 567, 479],
        [327, 567, 479],
        [327, 567, 479],
        [327, 567, 479],
        [326, 566, 480],
    ];
    let high_queries = [
        [8, 28, 18],
        [8, 28, 18],
        [8, 28, 18],
        [8, 28, 18],
        [8, 28, 18],
        [8, 29, 18],
        [8, 29, 17],
    ];
    let high_sc_ms = [
        1_300_000, 1_350_000, 1_400_000, 1_438_133, 1_480_000, 1_520_000, 1_578_798,
    ];
    let high_ba_perceived = [480.0, 480.0, 480.0, 480.0, 480.0, 450.0, 450.0];
    let high_sc_perceived = [850.0, 950.0, 900.0, 900.0, 900.0, 880.0, 920.0];

    // aesthetics totals per treatment over all 13 users: BA 176, SC 222, PC 205
    let ba_likert = |i: usize| if i < 7 { LIKERT_14 } else { LIKERT_13 };
    let sc_likert = |i: usize| if i == 0 { LIKERT_18 } else { LIKERT_17 };
    let pc_likert = |i: usize| if i < 10 { LIKERT_16 } else { LIKERT_15 };

    let mut out = Vec::new();
    for i in 0..6 {
        let q = low_queries[i];
        let t = low_time_s[i];
        out.push(Participant {
            user_id: format!("a{}", i + 1),
            sessions: [
                Session {
                    queries: q[0],
                    task_time_ms: t[0] * 1000,
                    perceived_time_s: 550.0,
                    aesthetics: ba_likert(i),
                },
                Session {
                    queries: q[1],
                    task_time_ms: t[1] * 1000,
                    perceived_time_s: 600.0,
                    aesthetics: sc_likert(i),
                },
                Session {
                    queries: q[2],
                    task_time_ms: t[2] * 1000,
                    perceived_time_s: 620.0,
                    aesthetics: pc_likert(i),
                },
            ],
        });
    }
    for i in 0..7 {
        let q = high_queries[i];
        let k = i + 6;
        out.push(Participant {
            user_id: format!("e{}", i + 1),
            sessions: [
                Session {
                    queries: q[0],
                    task_time_ms: 579_853,
                    perceived_time_s: high_ba_perceived[i],
                    aesthetics: ba_likert(k),
                },
                Session {
                    queries: q[1],
                    task_time_ms: high_sc_ms[i],
                    perceived_time_s: high_sc_perceived[i],
                    aesthetics: sc_likert(k),
                },
                Session {
                    queries: q[2],
                    task_time_ms: 973_283,
                    perceived_time_s: 900.0,
                    aesthetics: pc_likert(k),
                },
            ],
        });
    }
    out
}

/// Events for one complete task stream starting at `start_ms`.
pub fn session_events(user: &str, treatment: Treatment, task: &str, start_ms: u64, s: &Session) -> Vec<SessionEvent> {
    let ev = |ts_ms: u64, kind: EventKind| SessionEvent {
        ts_ms,
        user_id: user.to_string(),
        treatment,
        task_id: task.to_string(),
        kind,
    };
    let end = start_ms + s.task_time_ms;
    let step = s.task_time_ms / (u64::from(s.queries) + 2);
    let mut events = vec![ev(start_ms, EventKind::TaskStart)];
    for q in 0..u64::from(s.queries) {
        let ts = start_ms + step * (q + 1);
        events.push(ev(
            ts,
            EventKind::Query {
                text: format!("conflict {q}"),
            },
        ));
        if q == 0 && treatment != Treatment::BA {
            let rect = SentimentRect::new(11.0 / 3.0, 5.0, 1.0, 5.0).unwrap();
            events.push(ev(ts, EventKind::FilterChange { rect }));
            events.push(ev(ts, EventKind::ResultSelect { doc_id: "d1".into() }));
        }
    }
    events.push(ev(
        end,
        EventKind::Questionnaire(Questionnaire {
            aesthetics: s.aesthetics,
            perceived_time_s: s.perceived_time_s,
            summary: String::new(),
        }),
    ));
    events.push(ev(end, EventKind::TaskEnd));
    events
}

/// Full study log: every participant runs the three treatments in turn.
pub fn study_events() -> Vec<SessionEvent> {
    let mut events = Vec::new();
    for (u, p) in study_participants().iter().enumerate() {
        let mut start = 1_000_000 * u as u64;
        for (t, treatment) in Treatment::ALL.into_iter().enumerate() {
            let task = format!("task-{}", t + 1);
            events.extend(session_events(&p.user_id, treatment, &task, start, &p.sessions[t]));
            start += p.sessions[t].task_time_ms + 1;
        }
    }
    events
}

pub fn write_events(path: &Path, events: &[SessionEvent]) {
    let text: String = events.iter().map(encode_line).collect();
    std::fs::write(path, text).unwrap();
}

pub fn doc(id: &str, title: &str, text: &str, pos: f64, neg: f64, category: &str) -> Document {
    Document {
        doc_id: id.into(),
        title: title.into(),
        abstract_text: text.into(),
        positivity: pos,
        negativity: neg,
        category: category.into(),
    }
}

/// Small corpus about conflicts and painters.
pub fn sample_documents() -> Vec<Document> {
    vec![
        doc(
            "d0",
            "Battle of Hastings",
            "A decisive war battle in England",
            1.8,
            4.2,
            "MilitaryConflict",
        ),
        doc(
            "d1",
            "Treaty of Peace",
            "The war ended with a peace treaty",
            4.1,
            1.6,
            "MilitaryConflict",
        ),
        doc("d2", "Claude Monet", "A French painter of light", 4.6, 1.2, "Painter"),
        doc(
            "d3",
            "Guernica",
            "A painting about the horror of war",
            1.4,
            4.8,
            "Artwork",
        ),
        doc("d4", "Siege", "Long siege and famine", 1.2, 4.5, "MilitaryConflict"),
    ]
}

pub fn write_sample_corpus(path: &Path) {
    let mut out = Vec::new();
    sentiscope::corpus_io::write_documents(&mut out, &sample_documents()).unwrap();
    std::fs::write(path, out).unwrap();
}
