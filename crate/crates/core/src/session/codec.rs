use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DiscomfortSurvey, EventKind, Hand, InputEvent, Key, Mode, SessionLog, SessionMeta, SurveyPhase};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing meta record on line 1")]
    MissingHeader,
    #[error("line {line}: meta record is only allowed on line 1")]
    UnexpectedHeader { line: usize },
    #[error("line {line}: {reason}")]
    Invalid { line: usize, reason: String },
    #[error("non-monotone timestamps: event {index} (line {line}) at t={t} precedes t={prev}")]
    NonMonotone { index: usize, line: usize, t: f64, prev: f64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One line of a session file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Meta {
        #[serde(default = "default_version")]
        version: u32,
        #[serde(flatten)]
        meta: SessionMeta,
    },
    Survey {
        phase: SurveyPhase,
        ratings: Vec<f64>,
    },
    PointerSample { t: f64, x: f64, y: f64 },
    KeyDown { t: f64, key: Key, hand: Hand },
    KeyUp { t: f64, key: Key },
    Click { t: f64, x: f64, y: f64 },
    ModeSwitch { t: f64, to: Mode },
    TargetShown { t: f64, target_index: u32, cx: f64, cy: f64, w: f64 },
    WordShown { t: f64, word: String },
    CharTyped { t: f64, char: char },
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

impl From<&InputEvent> for Record {
    fn from(e: &InputEvent) -> Self {
        let t = e.t;
        match &e.kind {
            EventKind::PointerSample { x, y } => Record::PointerSample { t, x: *x, y: *y },
            EventKind::KeyDown { key, hand } => Record::KeyDown { t, key: key.clone(), hand: *hand },
            EventKind::KeyUp { key } => Record::KeyUp { t, key: key.clone() },
            EventKind::Click { x, y } => Record::Click { t, x: *x, y: *y },
            EventKind::ModeSwitch { to } => Record::ModeSwitch { t, to: *to },
            EventKind::TargetShown { target_index, cx, cy, w } => Record::TargetShown {
                t,
                target_index: *target_index,
                cx: *cx,
                cy: *cy,
                w: *w,
            },
            EventKind::WordShown { word } => Record::WordShown { t, word: word.clone() },
            EventKind::CharTyped { ch } => Record::CharTyped { t, char: *ch },
        }
    }
}

impl Record {
    fn into_event(self) -> Option<InputEvent> {
        let (t, kind) = match self {
            Record::Meta { .. } | Record::Survey { .. } => return None,
            Record::PointerSample { t, x, y } => (t, EventKind::PointerSample { x, y }),
            Record::KeyDown { t, key, hand } => (t, EventKind::KeyDown { key, hand }),
            Record::KeyUp { t, key } => (t, EventKind::KeyUp { key }),
            Record::Click { t, x, y } => (t, EventKind::Click { x, y }),
            Record::ModeSwitch { t, to } => (t, EventKind::ModeSwitch { to }),
            Record::TargetShown { t, target_index, cx, cy, w } => {
                (t, EventKind::TargetShown { target_index, cx, cy, w })
            }
            Record::WordShown { t, word } => (t, EventKind::WordShown { word }),
            Record::CharTyped { t, char } => (t, EventKind::CharTyped { ch: char }),
        };
        Some(InputEvent { t, kind })
    }
}

fn to_line(record: &Record) -> String {
    // Records hold only finite numbers, strings and enums.
    serde_json::to_string(record).expect("session records always serialize")
}

/// Encodes one event as a single JSON line (no trailing newline).
pub fn encode_event(e: &InputEvent) -> String {
    to_line(&Record::from(e))
}

/// Decodes a single event line. Meta and survey records are rejected.
pub fn decode_event(line: &str) -> Result<InputEvent, DecodeError> {
    let record: Record = serde_json::from_str(line).map_err(|source| DecodeError::Parse { line: 1, source })?;
    record.into_event().ok_or_else(|| DecodeError::Invalid {
        line: 1,
        reason: "not an event record".into(),
    })
}

pub fn write_session<W: Write>(log: &SessionLog, mut out: W) -> io::Result<()> {
    let meta = Record::Meta { version: FORMAT_VERSION, meta: log.meta.clone() };
    writeln!(out, "{}", to_line(&meta))?;
    for e in &log.events {
        writeln!(out, "{}", encode_event(e))?;
    }
    for s in &log.surveys {
        let rec = Record::Survey { phase: s.phase, ratings: s.ratings.clone() };
        writeln!(out, "{}", to_line(&rec))?;
    }
    Ok(())
}

pub fn encode_session(log: &SessionLog) -> String {
    let mut buf = Vec::new();
    write_session(log, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

/// Decodes a session from its lines, enforcing the header rule, field
/// invariants and timestamp monotonicity. Blank lines are skipped.
pub fn decode_session<I, S>(lines: I) -> Result<SessionLog, DecodeError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut log: Option<SessionLog> = None;
    for (i, line) in lines.into_iter().enumerate() {
        let lineno = i + 1;
        let line = line.as_ref().trim();
        if line.is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(line).map_err(|source| DecodeError::Parse { line: lineno, source })?;
        let Some(log) = log.as_mut() else {
            let Record::Meta { version, meta } = record else {
                return Err(DecodeError::MissingHeader);
            };
            check_meta(version, &meta).map_err(|reason| DecodeError::Invalid { line: lineno, reason })?;
            log = Some(SessionLog::new(meta));
            continue;
        };
        match record {
            Record::Meta { .. } => return Err(DecodeError::UnexpectedHeader { line: lineno }),
            Record::Survey { phase, ratings } => {
                let survey = DiscomfortSurvey { phase, ratings };
                survey.check().map_err(|reason| DecodeError::Invalid { line: lineno, reason })?;
                log.surveys.push(survey);
            }
            other => {
                let event = other.into_event().expect("non-meta, non-survey record is an event");
                check_event(&event).map_err(|reason| DecodeError::Invalid { line: lineno, reason })?;
                if let Some(prev) = log.events.last() {
                    if event.t < prev.t {
                        return Err(DecodeError::NonMonotone {
                            index: log.events.len(),
                            line: lineno,
                            t: event.t,
                            prev: prev.t,
                        });
                    }
                }
                log.events.push(event);
            }
        }
    }
    log.ok_or(DecodeError::MissingHeader)
}

pub fn read_session<R: BufRead>(reader: R) -> Result<SessionLog, DecodeError> {
    let lines = reader.lines().collect::<Result<Vec<_>, _>>()?;
    decode_session(lines)
}

fn check_meta(version: u32, meta: &SessionMeta) -> Result<(), String> {
    if version != FORMAT_VERSION {
        return Err(format!("unsupported format version {version}"));
    }
    if meta.screen_w == 0 || meta.screen_h == 0 {
        return Err("screen dimensions must be positive".into());
    }
    if meta.block_count == 0 {
        return Err("block_count must be at least 1".into());
    }
    Ok(())
}

fn check_event(e: &InputEvent) -> Result<(), String> {
    if !e.t.is_finite() || e.t < 0.0 {
        return Err(format!("invalid timestamp {}", e.t));
    }
    if let EventKind::TargetShown { w, .. } = e.kind {
        if !(w > 0.0) {
            return Err(format!("target width must be positive, got {w}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{Cohort, Device};
    use proptest::prelude::*;

    fn meta() -> SessionMeta {
        SessionMeta::new("p01", Device::Mouse, Cohort::Novice, 1, 7)
    }

    #[test]
    fn pointer_sample_line_has_tag_and_fields() {
        let e = InputEvent::new(0.010, EventKind::PointerSample { x: 683.0, y: 384.0 });
        let line = encode_event(&e);
        assert!(!line.contains('\n'));
        assert!(line.contains("\"kind\":\"pointer_sample\""));
        assert!(line.contains("\"t\":0.01"));
        assert_eq!(decode_event(&line).unwrap(), e);
    }

    #[test]
    fn click_round_trips() {
        let e = InputEvent::new(1.250, EventKind::Click { x: 100.0, y: 200.0 });
        assert_eq!(decode_event(&encode_event(&e)).unwrap(), e);
    }

    #[test]
    fn target_width_keeps_precision() {
        let w = 400.0 / 7.0;
        let e = InputEvent::new(0.0, EventKind::TargetShown { target_index: 0, cx: 885.0, cy: 384.0, w });
        let line = encode_event(&e);
        assert!(line.contains("57.142857"), "{line}");
        assert_eq!(decode_event(&line).unwrap(), e);
    }

    #[test]
    fn header_only_session_has_no_events() {
        let text = encode_session(&SessionLog::new(meta()));
        let log = decode_session(text.lines()).unwrap();
        assert!(log.events.is_empty());
        assert_eq!(log.meta, meta());
    }

    #[test]
    fn out_of_order_timestamps_name_first_offender() {
        let mut log = SessionLog::new(meta());
        for t in [0.0, 0.5, 0.4, 0.3] {
            log.events.push(InputEvent::new(t, EventKind::PointerSample { x: 0.0, y: 0.0 }));
        }
        let text = encode_session(&log);
        match decode_session(text.lines()) {
            Err(DecodeError::NonMonotone { index, line, .. }) => {
                assert_eq!(index, 2);
                assert_eq!(line, 4);
            }
            other => panic!("expected NonMonotone, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut text = encode_session(&SessionLog::new(meta()));
        text.push_str("{\"kind\":\"click\",\"t\":1.0}\n");
        match decode_session(text.lines()) {
            Err(DecodeError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn events_before_meta_are_rejected() {
        let e = encode_event(&InputEvent::new(0.0, EventKind::CharTyped { ch: 'a' }));
        assert!(matches!(decode_session([e]), Err(DecodeError::MissingHeader)));
        assert!(matches!(decode_session(Vec::<String>::new()), Err(DecodeError::MissingHeader)));
    }

    #[test]
    fn bad_meta_and_surveys_are_rejected() {
        let mut m = meta();
        m.block_count = 0;
        let text = encode_session(&SessionLog::new(m));
        assert!(matches!(decode_session(text.lines()), Err(DecodeError::Invalid { line: 1, .. })));

        let mut text = encode_session(&SessionLog::new(meta()));
        text.push_str("{\"kind\":\"survey\",\"phase\":\"baseline\",\"ratings\":[1,2,3]}\n");
        assert!(matches!(decode_session(text.lines()), Err(DecodeError::Invalid { line: 2, .. })));
    }

    #[test]
    fn surveys_round_trip() {
        let mut log = SessionLog::new(meta());
        log.events.push(InputEvent::new(0.0, EventKind::ModeSwitch { to: Mode::Pointing }));
        log.surveys.push(DiscomfortSurvey { phase: SurveyPhase::Baseline, ratings: vec![0.5; 6] });
        log.surveys.push(DiscomfortSurvey {
            phase: SurveyPhase::PostDevice,
            ratings: vec![1.0, 0.0, 2.0, 0.0, 1.0, 2.0],
        });
        let back = decode_session(encode_session(&log).lines()).unwrap();
        assert_eq!(back, log);
    }

    fn arb_key() -> impl Strategy<Value = Key> {
        prop_oneof![
            Just(Key::Tab),
            Just(Key::Space),
            Just(Key::Backspace),
            proptest::char::range('a', 'z').prop_map(Key::Char),
            "[a-z]{2,8}".prop_filter("reserved names", |s| !matches!(s.as_str(), "tab" | "space" | "backspace"))
                .prop_map(Key::Named),
        ]
    }

    fn arb_kind() -> impl Strategy<Value = EventKind> {
        let coord = -1e4f64..1e4;
        prop_oneof![
            (coord.clone(), coord.clone()).prop_map(|(x, y)| EventKind::PointerSample { x, y }),
            (arb_key(), prop_oneof![Just(Hand::Tracked), Just(Hand::Untracked)])
                .prop_map(|(key, hand)| EventKind::KeyDown { key, hand }),
            arb_key().prop_map(|key| EventKind::KeyUp { key }),
            (coord.clone(), coord.clone()).prop_map(|(x, y)| EventKind::Click { x, y }),
            prop_oneof![Just(Mode::Typing), Just(Mode::Pointing)].prop_map(|to| EventKind::ModeSwitch { to }),
            (0u32..32, coord.clone(), coord, 1e-3f64..1e3)
                .prop_map(|(target_index, cx, cy, w)| EventKind::TargetShown { target_index, cx, cy, w }),
            "[a-z]{0,12}".prop_map(|word| EventKind::WordShown { word }),
            any::<char>().prop_map(|ch| EventKind::CharTyped { ch }),
        ]
    }

    proptest! {
        #[test]
        fn encode_decode_is_identity(t in 0.0f64..1e5, kind in arb_kind()) {
            let e = InputEvent::new(t, kind);
            prop_assert_eq!(decode_event(&encode_event(&e)).unwrap(), e);
        }
    }
}
