use serde::{Deserialize, Serialize};

use super::width_id;
use crate::session::{EventKind, SessionLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    /// Pointer displacement that counts as movement onset, px.
    pub move_threshold: f64,
    /// Drop the first target of every ID set.
    pub discard_first_target: bool,
    /// Amplitude assumed when an ID set has a single target, px.
    pub fallback_distance: f64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { move_threshold: 2.0, discard_first_target: false, fallback_distance: 400.0 }
    }
}

/// Per-target timing. Times are seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub block: u32,
    pub id: f64,
    pub target_index: u32,
    pub homing_t: f64,
    pub movement_t: f64,
    pub return_t: Option<f64>,
    pub errors: u32,
    /// Pointer movement started at or before the target appeared.
    pub overlap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionGap {
    pub block: u32,
    pub id: f64,
    pub target_index: u32,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Extraction {
    pub metrics: Vec<TrialMetrics>,
    pub gaps: Vec<ExtractionGap>,
}

struct TargetInfo {
    block: u32,
    id: f64,
}

/// Block and rounded ID for every `target_shown`, in order. Sets start at
/// `target_index == 0`; the ID comes from the spacing of the first two
/// targets and blocks split the sets evenly.
fn label_targets(log: &SessionLog, config: &ExtractConfig) -> Vec<TargetInfo> {
    let shown: Vec<(u32, f64, f64, f64)> = log
        .events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::TargetShown { target_index, cx, cy, w } => Some((target_index, cx, cy, w)),
            _ => None,
        })
        .collect();
    let mut set_starts: Vec<usize> = Vec::new();
    for (i, s) in shown.iter().enumerate() {
        if i == 0 || s.0 == 0 {
            set_starts.push(i);
        }
    }
    let sets = set_starts.len().max(1);
    let blocks = log.meta.block_count.max(1) as usize;
    let mut out = Vec::with_capacity(shown.len());
    for (s, &start) in set_starts.iter().enumerate() {
        let end = set_starts.get(s + 1).copied().unwrap_or(shown.len());
        let first = shown[start];
        let distance = match shown.get(start + 1).filter(|_| start + 1 < end) {
            Some(second) => (second.1 - first.1).hypot(second.2 - first.2),
            None => config.fallback_distance,
        };
        let id = width_id(first.3, distance).map(|id| (id * 1000.0).round() / 1000.0).unwrap_or(f64::NAN);
        let block = (s * blocks / sets) as u32;
        out.extend((start..end).map(|_| TargetInfo { block, id }));
    }
    out
}

struct Active {
    info_idx: usize,
    target_index: u32,
    shown_t: f64,
    cx: f64,
    cy: f64,
    w: f64,
    misses: u32,
}

pub fn extract_metrics(log: &SessionLog) -> Extraction {
    extract_metrics_with(log, &ExtractConfig::default())
}

/// Derives homing, movement and return times per target.
///
/// Movement onset is the first pointer sample more than `move_threshold`
/// from where the pointer was at the previous successful click. When onset
/// is at or before `target_shown` homing is 0 and the target is flagged as
/// overlapped; movement time then runs from `target_shown`.
pub fn extract_metrics_with(log: &SessionLog, config: &ExtractConfig) -> Extraction {
    let labels = label_targets(log, config);
    let mut out = Extraction::default();
    let mut reference: Option<(f64, f64)> = None;
    let mut onset: Option<f64> = None;
    let mut active: Option<Active> = None;
    let mut shown_count = 0usize;
    let mut pending_return: Option<(usize, f64)> = None;

    let gap = |out: &mut Extraction, a: &Active, reason: &'static str| {
        let l = &labels[a.info_idx];
        out.gaps.push(ExtractionGap { block: l.block, id: l.id, target_index: a.target_index, reason });
    };

    for e in &log.events {
        match e.kind {
            EventKind::PointerSample { x, y } => match reference {
                None => reference = Some((x, y)),
                Some((rx, ry)) => {
                    if onset.is_none() && (x - rx).hypot(y - ry) > config.move_threshold {
                        onset = Some(e.t);
                    }
                }
            },
            EventKind::TargetShown { target_index, cx, cy, w } => {
                if let Some(a) = active.take() {
                    gap(&mut out, &a, "no successful click");
                }
                pending_return = None;
                active = Some(Active { info_idx: shown_count, target_index, shown_t: e.t, cx, cy, w, misses: 0 });
                shown_count += 1;
            }
            EventKind::Click { x, y } => {
                let Some(a) = active.as_mut() else { continue };
                if (x - a.cx).hypot(y - a.cy) > a.w / 2.0 {
                    a.misses += 1;
                    continue;
                }
                let a = active.take().expect("checked above");
                let hit_t = e.t;
                let moved = onset.take();
                reference = Some((x, y));
                let Some(move_t) = moved else {
                    gap(&mut out, &a, "no pointer movement before hit");
                    continue;
                };
                if config.discard_first_target && a.target_index == 0 {
                    continue;
                }
                let overlap = move_t <= a.shown_t;
                let start = move_t.max(a.shown_t);
                let l = &labels[a.info_idx];
                out.metrics.push(TrialMetrics {
                    block: l.block,
                    id: l.id,
                    target_index: a.target_index,
                    homing_t: start - a.shown_t,
                    movement_t: hit_t - start,
                    return_t: None,
                    errors: a.misses,
                    overlap,
                });
                pending_return = Some((out.metrics.len() - 1, hit_t));
            }
            EventKind::CharTyped { .. } => {
                if let Some((i, hit_t)) = pending_return.take() {
                    out.metrics[i].return_t = Some(e.t - hit_t);
                }
            }
            _ => {}
        }
    }
    if let Some(a) = active {
        gap(&mut out, &a, "no successful click");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{Cohort, Device, InputEvent, Mode, SessionMeta};

    fn session(events: Vec<(f64, EventKind)>) -> SessionLog {
        let mut log = SessionLog::new(SessionMeta::new("p", Device::Mouse, Cohort::Expert, 1, 0));
        log.events = events.into_iter().map(|(t, k)| InputEvent::new(t, k)).collect();
        log
    }

    fn shown(i: u32, cx: f64) -> EventKind {
        EventKind::TargetShown { target_index: i, cx, cy: 300.0, w: 400.0 / 7.0 }
    }

    fn at(x: f64) -> EventKind {
        EventKind::PointerSample { x, y: 300.0 }
    }

    #[test]
    fn basic_timestamp_differences() {
        let log = session(vec![
            (0.0, at(100.0)),
            (0.0, shown(0, 500.0)),
            (0.0, EventKind::ModeSwitch { to: Mode::Pointing }),
            (0.2, at(101.0)),
            (0.3, at(110.0)),
            (0.6, at(400.0)),
            (1.0, at(500.0)),
            (1.0, EventKind::Click { x: 500.0, y: 300.0 }),
            (1.0, EventKind::WordShown { word: "tree".into() }),
            (1.0, EventKind::ModeSwitch { to: Mode::Typing }),
            (1.4, EventKind::CharTyped { ch: 't' }),
        ]);
        let m = &extract_metrics(&log).metrics[0];
        assert!((m.homing_t - 0.3).abs() < 1e-12);
        assert!((m.movement_t - 0.7).abs() < 1e-12);
        assert!((m.return_t.unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(m.errors, 0);
        assert!(!m.overlap);
        assert_eq!(m.id, 3.0);
    }

    #[test]
    fn early_movement_is_overlap() {
        let log = session(vec![
            (0.0, at(100.0)),
            (0.95, at(104.0)),
            (1.0, shown(0, 500.0)),
            (1.5, at(500.0)),
            (1.5, EventKind::Click { x: 500.0, y: 300.0 }),
        ]);
        let m = &extract_metrics(&log).metrics[0];
        assert_eq!(m.homing_t, 0.0);
        assert!(m.overlap);
        assert!((m.movement_t - 0.5).abs() < 1e-12);
        assert_eq!(m.return_t, None);
    }

    #[test]
    fn miss_then_hit() {
        let log = session(vec![
            (0.0, at(100.0)),
            (0.0, shown(0, 500.0)),
            (0.3, at(150.0)),
            (0.8, at(540.0)),
            (0.8, EventKind::Click { x: 540.0, y: 300.0 }),
            (1.2, at(500.0)),
            (1.2, EventKind::Click { x: 500.0, y: 300.0 }),
        ]);
        let m = &extract_metrics(&log).metrics[0];
        assert_eq!(m.errors, 1);
        assert!((m.movement_t - 0.9).abs() < 1e-12);
    }

    #[test]
    fn missing_phases_become_gaps() {
        let log = session(vec![
            (0.0, at(100.0)),
            (0.0, shown(0, 500.0)),
            (0.5, shown(1, 900.0)),
            (0.9, EventKind::Click { x: 900.0, y: 300.0 }),
        ]);
        let ex = extract_metrics(&log);
        assert!(ex.metrics.is_empty());
        let reasons: Vec<_> = ex.gaps.iter().map(|g| (g.target_index, g.reason)).collect();
        assert_eq!(reasons, vec![(0, "no successful click"), (1, "no pointer movement before hit")]);
        assert_eq!(ex.gaps[0].id, 3.0);
    }

    #[test]
    fn first_target_can_be_discarded() {
        let log = session(vec![
            (0.0, at(100.0)),
            (0.0, shown(0, 500.0)),
            (0.3, at(500.0)),
            (0.5, EventKind::Click { x: 500.0, y: 300.0 }),
        ]);
        let cfg = ExtractConfig { discard_first_target: true, ..Default::default() };
        assert!(extract_metrics_with(&log, &cfg).metrics.is_empty());
        assert_eq!(extract_metrics(&log).metrics.len(), 1);
    }
}
