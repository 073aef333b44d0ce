use std::fmt;

use serde::Serialize;

use super::{ExperimentError, TargetSpec, TrialPlan};
use crate::session::{EventKind, InputEvent, BACKSPACE};

/// Geometry tolerance when matching `target_shown` against the plan, px.
const MATCH_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitTarget,
    AwaitClick,
    AwaitWord,
    Typing,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::AwaitTarget => "waiting for target",
            Phase::AwaitClick => "waiting for a hit",
            Phase::AwaitWord => "waiting for word prompt",
            Phase::Typing => "typing word",
        })
    }
}

/// What happened to one planned target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetOutcome {
    pub block: u32,
    pub id: f64,
    pub target_index: u32,
    pub shown_t: f64,
    pub hit_t: f64,
    pub misses: u32,
    /// When the following word was completed; `None` for the last target
    /// of an ID set.
    pub word_done_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRun {
    pub outcomes: Vec<TargetOutcome>,
}

impl TrialRun {
    pub fn total_misses(&self) -> u32 {
        self.outcomes.iter().map(|o| o.misses).sum()
    }
}

struct Step<'a> {
    block: u32,
    id: f64,
    seq: u32,
    target: &'a TargetSpec,
    word: Option<&'a str>,
}

/// Replays `events` against `plan`: each target must be shown, then hit
/// (misses are counted and the target stays), then the next word must be
/// shown and typed exactly (backspace allowed) before the next target.
pub fn run_trial(plan: &TrialPlan, events: &[InputEvent]) -> Result<TrialRun, ExperimentError> {
    let steps: Vec<Step> = plan
        .sets()
        .flat_map(|(block, set)| {
            set.targets.iter().enumerate().map(move |(i, target)| Step {
                block,
                id: set.id,
                seq: i as u32,
                target,
                word: set.words.get(i).map(String::as_str).filter(|_| i + 1 < set.targets.len()),
            })
        })
        .collect();

    let mut outcomes: Vec<TargetOutcome> = Vec::with_capacity(steps.len());
    let mut k = 0;
    let mut phase = Phase::AwaitTarget;
    let mut typed = String::new();

    for (idx, e) in events.iter().enumerate() {
        let Some(step) = steps.get(k) else { break };
        let mismatch = |what: String| ExperimentError::PlanMismatch { event_index: idx, message: what };
        match (&e.kind, phase) {
            (EventKind::TargetShown { target_index, cx, cy, w }, Phase::AwaitTarget) => {
                let t = step.target;
                let same = *target_index == step.seq
                    && (cx - t.cx).abs() <= MATCH_TOL
                    && (cy - t.cy).abs() <= MATCH_TOL
                    && (w - t.w).abs() <= MATCH_TOL;
                if !same {
                    return Err(mismatch(format!(
                        "target_shown {target_index} at ({cx}, {cy}) w={w} does not match planned target {} at ({}, {}) w={}",
                        step.seq, t.cx, t.cy, t.w
                    )));
                }
                outcomes.push(TargetOutcome {
                    block: step.block,
                    id: step.id,
                    target_index: step.seq,
                    shown_t: e.t,
                    hit_t: f64::NAN,
                    misses: 0,
                    word_done_t: None,
                });
                phase = Phase::AwaitClick;
            }
            (EventKind::TargetShown { target_index, .. }, _) => {
                return Err(mismatch(format!("target_shown {target_index} while {phase}")));
            }
            (EventKind::Click { x, y }, Phase::AwaitClick) => {
                let out = outcomes.last_mut().expect("a target is active");
                if step.target.contains(*x, *y) {
                    out.hit_t = e.t;
                    if step.word.is_some() {
                        phase = Phase::AwaitWord;
                    } else {
                        k += 1;
                        phase = Phase::AwaitTarget;
                    }
                } else {
                    out.misses += 1;
                }
            }
            (EventKind::WordShown { word }, Phase::AwaitWord) => {
                if Some(word.as_str()) != step.word {
                    return Err(mismatch(format!("word_shown {word:?}, planned {:?}", step.word)));
                }
                typed.clear();
                phase = Phase::Typing;
            }
            (EventKind::WordShown { word }, _) => {
                return Err(mismatch(format!("word_shown {word:?} while {phase}")));
            }
            (EventKind::CharTyped { ch }, Phase::Typing) => {
                if *ch == BACKSPACE {
                    typed.pop();
                } else {
                    typed.push(*ch);
                }
                if Some(typed.as_str()) == step.word {
                    outcomes.last_mut().expect("a target is active").word_done_t = Some(e.t);
                    k += 1;
                    phase = Phase::AwaitTarget;
                }
            }
            _ => {}
        }
    }

    if let Some(step) = steps.get(k) {
        return Err(ExperimentError::IncompleteTrial {
            block: step.block,
            id: step.id,
            target_index: step.seq,
            phase,
            completed: k,
            planned: steps.len(),
        });
    }
    Ok(TrialRun { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{make_plan, PlanSpec};
    use crate::session::{Device, Mode};

    fn one_set_plan() -> TrialPlan {
        let spec = PlanSpec { ids: vec![3.0], blocks: 1, ..Default::default() };
        make_plan(Device::Mouse, &spec, 1).unwrap()
    }

    /// Clean stream for the plan, with optional extra clicks before each hit.
    fn script(plan: &TrialPlan, miss_at: Option<usize>, offset: f64) -> Vec<InputEvent> {
        let set = &plan.blocks[0].sets[0];
        let mut ev = Vec::new();
        let mut t = 0.0;
        let mut push = |k: EventKind, dt: f64| {
            t += dt;
            ev.push(InputEvent::new(t, k));
        };
        for (i, tg) in set.targets.iter().enumerate() {
            push(EventKind::TargetShown { target_index: i as u32, cx: tg.cx, cy: tg.cy, w: tg.w }, 0.1);
            push(EventKind::ModeSwitch { to: Mode::Pointing }, 0.0);
            if miss_at == Some(i) {
                push(EventKind::Click { x: tg.cx + tg.w / 2.0 + offset, y: tg.cy }, 0.5);
            }
            push(EventKind::Click { x: tg.cx, y: tg.cy }, 0.5);
            if let Some(word) = set.words.get(i).filter(|_| i + 1 < set.targets.len()) {
                push(EventKind::WordShown { word: word.clone() }, 0.0);
                push(EventKind::ModeSwitch { to: Mode::Typing }, 0.0);
                for ch in word.chars() {
                    push(EventKind::CharTyped { ch }, 0.1);
                }
            }
        }
        ev
    }

    #[test]
    fn clean_run_completes() {
        let plan = one_set_plan();
        let run = run_trial(&plan, &script(&plan, None, 0.0)).unwrap();
        assert_eq!(run.outcomes.len(), 11);
        assert_eq!(run.total_misses(), 0);
        assert_eq!(run.outcomes.iter().filter(|o| o.word_done_t.is_some()).count(), 10);
    }

    #[test]
    fn click_just_outside_counts_as_miss() {
        let plan = one_set_plan();
        let run = run_trial(&plan, &script(&plan, Some(4), 1.0)).unwrap();
        assert_eq!(run.outcomes[4].misses, 1);
        assert_eq!(run.total_misses(), 1);
        // On the boundary is a hit; the following click is stray.
        let on_edge = run_trial(&plan, &script(&plan, Some(4), 0.0)).unwrap();
        assert_eq!(on_edge.outcomes[4].misses, 0);
    }

    #[test]
    fn truncated_stream_reports_progress() {
        let plan = one_set_plan();
        let mut ev = script(&plan, None, 0.0);
        ev.truncate(ev.len() - 3);
        match run_trial(&plan, &ev) {
            Err(ExperimentError::IncompleteTrial { target_index, phase, completed, planned, .. }) => {
                assert_eq!(target_index, 10);
                assert_eq!(phase, Phase::AwaitTarget);
                assert_eq!((completed, planned), (10, 11));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn backspace_corrections_are_allowed() {
        let plan = one_set_plan();
        let mut ev = script(&plan, None, 0.0);
        let first_char = ev.iter().position(|e| matches!(e.kind, EventKind::CharTyped { .. })).unwrap();
        let t = ev[first_char].t;
        ev.insert(first_char, InputEvent::new(t, EventKind::CharTyped { ch: BACKSPACE }));
        ev.insert(first_char, InputEvent::new(t, EventKind::CharTyped { ch: 'z' }));
        assert!(run_trial(&plan, &ev).is_ok());
    }

    #[test]
    fn wrong_word_is_a_mismatch() {
        let plan = one_set_plan();
        let mut ev = script(&plan, None, 0.0);
        let i = ev.iter().position(|e| matches!(e.kind, EventKind::WordShown { .. })).unwrap();
        ev[i].kind = EventKind::WordShown { word: "zzzz".into() };
        assert!(matches!(run_trial(&plan, &ev), Err(ExperimentError::PlanMismatch { .. })));
    }
}
