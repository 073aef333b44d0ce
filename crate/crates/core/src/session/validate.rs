use std::fmt;

use serde::Serialize;

use super::{EventKind, Hand, Key, Mode, SessionLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    NonMonotoneTimestamps,
    InvalidTimestamp,
    ClickInTypingMode,
    CharTypedInPointingMode,
    NonpositiveTargetWidth,
    RedundantModeSwitch,
    ClickWithoutUntrackedSpacebar,
    ModeSwitchWithoutTab,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::NonMonotoneTimestamps => "non_monotone_timestamps",
            Rule::InvalidTimestamp => "invalid_timestamp",
            Rule::ClickInTypingMode => "click_in_typing_mode",
            Rule::CharTypedInPointingMode => "char_typed_in_pointing_mode",
            Rule::NonpositiveTargetWidth => "nonpositive_target_width",
            Rule::RedundantModeSwitch => "redundant_mode_switch",
            Rule::ClickWithoutUntrackedSpacebar => "click_without_untracked_spacebar",
            Rule::ModeSwitchWithoutTab => "mode_switch_without_tab",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    /// Position in `SessionLog::events`.
    pub index: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {}: {}: {}", self.index, self.rule, self.message)
    }
}

/// Checks ordering and mode invariants. Sessions start in typing mode.
///
/// For the Fingers device every click must follow a spacebar press by the
/// untracked hand and every mode switch must follow a tab press; other
/// devices switch modes through the experiment software.
pub fn validate_session(log: &SessionLog) -> Vec<Violation> {
    let keyboard_modes = log.meta.device.uses_keyboard_modes();
    let mut out = Vec::new();
    let mut mode = Mode::Typing;
    let mut prev_t: Option<f64> = None;
    let mut pending_space = false;
    let mut pending_tab = false;

    let mut flag = |rule: Rule, index: usize, message: String| out.push(Violation { rule, index, message });

    for (i, e) in log.events.iter().enumerate() {
        if !e.t.is_finite() || e.t < 0.0 {
            flag(Rule::InvalidTimestamp, i, format!("t={}", e.t));
        } else {
            if let Some(p) = prev_t {
                if e.t < p {
                    flag(
                        Rule::NonMonotoneTimestamps,
                        i,
                        format!("non-monotone timestamps: t={} after t={}", e.t, p),
                    );
                }
            }
            prev_t = Some(e.t);
        }

        match &e.kind {
            EventKind::KeyDown { key: Key::Tab, .. } => pending_tab = true,
            EventKind::KeyDown { key: Key::Space, hand } => {
                pending_space = mode == Mode::Pointing && *hand == Hand::Untracked;
            }
            EventKind::Click { x, y } => {
                if mode == Mode::Typing {
                    flag(Rule::ClickInTypingMode, i, format!("click at ({x}, {y})"));
                }
                if keyboard_modes && !pending_space {
                    flag(
                        Rule::ClickWithoutUntrackedSpacebar,
                        i,
                        "no preceding spacebar press by the untracked hand".into(),
                    );
                }
                pending_space = false;
            }
            EventKind::ModeSwitch { to } => {
                if *to == mode {
                    flag(Rule::RedundantModeSwitch, i, format!("already in {to:?} mode"));
                }
                if keyboard_modes && !pending_tab {
                    flag(Rule::ModeSwitchWithoutTab, i, "no preceding tab press".into());
                }
                pending_tab = false;
                mode = *to;
            }
            EventKind::CharTyped { ch } => {
                if mode == Mode::Pointing {
                    flag(Rule::CharTypedInPointingMode, i, format!("char {ch:?}"));
                }
            }
            EventKind::TargetShown { w, target_index, .. } if !(*w > 0.0) => {
                flag(Rule::NonpositiveTargetWidth, i, format!("target {target_index} has w={w}"));
            }
            _ => {}
        }
    }
    out
}
