//! Session data model shared by every other module.
//!
//! A session is one participant operating one device for a full run of the
//! experiment. It is stored as a `.ksi.jsonl` file: a meta record on line 1,
//! then one record per line (events and discomfort surveys). See
//! `docs/log-format.md` for the wire schema.

mod codec;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use codec::{
    decode_event, decode_session, encode_event, encode_session, read_session, write_session,
    DecodeError, FORMAT_VERSION,
};
pub use validate::{validate_session, Rule, Violation};

/// Default screen geometry of the laptop used in the original study.
pub const SCREEN_W: u32 = 1366;
pub const SCREEN_H: u32 = 768;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Device {
    Fingers,
    Trackpad,
    Mouse,
}

impl Device {
    pub const ALL: [Device; 3] = [Device::Fingers, Device::Trackpad, Device::Mouse];

    pub fn as_str(self) -> &'static str {
        match self {
            Device::Fingers => "fingers",
            Device::Trackpad => "trackpad",
            Device::Mouse => "mouse",
        }
    }

    /// Whether mode switching and clicking go through the keyboard (tab and
    /// spacebar) rather than the experiment software and a physical button.
    pub fn uses_keyboard_modes(self) -> bool {
        matches!(self, Device::Fingers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cohort {
    Novice,
    Expert,
}

impl Cohort {
    pub const ALL: [Cohort; 2] = [Cohort::Novice, Cohort::Expert];

    pub fn as_str(self) -> &'static str {
        match self {
            Cohort::Novice => "novice",
            Cohort::Expert => "expert",
        }
    }
}

macro_rules! impl_str_enum {
    ($ty:ty, $what:literal, [$($variant:path),+]) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $(
                    if s.eq_ignore_ascii_case($variant.as_str()) {
                        return Ok($variant);
                    }
                )+
                Err(format!("unknown {} '{}'", $what, s))
            }
        }
    };
}

impl_str_enum!(Device, "device", [Device::Fingers, Device::Trackpad, Device::Mouse]);
impl_str_enum!(Cohort, "cohort", [Cohort::Novice, Cohort::Expert]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Typing,
    Pointing,
}

impl Mode {
    pub fn toggled(self) -> Mode {
        match self {
            Mode::Typing => Mode::Pointing,
            Mode::Pointing => Mode::Typing,
        }
    }
}

/// Which hand pressed a key. The tracked hand wears the marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    Tracked,
    Untracked,
}

/// Keyboard key identifier. Serialized as a lowercase name (`"tab"`,
/// `"space"`, `"backspace"`) or as the single character it produces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Key {
    Tab,
    Space,
    Backspace,
    Char(char),
    Named(String),
}

impl Key {
    /// Character produced by this key in typing mode, if any.
    pub fn typed_char(&self) -> Option<char> {
        match self {
            Key::Space => Some(' '),
            Key::Backspace => Some(BACKSPACE),
            Key::Char(c) => Some(*c),
            Key::Tab | Key::Named(_) => None,
        }
    }
}

/// `char_typed` value recorded for a backspace keystroke.
pub const BACKSPACE: char = '\u{8}';

impl From<Key> for String {
    fn from(k: Key) -> String {
        match k {
            Key::Tab => "tab".into(),
            Key::Space => "space".into(),
            Key::Backspace => "backspace".into(),
            Key::Char(c) => c.to_string(),
            Key::Named(s) => s,
        }
    }
}

impl TryFrom<String> for Key {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (None, _) => Err("empty key name".into()),
            (Some(c), None) if c != ' ' => Ok(Key::Char(c)),
            _ => Ok(match s.as_str() {
                "tab" => Key::Tab,
                "space" | " " => Key::Space,
                "backspace" => Key::Backspace,
                _ => Key::Named(s),
            }),
        }
    }
}

/// A timestamped event. `t` is seconds since session start.
#[derive(Debug, Clone, PartialEq)]
pub struct InputEvent {
    pub t: f64,
    pub kind: EventKind,
}

impl InputEvent {
    pub fn new(t: f64, kind: EventKind) -> Self {
        Self { t, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    PointerSample { x: f64, y: f64 },
    KeyDown { key: Key, hand: Hand },
    KeyUp { key: Key },
    Click { x: f64, y: f64 },
    ModeSwitch { to: Mode },
    TargetShown { target_index: u32, cx: f64, cy: f64, w: f64 },
    WordShown { word: String },
    CharTyped { ch: char },
}

impl EventKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EventKind::PointerSample { .. } => "pointer_sample",
            EventKind::KeyDown { .. } => "key_down",
            EventKind::KeyUp { .. } => "key_up",
            EventKind::Click { .. } => "click",
            EventKind::ModeSwitch { .. } => "mode_switch",
            EventKind::TargetShown { .. } => "target_shown",
            EventKind::WordShown { .. } => "word_shown",
            EventKind::CharTyped { .. } => "char_typed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub participant_id: String,
    pub device: Device,
    pub cohort: Cohort,
    pub block_count: u32,
    #[serde(default = "default_screen_w")]
    pub screen_w: u32,
    #[serde(default = "default_screen_h")]
    pub screen_h: u32,
    #[serde(default)]
    pub seed: u64,
}

fn default_screen_w() -> u32 {
    SCREEN_W
}

fn default_screen_h() -> u32 {
    SCREEN_H
}

impl SessionMeta {
    pub fn new(participant_id: impl Into<String>, device: Device, cohort: Cohort, block_count: u32, seed: u64) -> Self {
        Self {
            participant_id: participant_id.into(),
            device,
            cohort,
            block_count,
            screen_w: SCREEN_W,
            screen_h: SCREEN_H,
            seed,
        }
    }
}

pub const BODY_PARTS: [&str; 6] = ["hand", "wrist", "forearm", "elbow", "upper_arm", "shoulder"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyPhase {
    Baseline,
    PostDevice,
}

/// Perceived-discomfort ratings, 0 (nothing at all) to 10 (extremely strong),
/// in [`BODY_PARTS`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscomfortSurvey {
    pub phase: SurveyPhase,
    pub ratings: Vec<f64>,
}

impl DiscomfortSurvey {
    pub fn check(&self) -> Result<(), String> {
        if self.ratings.len() != BODY_PARTS.len() {
            return Err(format!("expected {} ratings, got {}", BODY_PARTS.len(), self.ratings.len()));
        }
        if let Some((i, r)) = self
            .ratings
            .iter()
            .enumerate()
            .find(|(_, r)| !(0.0..=10.0).contains(*r))
        {
            return Err(format!("rating for {} out of [0,10]: {}", BODY_PARTS[i], r));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.ratings.iter().sum::<f64>() / self.ratings.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub meta: SessionMeta,
    pub events: Vec<InputEvent>,
    pub surveys: Vec<DiscomfortSurvey>,
}

impl SessionLog {
    pub fn new(meta: SessionMeta) -> Self {
        Self { meta, events: Vec::new(), surveys: Vec::new() }
    }

    pub fn survey(&self, phase: SurveyPhase) -> Option<&DiscomfortSurvey> {
        self.surveys.iter().find(|s| s.phase == phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_names_round_trip() {
        for k in [Key::Tab, Key::Space, Key::Backspace, Key::Char('a'), Key::Named("alt".into())] {
            let s: String = k.clone().into();
            assert_eq!(Key::try_from(s).unwrap(), k);
        }
        assert!(Key::try_from(String::new()).is_err());
    }

    #[test]
    fn survey_checks_count_and_range() {
        let ok = DiscomfortSurvey { phase: SurveyPhase::Baseline, ratings: vec![0.0; 6] };
        assert!(ok.check().is_ok());
        let short = DiscomfortSurvey { phase: SurveyPhase::Baseline, ratings: vec![0.0; 5] };
        assert!(short.check().is_err());
        let high = DiscomfortSurvey { phase: SurveyPhase::Baseline, ratings: vec![0.0, 0.0, 11.0, 0.0, 0.0, 0.0] };
        assert!(high.check().unwrap_err().contains("forearm"));
    }

    #[test]
    fn device_parses_case_insensitively() {
        assert_eq!("Mouse".parse::<Device>().unwrap(), Device::Mouse);
        assert!("joystick".parse::<Device>().is_err());
    }
}
