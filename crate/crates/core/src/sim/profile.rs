use serde::{Deserialize, Serialize};

use super::SimError;
use crate::session::{Cohort, Device};

/// Which timing a learning curve scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingPhase {
    Homing,
    Movement,
    Return,
}

/// Power-law practice effect. Block `n` (1-based) of `N` is scaled by
/// `max(floor, n^-exponent) / max(floor, N^-exponent)`, so the last block
/// runs at the configured medians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Learning {
    pub exponent: f64,
    #[serde(default)]
    pub floor: f64,
    #[serde(default)]
    pub applies_to: Vec<TimingPhase>,
}

impl Learning {
    pub fn none() -> Self {
        Self { exponent: 0.0, floor: 0.0, applies_to: Vec::new() }
    }

    pub fn multiplier(&self, phase: TimingPhase, block: u32, blocks: u32) -> f64 {
        if self.exponent == 0.0 || !self.applies_to.contains(&phase) {
            return 1.0;
        }
        let at = |n: u32| (n.max(1) as f64).powf(-self.exponent).max(self.floor);
        at(block + 1) / at(blocks)
    }
}

/// Miss probability per target, linear in the index of difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissModel {
    pub intercept: f64,
    pub slope: f64,
}

impl MissModel {
    pub fn at(&self, id: f64) -> f64 {
        (self.intercept + self.slope * id).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorProfile {
    pub device: Device,
    pub cohort: Cohort,
    /// Median homing time, s.
    pub homing_median: f64,
    /// Lognormal sigma of homing time.
    pub homing_spread: f64,
    /// Movement median is `fitts_a + fitts_b * ID`, s.
    pub fitts_a: f64,
    pub fitts_b: f64,
    /// Approximate standard deviation of movement time around its median, s.
    pub movement_noise_sd: f64,
    pub return_median: f64,
    pub return_spread: f64,
    pub miss_prob: MissModel,
    /// Probability that the pointer starts moving no later than the target
    /// appears.
    pub overlap_prob: f64,
    pub learning: Learning,
    /// Median time between keystrokes while typing a word, s.
    pub inter_key_interval: f64,
    /// Pointer sampling rate, Hz.
    pub sample_rate: f64,
    /// Lognormal sigma of a per-session speed factor applied to all times.
    #[serde(default)]
    pub participant_spread: f64,
    /// Median post-minus-baseline discomfort score.
    pub discomfort_target: f64,
    #[serde(default = "default_discomfort_spread")]
    pub discomfort_spread: f64,
}

fn default_discomfort_spread() -> f64 {
    0.35
}

impl OperatorProfile {
    pub fn check(&self) -> Result<(), SimError> {
        let positive = [
            ("homing_median", self.homing_median),
            ("fitts_a", self.fitts_a),
            ("return_median", self.return_median),
            ("inter_key_interval", self.inter_key_interval),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Profile(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("homing_spread", self.homing_spread),
            ("fitts_b", self.fitts_b),
            ("movement_noise_sd", self.movement_noise_sd),
            ("return_spread", self.return_spread),
            ("participant_spread", self.participant_spread),
            ("discomfort_spread", self.discomfort_spread),
            ("learning.exponent", self.learning.exponent),
            ("learning.floor", self.learning.floor),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimError::Profile(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.overlap_prob) {
            return Err(SimError::Profile(format!("overlap_prob must be in [0,1], got {}", self.overlap_prob)));
        }
        for id in [1.0, 8.0] {
            let p = self.miss_prob.intercept + self.miss_prob.slope * id;
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Profile(format!("miss probability at ID {id} is {p}, outside [0,1]")));
            }
        }
        Ok(())
    }

    pub fn movement_median(&self, id: f64) -> f64 {
        self.fitts_a + self.fitts_b * id
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.device, self.cohort)
    }
}

const PRESETS: [(&str, &str); 6] = [
    ("fingers_novice", include_str!("../../profiles/fingers_novice.json")),
    ("fingers_expert", include_str!("../../profiles/fingers_expert.json")),
    ("trackpad_novice", include_str!("../../profiles/trackpad_novice.json")),
    ("trackpad_expert", include_str!("../../profiles/trackpad_expert.json")),
    ("mouse_novice", include_str!("../../profiles/mouse_novice.json")),
    ("mouse_expert", include_str!("../../profiles/mouse_expert.json")),
];

/// Shipped profile for a device and cohort.
pub fn preset(device: Device, cohort: Cohort) -> Result<OperatorProfile, SimError> {
    preset_named(&format!("{device}_{cohort}"))
}

/// Shipped profile by file stem, e.g. `"mouse_expert"`.
pub fn preset_named(name: &str) -> Result<OperatorProfile, SimError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| SimError::UnknownPreset(name.to_string()))?;
    let profile: OperatorProfile =
        serde_json::from_str(text).map_err(|e| SimError::Profile(format!("preset {name}: {e}")))?;
    profile.check()?;
    Ok(profile)
}
