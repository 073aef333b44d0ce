use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use super::{PipelineError, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Touch {
    On,
    Off,
}

/// Two-threshold touch detector over signed plane distances (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchDetector {
    t_on: f64,
    t_off: f64,
    state: Touch,
}

impl TouchDetector {
    pub fn new(t_on: f64, t_off: f64) -> Result<Self, PipelineError> {
        if !(t_on < t_off) {
            return Err(PipelineError::InvalidConfig(format!(
                "touch thresholds need t_on < t_off, got {t_on} and {t_off}"
            )));
        }
        Ok(Self { t_on, t_off, state: Touch::Off })
    }

    pub fn state(&self) -> Touch {
        self.state
    }

    /// Feeds one distance; returns the new state on a transition.
    pub fn step(&mut self, dist: f64) -> Option<Touch> {
        let next = match self.state {
            Touch::Off if dist <= self.t_on => Touch::On,
            Touch::On if dist >= self.t_off => Touch::Off,
            s => s,
        };
        (next != self.state).then(|| {
            self.state = next;
            next
        })
    }
}

/// Runs a detector (starting off) over a stream and returns the
/// `(index, new_state)` transitions.
pub fn detect_touch(dists: &[f64], t_on: f64, t_off: f64) -> Result<Vec<(usize, Touch)>, PipelineError> {
    let mut det = TouchDetector::new(t_on, t_off)?;
    Ok(dists
        .iter()
        .enumerate()
        .filter_map(|(i, &d)| det.step(d).map(|s| (i, s)))
        .collect())
}

/// Pointer displacement for one relative-mode step, after clamping the
/// result to `screen`. `None` while the finger is lifted (clutching).
pub fn relative_step(
    pointer: Point2<f64>,
    delta: Vector2<f64>,
    gain: f64,
    touch: Touch,
    screen: &Rect,
) -> Option<Vector2<f64>> {
    match touch {
        Touch::Off => None,
        Touch::On => Some(screen.clamp(pointer + delta * gain) - pointer),
    }
}
