//! Sensor-to-pointer pipeline for the keyboard-surface device.
//!
//! Marker positions from two IR cameras are turned into pointer samples
//! either by mapping the left camera image straight onto the screen
//! (absolute) or by triangulating the fingertip, testing it against the
//! calibrated keyboard plane and moving the pointer like a touchpad
//! (relative). Key presses drive the typing/pointing mode machine.

mod calibration;
mod fsm;
mod geometry;
mod touch;

use std::io::BufRead;

use nalgebra::{Point2, Point3, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{EventKind, Hand, InputEvent, Key, Mode};

pub use calibration::{calibrate_demo, synthetic_cloud, CalibrationReport, SceneConfig, TraceSample};
pub use fsm::{mode_fsm_step, ModeState};
pub use geometry::{
    absolute_map, fit_touch_plane, plane_distance, triangulate, Rect, StereoRig, TouchPlane, SENSOR_H, SENSOR_W,
};
pub use touch::{detect_touch, relative_step, Touch, TouchDetector};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("point ({x}, {y}) lies outside the sensing area")]
    OutOfRange { x: f64, y: f64 },
    #[error("no depth: disparity {disparity} px is not positive")]
    NoDepth { disparity: f64 },
    #[error("tracking gap: marker missing in {0} camera")]
    TrackingGap(&'static str),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error("input record {index}: t={t} precedes t={prev}")]
    NonMonotone { index: usize, t: f64, prev: f64 },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One camera sample. Marker coordinates are image pixels; `None` when the
/// camera lost the marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub t: f64,
    pub left: Option<[f64; 2]>,
    pub right: Option<[f64; 2]>,
}

impl SensorFrame {
    pub fn stereo(&self) -> Result<(Point2<f64>, Point2<f64>), PipelineError> {
        let l = self.left.ok_or(PipelineError::TrackingGap("left"))?;
        let r = self.right.ok_or(PipelineError::TrackingGap("right"))?;
        Ok((Point2::from(l), Point2::from(r)))
    }
}

/// A line of pipeline input: camera frames interleaved with key events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PipelineInput {
    SensorFrame(SensorFrame),
    KeyDown { t: f64, key: Key, hand: Hand },
    KeyUp { t: f64, key: Key },
}

impl PipelineInput {
    pub fn t(&self) -> f64 {
        match self {
            PipelineInput::SensorFrame(f) => f.t,
            PipelineInput::KeyDown { t, .. } | PipelineInput::KeyUp { t, .. } => *t,
        }
    }
}

pub fn read_pipeline_input<R: BufRead>(reader: R) -> Result<Vec<PipelineInput>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| PipelineError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mapping: Mapping,
    /// Screen pixels per mm of finger travel in relative mode.
    pub gain: f64,
    /// Touch-on threshold, mm above the plane.
    pub t_on: f64,
    pub t_off: f64,
    pub rig: StereoRig,
    pub sensor: Rect,
    pub screen: Rect,
    /// Calibrated keyboard plane; required for relative mapping.
    pub plane: Option<TouchPlane>,
    pub initial_mode: Mode,
    /// Frame spacing above which a sampling gap is reported, s.
    pub max_frame_gap: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mapping: Mapping::Absolute,
            gain: 1.9,
            t_on: 2.0,
            t_off: 4.0,
            rig: StereoRig::default(),
            sensor: Rect::sensor(),
            screen: Rect::screen(),
            plane: None,
            initial_mode: Mode::Pointing,
            max_frame_gap: 0.050,
        }
    }
}

impl PipelineConfig {
    pub fn check(&self) -> Result<(), PipelineError> {
        self.rig.check()?;
        self.sensor.check()?;
        self.screen.check()?;
        TouchDetector::new(self.t_on, self.t_off)?;
        if !(self.gain > 0.0) {
            return Err(PipelineError::InvalidConfig(format!("gain must be positive, got {}", self.gain)));
        }
        if self.mapping == Mapping::Relative && self.plane.is_none() {
            return Err(PipelineError::InvalidConfig("relative mapping needs a calibrated plane".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapReason {
    /// Consecutive frames further apart than `max_frame_gap`.
    Sampling,
    /// The marker was missing, out of range or had no depth.
    MarkerLost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingGap {
    pub start: f64,
    pub end: f64,
    pub reason: GapReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineOutput {
    pub events: Vec<InputEvent>,
    pub gaps: Vec<TrackingGap>,
}

/// Turns sensor frames and key events into a session event stream.
///
/// Raw key events are copied through, followed by whatever the mode machine
/// derives from them. Pointer samples are emitted per tracked frame while
/// in pointing mode. Frames without a usable marker hold the pointer and
/// are reported as gaps.
pub fn pipeline_run(inputs: &[PipelineInput], config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.check()?;
    let mut out = PipelineOutput::default();
    let mut state = ModeState::new(config.initial_mode, config.screen.center());
    let mut detector = TouchDetector::new(config.t_on, config.t_off)?;
    let mut last_plane_pos: Option<Vector2<f64>> = None;
    let mut prev_t: Option<f64> = None;
    let mut prev_frame_t: Option<f64> = None;
    let mut lost: Option<TrackingGap> = None;

    for (index, input) in inputs.iter().enumerate() {
        let t = input.t();
        if let Some(prev) = prev_t {
            if t < prev {
                return Err(PipelineError::NonMonotone { index, t, prev });
            }
        }
        prev_t = Some(t);

        let raw = match input {
            PipelineInput::SensorFrame(frame) => {
                if let Some(pf) = prev_frame_t {
                    if t - pf > config.max_frame_gap {
                        out.gaps.push(TrackingGap { start: pf, end: t, reason: GapReason::Sampling });
                    }
                }
                prev_frame_t = Some(t);

                let tracked = match config.mapping {
                    Mapping::Absolute => frame
                        .left
                        .ok_or(PipelineError::TrackingGap("left"))
                        .and_then(|l| absolute_map(Point2::from(l), &config.sensor, &config.screen)),
                    Mapping::Relative => relative_frame(
                        frame,
                        config,
                        &mut detector,
                        &mut last_plane_pos,
                        state,
                    ),
                };
                state.touch = detector.state();
                match tracked {
                    Ok(p) => {
                        if let Some(gap) = lost.take() {
                            out.gaps.push(gap);
                        }
                        if state.mode == Mode::Pointing {
                            let ev = EventKind::PointerSample { x: p.x, y: p.y };
                            state = mode_fsm_step(state, &ev).0;
                            out.events.push(InputEvent::new(t, ev));
                        }
                    }
                    Err(e) => {
                        log::debug!("frame {index} at t={t}: {e}");
                        last_plane_pos = None;
                        lost.get_or_insert(TrackingGap { start: t, end: t, reason: GapReason::MarkerLost }).end = t;
                    }
                }
                continue;
            }
            PipelineInput::KeyDown { key, hand, .. } => EventKind::KeyDown { key: key.clone(), hand: *hand },
            PipelineInput::KeyUp { key, .. } => EventKind::KeyUp { key: key.clone() },
        };
        let (next, derived) = mode_fsm_step(state, &raw);
        if next.mode != state.mode {
            last_plane_pos = None;
        }
        state = next;
        out.events.push(InputEvent::new(t, raw));
        out.events.extend(derived.into_iter().map(|k| InputEvent::new(t, k)));
    }
    if let Some(gap) = lost {
        out.gaps.push(gap);
    }
    Ok(out)
}

/// Relative-mode pointer position for one frame.
fn relative_frame(
    frame: &SensorFrame,
    config: &PipelineConfig,
    detector: &mut TouchDetector,
    last_plane_pos: &mut Option<Vector2<f64>>,
    state: ModeState,
) -> Result<Point2<f64>, PipelineError> {
    let plane = config.plane.as_ref().expect("checked by PipelineConfig::check");
    let (l, r) = frame.stereo()?;
    let p: Point3<f64> = triangulate(l, r, &config.rig)?;
    detector.step(plane_distance(p, plane));
    let here = Vector2::from(plane.to_plane_coords(p));
    let touch = if state.mode == Mode::Pointing { detector.state() } else { Touch::Off };
    let pointer = match (touch, *last_plane_pos) {
        (Touch::On, Some(prev)) => {
            let step = relative_step(state.last_pointer, here - prev, config.gain, Touch::On, &config.screen);
            config.screen.clamp(state.last_pointer + step.unwrap_or_default())
        }
        _ => state.last_pointer,
    };
    *last_plane_pos = (touch == Touch::On).then_some(here);
    Ok(pointer)
}
