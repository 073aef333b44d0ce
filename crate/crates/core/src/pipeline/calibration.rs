use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{detect_touch, fit_touch_plane, plane_distance, triangulate, PipelineError, StereoRig, Touch, TouchPlane};

/// Synthetic calibration scene: a fingertip swept over a rectangular patch
/// of a tilted keyboard plane, seen by the stereo rig.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub rig: StereoRig,
    /// Patch centre in the left-camera frame, mm.
    pub center: [f64; 3],
    /// Rotation of the plane about the camera x axis, degrees.
    pub tilt_deg: f64,
    /// Patch size, mm.
    pub width: f64,
    pub height: f64,
    pub points: usize,
    /// Isotropic Gaussian noise on every 3-D sample, mm.
    pub noise_sd: f64,
    /// Put every sample on one line (for testing the degenerate case).
    pub collinear: bool,
    pub t_on: f64,
    pub t_off: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            rig: StereoRig::default(),
            center: [0.0, 0.0, 350.0],
            tilt_deg: 12.0,
            width: 127.0,
            height: 76.0,
            points: 400,
            noise_sd: 0.2,
            collinear: false,
            t_on: 2.0,
            t_off: 4.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub frame: usize,
    /// True fingertip height above the plane, mm.
    pub height: f64,
    /// Distance to the fitted plane after projection and triangulation, mm.
    pub measured: f64,
    pub touch: Touch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub plane: TouchPlane,
    pub true_normal: [f64; 3],
    pub normal_error_deg: f64,
    pub fit_rms: f64,
    pub injected_noise: f64,
    pub points: usize,
    pub trace: Vec<TraceSample>,
    pub transitions: Vec<(usize, Touch)>,
}

impl SceneConfig {
    /// Unit normal of the true plane, pointing back toward the cameras.
    pub fn true_normal(&self) -> Vector3<f64> {
        let t = self.tilt_deg.to_radians();
        Vector3::new(0.0, t.sin(), -t.cos())
    }

    fn axes(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.true_normal();
        let u = Vector3::x();
        (u, n.cross(&u).normalize())
    }
}

/// Samples the calibration cloud through the rig: each point is projected
/// into both cameras and triangulated back.
pub fn synthetic_cloud(scene: &SceneConfig) -> Result<Vec<Point3<f64>>, PipelineError> {
    scene.rig.check()?;
    if !(scene.noise_sd >= 0.0) {
        return Err(PipelineError::InvalidConfig(format!("noise_sd must be non-negative, got {}", scene.noise_sd)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    let noise = Normal::new(0.0, scene.noise_sd).map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
    let c = Point3::from(scene.center);
    let (eu, ev) = scene.axes();
    let mut cloud = Vec::with_capacity(scene.points);
    for _ in 0..scene.points {
        let u = rng.random_range(-0.5..0.5) * scene.width;
        let v = if scene.collinear { 0.0 } else { rng.random_range(-0.5..0.5) * scene.height };
        let jitter = Vector3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
        let p = c + eu * u + ev * v + jitter;
        let (l, r) = scene.rig.project(p);
        cloud.push(triangulate(l, r, &scene.rig)?);
    }
    Ok(cloud)
}

/// Fits the plane to a synthetic cloud, then runs a press-and-lift
/// fingertip trace through touch detection against the fitted plane.
pub fn calibrate_demo(scene: &SceneConfig) -> Result<CalibrationReport, PipelineError> {
    let cloud = synthetic_cloud(scene)?;
    let plane = fit_touch_plane(&cloud, Some(Point3::origin()))?;
    let truth = scene.true_normal();
    let cos = plane.normal().dot(&truth).clamp(-1.0, 1.0);
    let normal_error_deg = cos.acos().to_degrees();

    // 1 s at 100 Hz: hover at 12 mm, press down, rest, lift.
    let frames = 100;
    let heights: Vec<f64> = (0..frames)
        .map(|i| {
            let s = i as f64 / (frames - 1) as f64;
            match s {
                s if s < 0.3 => 12.0 * (1.0 - s / 0.3),
                s if s < 0.6 => 0.0,
                s => 12.0 * (s - 0.6) / 0.4,
            }
        })
        .collect();
    let c = Point3::from(scene.center);
    let (eu, _) = scene.axes();
    let mut measured = Vec::with_capacity(frames);
    for (i, h) in heights.iter().enumerate() {
        let along = (i as f64 / frames as f64 - 0.5) * 0.5 * scene.width;
        let p = c + eu * along + truth * *h;
        let (l, r) = scene.rig.project(p);
        measured.push(plane_distance(triangulate(l, r, &scene.rig)?, &plane));
    }
    let transitions = detect_touch(&measured, scene.t_on, scene.t_off)?;
    let mut state = Touch::Off;
    let mut next = transitions.iter().peekable();
    let trace = heights
        .iter()
        .zip(&measured)
        .enumerate()
        .map(|(frame, (h, m))| {
            if let Some((_, s)) = next.next_if(|(f, _)| *f == frame) {
                state = *s;
            }
            TraceSample { frame, height: *h, measured: *m, touch: state }
        })
        .collect();

    Ok(CalibrationReport {
        plane,
        true_normal: truth.into(),
        normal_error_deg,
        fit_rms: plane.fit_rms,
        injected_noise: scene.noise_sd,
        points: cloud.len(),
        trace,
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_scene_is_exact() {
        let r = calibrate_demo(&SceneConfig { noise_sd: 0.0, ..Default::default() }).unwrap();
        assert!(r.fit_rms < 1e-9, "{}", r.fit_rms);
        assert!(r.normal_error_deg < 1e-6);
        let states: Vec<Touch> = r.transitions.iter().map(|(_, s)| *s).collect();
        assert_eq!(states, vec![Touch::On, Touch::Off]);
    }

    #[test]
    fn noisy_scene_rms_tracks_noise() {
        let r = calibrate_demo(&SceneConfig::default()).unwrap();
        assert!((0.15..=0.25).contains(&r.fit_rms), "{}", r.fit_rms);
        assert!(r.normal_error_deg < 1.0);
    }

    #[test]
    fn collinear_scene_is_degenerate() {
        let err = calibrate_demo(&SceneConfig { collinear: true, noise_sd: 0.0, ..Default::default() }).unwrap_err();
        assert!(matches!(err, PipelineError::DegenerateGeometry(_)), "{err}");
    }
}
