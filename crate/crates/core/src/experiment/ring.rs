use serde::{Deserialize, Serialize};

use super::ExperimentError;

/// A circular target of diameter `w`. `index` is the slot on the ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub index: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
}

impl TargetSpec {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.cx).hypot(y - self.cy) <= self.w / 2.0
    }
}

/// Step between consecutive targets in visiting order, in ring slots.
pub fn ring_step(n: usize) -> usize {
    n.div_ceil(2)
}

/// Ring radius such that targets `ring_step(n)` slots apart are `distance`
/// apart.
pub fn ring_radius(n: usize, distance: f64) -> f64 {
    let k = ring_step(n) as f64;
    distance / (2.0 * (k * std::f64::consts::PI / n as f64).sin())
}

/// Lays out `n` targets on a ring, returned in visiting order: the i-th
/// target is slot `(i * k) mod n` at angle `2πj/n` from the +x axis.
pub fn ring_layout(
    n: usize,
    distance: f64,
    width: f64,
    center: (f64, f64),
    screen: (f64, f64),
) -> Result<Vec<TargetSpec>, ExperimentError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(ExperimentError::Layout(format!("target count must be odd and at least 3, got {n}")));
    }
    if !(distance > 0.0 && width > 0.0) {
        return Err(ExperimentError::Layout(format!("need D > 0 and W > 0, got D={distance} W={width}")));
    }
    let r = ring_radius(n, distance);
    let k = ring_step(n);
    let half = width / 2.0;
    (0..n)
        .map(|i| {
            let j = (i * k) % n;
            let a = std::f64::consts::TAU * j as f64 / n as f64;
            let t = TargetSpec { index: j as u32, cx: center.0 + r * a.cos(), cy: center.1 + r * a.sin(), w: width };
            let on_screen =
                t.cx - half >= 0.0 && t.cx + half <= screen.0 && t.cy - half >= 0.0 && t.cy + half <= screen.1;
            if on_screen {
                Ok(t)
            } else {
                Err(ExperimentError::Layout(format!(
                    "target {j} at ({:.1}, {:.1}) leaves the {}x{} screen",
                    t.cx, t.cy, screen.0, screen.1
                )))
            }
        })
        .collect()
}
