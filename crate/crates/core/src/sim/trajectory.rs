/// Normalised minimum-jerk position profile, `s(0) = 0`, `s(1) = 1`.
pub fn min_jerk(tau: f64) -> f64 {
    let t = tau.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Normalised time at which the profile reaches `fraction` of the path.
pub fn min_jerk_time_at(fraction: f64) -> f64 {
    let target = fraction.clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if min_jerk(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// A straight minimum-jerk reach from `from` to `to` over `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reach {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub t_start: f64,
    pub t_end: f64,
}

impl Reach {
    /// Reach that shows `visible_px` of displacement exactly at `t_onset`
    /// and arrives at `t_end`.
    pub fn with_onset(from: (f64, f64), to: (f64, f64), t_onset: f64, t_end: f64, visible_px: f64) -> Self {
        let len = (to.0 - from.0).hypot(to.1 - from.1);
        if len <= visible_px {
            return Reach { from, to, t_start: t_onset, t_end };
        }
        let tau = min_jerk_time_at(visible_px / len);
        let total = (t_end - t_onset) / (1.0 - tau);
        Reach { from, to, t_start: t_end - total, t_end }
    }

    pub fn at(&self, t: f64) -> (f64, f64) {
        let span = self.t_end - self.t_start;
        let s = if span > 0.0 { min_jerk((t - self.t_start) / span) } else { 1.0 };
        (self.from.0 + s * (self.to.0 - self.from.0), self.from.1 + s * (self.to.1 - self.from.1))
    }
}
