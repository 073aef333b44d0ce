use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::trajectory::Reach;
use super::{mix_seed, OperatorProfile, SimError, TimingPhase};
use crate::experiment::{TargetSpec, TrialPlan};
use crate::session::{EventKind, Hand, InputEvent, Key, Mode, SessionLog, SessionMeta, SCREEN_H, SCREEN_W};

/// Displacement shown by the first pointer sample of a reach, px. Just
/// above the extraction threshold so the sampled onset is the true onset.
const ONSET_PX: f64 = 2.5;
const FIRST_SET_DELAY: f64 = 0.5;
const SET_PAUSE: f64 = 1.0;
const BLOCK_PAUSE: f64 = 2.0;
const KEY_HOLD: f64 = 0.06;
/// Fraction of homing time spent before the tab press, Fingers only.
const TAB_AT_HOMING: f64 = 0.7;
const TAB_AT_RETURN: f64 = 0.5;
const MAX_OVERLAP_LEAD: f64 = 0.15;
const LEFT_HAND_KEYS: &str = "qwertasdfgzxcvb";

fn lognormal(rng: &mut ChaCha8Rng, median: f64, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    median * (sigma * z).exp()
}

/// Endpoint scatter around the target centre, kept inside the target.
fn scatter(rng: &mut ChaCha8Rng, target: &TargetSpec) -> (f64, f64) {
    let sigma = target.w / 6.0;
    let limit = 0.95 * target.w / 2.0;
    loop {
        let dx: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let dy: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        if dx.hypot(dy) <= limit {
            return (target.cx + dx, target.cy + dy);
        }
    }
}

struct Stream {
    events: Vec<InputEvent>,
    dt: f64,
}

impl Stream {
    fn push(&mut self, t: f64, kind: EventKind) {
        self.events.push(InputEvent::new(t, kind));
    }

    fn sample(&mut self, t: f64, p: (f64, f64)) {
        self.push(t, EventKind::PointerSample { x: p.0, y: p.1 });
    }

    /// Samples `reach` from `first` on a fixed grid, ending with a sample
    /// at the endpoint.
    fn reach(&mut self, reach: &Reach, first: f64) {
        let mut k = 0;
        loop {
            let t = first + k as f64 * self.dt;
            if t >= reach.t_end {
                break;
            }
            self.sample(t, reach.at(t));
            k += 1;
        }
        self.sample(reach.t_end, reach.to);
    }

    fn key(&mut self, t: f64, key: Key, hand: Hand) {
        self.push(t, EventKind::KeyDown { key: key.clone(), hand });
        self.push(t + KEY_HOLD, EventKind::KeyUp { key });
    }
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

/// Generates one participant's session with one device.
///
/// Every target gets its own random stream derived from `(seed, block,
/// set, target)`, so changing one timing parameter leaves the other draws
/// untouched.
pub fn simulate_session(profile: &OperatorProfile, plan: &TrialPlan, seed: u64) -> Result<SessionLog, SimError> {
    profile.check()?;
    if profile.device != plan.device {
        return Err(SimError::DeviceMismatch { profile: profile.device, plan: plan.device });
    }
    let keyboard = profile.device.uses_keyboard_modes();
    let blocks = plan.blocks.len() as u32;
    let mut session_rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, u64::MAX]));
    let factor = lognormal(&mut session_rng, 1.0, profile.participant_spread);

    let mut out = Stream { events: Vec::new(), dt: 1.0 / profile.sample_rate };
    let mut pos = (SCREEN_W as f64 / 2.0, SCREEN_H as f64 / 2.0);
    let mut mode = Mode::Typing;
    let mut t = 0.0;
    let mut prev_hit = 0.0;
    out.sample(0.0, pos);

    for (b, block) in plan.blocks.iter().enumerate() {
        let b = b as u32;
        let mult = |phase| profile.learning.multiplier(phase, b, blocks) * factor;
        for (s, set) in block.sets.iter().enumerate() {
            t += match (b, s) {
                (0, 0) => FIRST_SET_DELAY,
                (_, 0) => BLOCK_PAUSE,
                _ => SET_PAUSE,
            };
            let n = set.targets.len();
            for (i, target) in set.targets.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, b as u64, s as u64, i as u64]));
                let t0 = t;
                out.push(
                    t0,
                    EventKind::TargetShown { target_index: i as u32, cx: target.cx, cy: target.cy, w: target.w },
                );

                let homing = lognormal(&mut rng, profile.homing_median * mult(TimingPhase::Homing), profile.homing_spread);
                let overlap = rng.random_bool(profile.overlap_prob);
                let lead = rng.random_range(0.0..1.0) * MAX_OVERLAP_LEAD.min(0.9 * (t0 - prev_hit));
                let onset = if keyboard {
                    if mode == Mode::Typing {
                        let t_tab = if overlap { t0 } else { t0 + TAB_AT_HOMING * homing };
                        out.key(t_tab, Key::Tab, Hand::Untracked);
                        out.push(t_tab, EventKind::ModeSwitch { to: Mode::Pointing });
                        mode = Mode::Pointing;
                    }
                    if overlap {
                        t0
                    } else {
                        t0 + homing
                    }
                } else {
                    if mode == Mode::Typing {
                        out.push(t0, EventKind::ModeSwitch { to: Mode::Pointing });
                        mode = Mode::Pointing;
                    }
                    if overlap {
                        t0 - lead
                    } else {
                        t0 + homing
                    }
                };

                let m_med = profile.movement_median(set.id);
                let movement = lognormal(&mut rng, m_med * mult(TimingPhase::Movement), profile.movement_noise_sd / m_med);
                let miss = rng.random_bool(profile.miss_prob.at(set.id));
                let (dx, dy) = (target.cx - pos.0, target.cy - pos.1);
                let dist = dx.hypot(dy).max(1e-9);
                let first_end = if miss {
                    let over = target.w / 2.0 + rng.random_range(1.0..4.0);
                    (target.cx + dx / dist * over, target.cy + dy / dist * over)
                } else {
                    scatter(&mut rng, target)
                };
                let first_t = onset + movement;
                out.reach(&Reach::with_onset(pos, first_end, onset, first_t, ONSET_PX), onset);

                let mut hit = first_t;
                let mut end = first_end;
                if miss {
                    click(&mut out, keyboard, first_t, first_end);
                    let final_end = scatter(&mut rng, target);
                    let miss_dist = (final_end.0 - first_end.0).hypot(final_end.1 - first_end.1);
                    let correction = (profile.fitts_a + profile.fitts_b * (miss_dist / target.w).ln_1p().max(0.0) / std::f64::consts::LN_2)
                        * mult(TimingPhase::Movement);
                    hit = first_t + correction;
                    end = final_end;
                    let reach = Reach { from: first_end, to: final_end, t_start: first_t, t_end: hit };
                    out.reach(&reach, first_t + out.dt);
                }
                click(&mut out, keyboard, hit, end);
                pos = end;
                prev_hit = hit;

                t = hit;
                if i + 1 < n {
                    let word = &set.words[i];
                    out.push(hit, EventKind::WordShown { word: word.clone() });
                    let ret = lognormal(&mut rng, profile.return_median * mult(TimingPhase::Return), profile.return_spread);
                    if keyboard {
                        let t_tab = hit + TAB_AT_RETURN * ret;
                        out.key(t_tab, Key::Tab, Hand::Untracked);
                        out.push(t_tab, EventKind::ModeSwitch { to: Mode::Typing });
                    } else {
                        out.push(hit, EventKind::ModeSwitch { to: Mode::Typing });
                    }
                    mode = Mode::Typing;
                    let mut tk = hit + ret;
                    for (k, ch) in word.chars().enumerate() {
                        if k > 0 {
                            tk += lognormal(&mut rng, profile.inter_key_interval, 0.2);
                        }
                        let hand = if LEFT_HAND_KEYS.contains(ch) { Hand::Untracked } else { Hand::Tracked };
                        out.push(tk, EventKind::KeyDown { key: Key::Char(ch), hand });
                        out.push(tk, EventKind::CharTyped { ch });
                        out.push(tk + KEY_HOLD, EventKind::KeyUp { key: Key::Char(ch) });
                    }
                    t = tk;
                }
            }
        }
    }

    let mut events = out.events;
    for e in &mut events {
        e.t = round_to(e.t, 1e-6);
        match &mut e.kind {
            EventKind::PointerSample { x, y } | EventKind::Click { x, y } => {
                *x = round_to(*x, 1e-3);
                *y = round_to(*y, 1e-3);
            }
            _ => {}
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));

    let mut meta = SessionMeta::new(format!("sim-{seed:016x}"), profile.device, profile.cohort, blocks.max(1), seed);
    meta.screen_w = SCREEN_W;
    meta.screen_h = SCREEN_H;
    let mut log = SessionLog::new(meta);
    log.events = events;
    Ok(log)
}

fn click(out: &mut Stream, keyboard: bool, t: f64, at: (f64, f64)) {
    if keyboard {
        out.key(t, Key::Space, Hand::Untracked);
    }
    out.push(t, EventKind::Click { x: at.0, y: at.1 });
}
