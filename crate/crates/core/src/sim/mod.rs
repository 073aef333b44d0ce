//! Synthetic operator: turns a trial plan and a behavioural profile into
//! the event stream a participant would have produced.

mod discomfort;
mod profile;
mod session;
mod trajectory;

use thiserror::Error;

use crate::session::Device;

pub use discomfort::simulate_discomfort;
pub use profile::{preset, preset_named, Learning, MissModel, OperatorProfile, TimingPhase};
pub use session::simulate_session;
pub use trajectory::{min_jerk, min_jerk_time_at, Reach};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("profile is for {profile} but the plan is for {plan}")]
    DeviceMismatch { profile: Device, plan: Device },
}

/// Combines seed material into one well-mixed 64-bit seed (splitmix64).
pub fn mix_seed(parts: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(0x5EED_u64, |acc, &p| splitmix(acc ^ splitmix(p)))
}
