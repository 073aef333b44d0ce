use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{mix_seed, OperatorProfile};
use crate::session::{DiscomfortSurvey, SurveyPhase, BODY_PARTS};

const BASELINE_STREAM: u64 = 0xBA5E;
const PART_NOISE_SD: f64 = 0.3;

fn baseline_ratings(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, BASELINE_STREAM]));
    BODY_PARTS.iter().map(|_| 1.0 + rng.random_range(0.0..1.5)).collect()
}

/// Draws a discomfort survey for one participant (`seed`).
///
/// The baseline depends only on the participant. A post-device survey
/// shifts every part by a common score drawn around the profile's target,
/// plus zero-sum per-part noise, so `mean(post) - mean(baseline)` is the
/// drawn score unless a rating hits the scale ends.
pub fn simulate_discomfort(profile: &OperatorProfile, phase: SurveyPhase, seed: u64) -> DiscomfortSurvey {
    let baseline = baseline_ratings(seed);
    let ratings = match phase {
        SurveyPhase::Baseline => baseline,
        SurveyPhase::PostDevice => {
            let device_stream = profile.device as u64 + 1;
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, BASELINE_STREAM, device_stream]));
            let score = profile.discomfort_target
                + Normal::new(0.0, profile.discomfort_spread).expect("spread checked non-negative").sample(&mut rng);
            let noise_dist = Normal::new(0.0, PART_NOISE_SD).expect("constant sd");
            let noise: Vec<f64> = BODY_PARTS.iter().map(|_| noise_dist.sample(&mut rng)).collect();
            let mean_noise = noise.iter().sum::<f64>() / noise.len() as f64;
            baseline
                .iter()
                .zip(&noise)
                .map(|(b, e)| (b + score + e - mean_noise).clamp(0.0, 10.0))
                .collect()
        }
    };
    DiscomfortSurvey { phase, ratings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{Cohort, Device};
    use crate::sim::preset;

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    fn median_score(device: Device, cohort: Cohort, draws: u64) -> f64 {
        let p = preset(device, cohort).unwrap();
        median(
            (0..draws)
                .map(|seed| {
                    let post = simulate_discomfort(&p, SurveyPhase::PostDevice, seed);
                    let base = simulate_discomfort(&p, SurveyPhase::Baseline, seed);
                    post.mean() - base.mean()
                })
                .collect(),
        )
    }

    #[test]
    fn expert_targets_reached() {
        assert!(median_score(Device::Fingers, Cohort::Expert, 200).abs() <= 0.1);
        assert!((median_score(Device::Mouse, Cohort::Expert, 200) - 1.5).abs() <= 0.15);
        assert!((median_score(Device::Trackpad, Cohort::Expert, 200) - 0.4).abs() <= 0.15);
    }

    #[test]
    fn baseline_ignores_device() {
        let a = simulate_discomfort(&preset(Device::Mouse, Cohort::Expert).unwrap(), SurveyPhase::Baseline, 5);
        let b = simulate_discomfort(&preset(Device::Fingers, Cohort::Novice).unwrap(), SurveyPhase::Baseline, 5);
        assert_eq!(a, b);
        assert!(a.check().is_ok());
    }

    #[test]
    fn surveys_are_valid() {
        for device in Device::ALL {
            let p = preset(device, Cohort::Expert).unwrap();
            for seed in 0..50 {
                assert!(simulate_discomfort(&p, SurveyPhase::PostDevice, seed).check().is_ok());
            }
        }
    }
}
