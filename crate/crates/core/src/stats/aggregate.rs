use super::{mean, median, sample_sd, StatsError};
use crate::session::DiscomfortSurvey;

/// Single 3-SD pass: drops values further than three sample standard
/// deviations from the mean of the input.
pub fn filter_outliers(xs: &[f64]) -> Result<Vec<f64>, StatsError> {
    let keep = outlier_mask(xs)?;
    Ok(xs.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect())
}

/// `true` for values that survive [`filter_outliers`].
pub fn outlier_mask(xs: &[f64]) -> Result<Vec<bool>, StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: xs.len() });
    }
    let m = mean(xs);
    let limit = 3.0 * sample_sd(xs);
    Ok(xs.iter().map(|x| (x - m).abs() <= limit).collect())
}

/// Median within each ID group, then the mean across IDs.
pub fn median_then_mean(groups: &[(f64, Vec<f64>)]) -> Result<f64, StatsError> {
    if groups.is_empty() {
        return Err(StatsError::MissingData("no ID groups".into()));
    }
    let medians = groups
        .iter()
        .map(|(id, v)| median(v).map_err(|_| StatsError::MissingData(format!("no values for ID {id}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mean(&medians))
}

/// Mean across IDs of the median error count within each ID.
pub fn error_rate(groups: &[(f64, Vec<f64>)]) -> Result<f64, StatsError> {
    median_then_mean(groups)
}

/// Mean post-device rating minus mean baseline rating.
pub fn discomfort_score(post: &DiscomfortSurvey, baseline: &DiscomfortSurvey) -> Result<f64, StatsError> {
    post.check().map_err(StatsError::Invalid)?;
    baseline.check().map_err(StatsError::Invalid)?;
    Ok(post.mean() - baseline.mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::SurveyPhase;
    use proptest::prelude::*;

    #[test]
    fn outlier_examples() {
        assert_eq!(filter_outliers(&[2.0; 5]).unwrap(), vec![2.0; 5]);
        let xs = [1.0, 1.0, 1.0, 1.0, 100.0];
        assert_eq!(filter_outliers(&xs).unwrap(), xs.to_vec());
        assert!(filter_outliers(&[1.0]).is_err());
    }

    #[test]
    fn median_then_mean_examples() {
        assert_eq!(median_then_mean(&[(3.0, vec![1.0, 2.0, 3.0])]).unwrap(), 2.0);
        let g = vec![(3.0, vec![1.0; 3]), (4.0, vec![2.0; 3]), (5.0, vec![3.0; 3])];
        assert_eq!(median_then_mean(&g).unwrap(), 2.0);
        let err = median_then_mean(&[(3.0, vec![1.0]), (4.0, vec![])]).unwrap_err();
        assert!(err.to_string().contains("ID 4"));
    }

    #[test]
    fn error_rate_examples() {
        assert_eq!(error_rate(&[(3.0, vec![0.0; 11])]).unwrap(), 0.0);
        let g = vec![(3.0, vec![0.0, 0.0, 1.0]), (4.0, vec![0.0, 1.0, 1.0]), (5.0, vec![1.0, 1.0, 1.0])];
        assert!((error_rate(&g).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn discomfort_examples() {
        let post = DiscomfortSurvey { phase: SurveyPhase::PostDevice, ratings: vec![1.0, 0.0, 2.0, 0.0, 1.0, 2.0] };
        let base = DiscomfortSurvey { phase: SurveyPhase::Baseline, ratings: vec![0.5; 6] };
        assert!((discomfort_score(&post, &base).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(discomfort_score(&base, &base).unwrap(), 0.0);
        let short = DiscomfortSurvey { phase: SurveyPhase::Baseline, ratings: vec![0.5; 5] };
        assert!(discomfort_score(&post, &short).is_err());
    }

    proptest! {
        #[test]
        fn survivors_within_three_sd_of_original(xs in proptest::collection::vec(-1e3f64..1e3, 2..60), spike in 1e3f64..1e6) {
            let mut xs = xs;
            xs.push(spike);
            let m = mean(&xs);
            let sd = sample_sd(&xs);
            for x in filter_outliers(&xs).unwrap() {
                prop_assert!((x - m).abs() <= 3.0 * sd);
            }
        }

        #[test]
        fn median_then_mean_permutation_invariant(
            groups in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 1..12), 1..5),
            rot in 0usize..12,
        ) {
            let a: Vec<(f64, Vec<f64>)> = groups.iter().enumerate().map(|(i, g)| (i as f64, g.clone())).collect();
            let b: Vec<(f64, Vec<f64>)> = groups
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let mut g = g.clone();
                    let k = rot % g.len();
                    g.rotate_left(k);
                    g.reverse();
                    (i as f64, g)
                })
                .collect();
            prop_assert_eq!(median_then_mean(&a).unwrap(), median_then_mean(&b).unwrap());
            prop_assert_eq!(error_rate(&a).unwrap(), error_rate(&b).unwrap());
        }
    }
}
