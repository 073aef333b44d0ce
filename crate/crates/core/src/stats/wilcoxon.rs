use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{StatsError, TestResult};

/// Largest number of non-zero pairs handled by the exact distribution in
/// [`WilcoxonMethod::Auto`].
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    /// Exact for n <= 12, normal approximation above.
    #[default]
    Auto,
    Exact,
    Normal,
}

/// Average ranks of `|d|`, doubled so ties stay integral.
fn doubled_ranks(abs: &[f64]) -> (Vec<u64>, f64) {
    let n = abs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| abs[a].total_cmp(&abs[b]));
    let mut ranks = vec![0u64; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && abs[order[j + 1]] == abs[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1, average (i + j + 2) / 2, doubled
        let r2 = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            ranks[k] = r2;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

/// Two-sided exact p-value given doubled ranks and the doubled positive
/// rank sum.
fn exact_p(ranks: &[u64], w2: u64) -> f64 {
    let total: u64 = ranks.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let dev = (2 * w2 as i64 - total as i64).abs();
    let hits: f64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * *s as i64 - total as i64).abs() >= dev)
        .map(|(_, c)| c)
        .sum();
    hits / 2f64.powi(ranks.len() as i32)
}

/// Effect size `r = |Z| / sqrt(n)`.
pub fn effect_size(z: f64, n: usize) -> f64 {
    z.abs() / (n as f64).sqrt()
}

/// Paired Wilcoxon signed-rank test with the default method.
pub fn wilcoxon_signed_rank(xs: &[f64], ys: &[f64]) -> Result<TestResult, StatsError> {
    wilcoxon_signed_rank_with(xs, ys, WilcoxonMethod::Auto)
}

/// Paired Wilcoxon signed-rank test on `x - y`. Zero differences are
/// dropped; tied magnitudes get average ranks. The statistic is the sum of
/// positive ranks. `z` always comes from the normal approximation with
/// continuity and tie correction, and the effect size is `|z| / sqrt(n)`.
pub fn wilcoxon_signed_rank_with(xs: &[f64], ys: &[f64], method: WilcoxonMethod) -> Result<TestResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::Domain(format!("paired samples differ in length: {} vs {}", xs.len(), ys.len())));
    }
    let d: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::Domain("non-finite difference".into()));
    }
    let n = d.len();
    if n == 0 {
        return Err(StatsError::Degenerate("all paired differences are zero".into()));
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, tie_term) = doubled_ranks(&abs);
    let w2: u64 = ranks.iter().zip(&d).filter(|(_, d)| **d > 0.0).map(|(r, _)| *r).sum();
    let w_plus = w2 as f64 / 2.0;

    let nf = n as f64;
    let mu = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let diff = w_plus - mu;
    let z = if var > 0.0 { diff.signum() * (diff.abs() - 0.5).max(0.0) / var.sqrt() } else { 0.0 };
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let normal_p = (2.0 * std.sf(z.abs())).min(1.0);

    let use_exact = match method {
        WilcoxonMethod::Auto => n <= EXACT_MAX_N,
        WilcoxonMethod::Exact => {
            if n > 60 {
                return Err(StatsError::Domain(format!("exact distribution limited to 60 pairs, got {n}")));
            }
            true
        }
        WilcoxonMethod::Normal => false,
    };
    let p = if use_exact { exact_p(&ranks, w2) } else { normal_p };
    Ok(TestResult { statistic: w_plus, p_value: p, z: Some(z), effect_size: Some(effect_size(z, n)), n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerates all 2^n sign assignments on float ranks.
    fn brute_force(d: &[f64]) -> f64 {
        let d: Vec<f64> = d.iter().cloned().filter(|v| *v != 0.0).collect();
        let n = d.len();
        let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        let ranks: Vec<f64> = abs
            .iter()
            .map(|a| {
                let below = abs.iter().filter(|b| *b < a).count() as f64;
                let equal = abs.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect();
        let total: f64 = ranks.iter().sum();
        let mu = total / 2.0;
        let obs: f64 = ranks.iter().zip(&d).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if (s - mu).abs() >= (obs - mu).abs() {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    const X: [f64; 9] = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30];
    #[allow(clippy::approx_constant)]
    const Y: [f64; 9] = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29];

    #[test]
    fn reference_pair() {
        // R: wilcox.test(x, y, paired = TRUE) -> V = 40, p = 0.03906
        let r = wilcoxon_signed_rank(&X, &Y).unwrap();
        assert_eq!(r.statistic, 40.0);
        assert_eq!(r.p_value, 0.0390625);
        // R: wilcox.test(x, y, paired = TRUE, exact = FALSE) -> p = 0.04401
        let r = wilcoxon_signed_rank_with(&X, &Y, WilcoxonMethod::Normal).unwrap();
        assert!((r.p_value - 0.044_010_984_012_951_43).abs() < 1e-9, "{}", r.p_value);
    }

    #[test]
    fn effect_size_example() {
        assert!((effect_size(-3.05, 12) - 0.880_459_160_514_179_3).abs() < 1e-12);
    }

    #[test]
    fn degenerate_input() {
        assert!(matches!(wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::Degenerate(_))));
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ties_match_brute_force() {
        let d = [1.0, -1.0, 2.0, 2.0, -2.0, 3.0, 0.0, 4.0];
        let zeros = vec![0.0; d.len()];
        let r = wilcoxon_signed_rank_with(&d, &zeros, WilcoxonMethod::Exact).unwrap();
        assert_eq!(r.p_value, brute_force(&d));
        assert_eq!(r.n, 7);
    }

    proptest! {
        #[test]
        fn exact_equals_enumeration(d in proptest::collection::vec(-5i32..=5, 1..=12)) {
            let d: Vec<f64> = d.into_iter().map(f64::from).collect();
            prop_assume!(d.iter().any(|v| *v != 0.0));
            let zeros = vec![0.0; d.len()];
            let r = wilcoxon_signed_rank_with(&d, &zeros, WilcoxonMethod::Exact).unwrap();
            prop_assert_eq!(r.p_value.to_bits(), brute_force(&d).to_bits());
        }

        #[test]
        fn p_in_unit_interval(d in proptest::collection::vec(-100.0f64..100.0, 1..40)) {
            prop_assume!(d.iter().any(|v| *v != 0.0));
            let zeros = vec![0.0; d.len()];
            for m in [WilcoxonMethod::Auto, WilcoxonMethod::Normal] {
                let r = wilcoxon_signed_rank_with(&d, &zeros, m).unwrap();
                prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
            }
        }
    }
}
