use statrs::distribution::{ContinuousCDF, Normal};

use super::{StatsError, TestResult};

const SMALL: f64 = 1e-19;

const G: [f64; 2] = [-2.273, 0.459];
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

fn poly(cc: &[f64], x: f64) -> f64 {
    let n = cc.len();
    let mut ret = cc[0];
    if n > 1 {
        let mut p = x * cc[n - 1];
        for j in (1..n - 1).rev() {
            p = (p + cc[j]) * x;
        }
        ret += p;
    }
    ret
}

/// Half of the antisymmetric coefficient vector: `a[i]` weights
/// `x[n-1-i] - x[i]`.
fn coefficients(n: usize, std: &Normal) -> Vec<f64> {
    let nn2 = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (1..=nn2).map(|i| std.inverse_cdf((i as f64 - 0.375) / an25)).collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;
    let mut a = vec![0.0; nn2];
    a[0] = a1;
    let (first, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0].powi(2) - 2.0 * m[1].powi(2)) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        (2, fac)
    } else {
        (1, ((summ2 - 2.0 * m[0].powi(2)) / (1.0 - 2.0 * a1 * a1)).sqrt())
    };
    for i in first..nn2 {
        a[i] = -m[i] / fac;
    }
    a
}

/// Shapiro-Wilk W test for normality (Royston's algorithm), 3 <= n <= 5000.
pub fn shapiro_wilk(xs: &[f64]) -> Result<TestResult, StatsError> {
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: n });
    }
    if n > 5000 {
        return Err(StatsError::Domain(format!("shapiro-wilk supports at most 5000 values, got {n}")));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::Domain("non-finite value".into()));
    }
    let mut x = xs.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < SMALL {
        return Err(StatsError::Degenerate("all values are identical".into()));
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let half = coefficients(n, &std);

    // Correlation form on range-scaled data, as in the original routine.
    let mut full = vec![0.0; n];
    for (i, ai) in half.iter().enumerate() {
        full[i] = -ai;
        full[n - 1 - i] = *ai;
    }
    let xs_scaled: Vec<f64> = x.iter().map(|v| v / range).collect();
    let nf = n as f64;
    let mean_a = full.iter().sum::<f64>() / nf;
    let mean_x = xs_scaled.iter().sum::<f64>() / nf;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (ai, xi) in full.iter().zip(&xs_scaled) {
        let da = ai - mean_a;
        let dx = xi - mean_x;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = (1.0 - w1).clamp(0.0, 1.0);

    let p = if n == 3 {
        const PI6: f64 = 6.0 / std::f64::consts::PI;
        const STQR: f64 = std::f64::consts::FRAC_PI_3;
        (PI6 * (w.sqrt().asin() - STQR)).clamp(0.0, 1.0)
    } else {
        let y = w1.ln();
        let an = nf;
        let (y, m, s) = if n <= 11 {
            let gamma = poly(&G, an);
            if y >= gamma {
                return Ok(TestResult::new(w, 1e-99, n));
            }
            (-(gamma - y).ln(), poly(&C3, an), poly(&C4, an).exp())
        } else {
            let xx = an.ln();
            (y, poly(&C5, xx), poly(&C6, xx).exp())
        };
        std.sf((y - m) / s)
    };
    Ok(TestResult::new(w, p, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // (data, W, p) computed with scipy.stats.shapiro.
    fn oracles() -> Vec<(Vec<f64>, f64, f64)> {
        vec![
            (
                vec![148.0, 154.0, 158.0, 160.0, 161.0, 162.0, 166.0, 170.0, 182.0, 195.0, 236.0],
                0.788_814_694_863_171_6,
                0.006_703_814_061_898_823,
            ),
            (
                vec![49.0, -67.0, 8.0, 16.0, 6.0, 23.0, 28.0, 41.0, 14.0, 29.0, 56.0, 24.0, 75.0, 60.0, -48.0],
                0.900_787_615_705_710_6,
                0.097_847_036_100_390_07,
            ),
            ((1..=20).map(f64::from).collect(), 0.960_375_183_242_988_4, 0.551_371_774_591_677_1),
            (
                vec![1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30],
                0.952_166_587_711_667_6,
                0.713_852_048_518_405_6,
            ),
            (vec![1.0, 2.0, 4.0, 10.0], 0.871_487_055_671_979_1, 0.303_550_831_975_840_3),
            (vec![2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8], 0.940_136_678_197_951_3, 0.639_951_374_615_381_8),
        ]
    }

    #[test]
    fn matches_reference_values() {
        for (data, w, p) in oracles() {
            let r = shapiro_wilk(&data).unwrap();
            assert!((r.statistic - w).abs() < 1e-6, "n={} W={} want {w}", data.len(), r.statistic);
            assert!((r.p_value - p).abs() < 1e-5, "n={} p={} want {p}", data.len(), r.p_value);
        }
    }

    #[test]
    fn three_equally_spaced_is_perfect() {
        let r = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-15);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(shapiro_wilk(&[1.0, 2.0]), Err(StatsError::InsufficientData { .. })));
        assert!(matches!(shapiro_wilk(&[4.0; 6]), Err(StatsError::Degenerate(_))));
        assert!(shapiro_wilk(&vec![1.0; 5001]).is_err());
    }

    proptest! {
        #[test]
        fn affine_invariant(xs in proptest::collection::vec(-100.0f64..100.0, 3..60), scale in 0.01f64..100.0, shift in -1e3f64..1e3) {
            prop_assume!(xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min) > 1e-3);
            let a = shapiro_wilk(&xs).unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let b = shapiro_wilk(&ys).unwrap();
            prop_assert!((a.statistic - b.statistic).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&a.statistic));
        }
    }
}
