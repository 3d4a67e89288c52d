//! Kolmogorov–Smirnov statistics.

use std::f64::consts::PI;

/// `sup |F_n − F|` for the empirical distribution of `samples`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
    }
    d
}

/// Two-sample statistic `sup |F_n − G_m|`.
pub fn ks_two_sample_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Statistic and asymptotic p-value with Stephens' small-sample correction.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> (f64, f64) {
    let d = ks_two_sample_statistic(x, y);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let en = (n * m / (n + m)).sqrt();
    (d, kolmogorov_q((en + 0.12 + 0.11 / en) * d))
}

/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`, the Kolmogorov tail.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form converges fast for small λ
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let s: f64 = (0..8).map(|k| y.powi((2 * k + 1) * (2 * k + 1))).sum();
        (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        let mut s = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let term = x.powi(j * j);
            s += sign * term;
            if term < 1e-18 {
                break;
            }
            sign = -sign;
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// One-sample critical distance at level `alpha` for `n` samples.
pub fn critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn q_branches_agree_and_known_values() {
        let lo = {
            let y = (-PI * PI / (8.0 * 1.18f64 * 1.18)).exp();
            let s: f64 = (0..8).map(|k| y.powi((2 * k + 1) * (2 * k + 1))).sum();
            1.0 - (2.0 * PI).sqrt() / 1.18 * s
        };
        assert!((lo - kolmogorov_q(1.18)).abs() < 1e-12);
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 2e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_q(0.5) - 0.963945).abs() < 1e-5);
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert!(kolmogorov_q(5.0) < 1e-20);
    }

    #[test]
    fn critical_value_matches_tail() {
        let c = critical_value(0.01, 1);
        assert!((kolmogorov_q(c) - 0.01).abs() < 1e-4);
        assert!((critical_value(0.01, 10000) - c / 100.0).abs() < 1e-15);
    }

    #[test]
    fn one_sample_small_case() {
        let d = ks_one_sample(&[0.1, 0.5, 0.9], |x| x);
        // exact: max over i of |i/n − x_i|, |x_i − (i−1)/n|
        let brute = [(1.0 / 3.0f64 - 0.1).abs(), 0.1, (2.0 / 3.0f64 - 0.5).abs(), (0.5 - 1.0 / 3.0f64).abs(), 0.1, (0.9 - 2.0 / 3.0f64).abs()]
            .into_iter()
            .fold(0.0, f64::max);
        assert!((d - brute).abs() < 1e-15);
    }

    #[test]
    fn uniform_samples_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        assert!(ks_one_sample(&xs, |x| x) < critical_value(0.01, 5000));
        let shifted: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(ks_one_sample(&shifted, |x| x) > critical_value(0.01, 5000));
    }

    fn brute_two(x: &[f64], y: &[f64]) -> f64 {
        let all: Vec<f64> = x.iter().chain(y).copied().collect();
        all.iter()
            .map(|&t| {
                let fx = x.iter().filter(|&&v| v <= t).count() as f64 / x.len() as f64;
                let fy = y.iter().filter(|&&v| v <= t).count() as f64 / y.len() as f64;
                (fx - fy).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_sample_p_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..400).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..300).map(|_| rng.gen::<f64>()).collect();
        let (_, p) = ks_two_sample(&x, &y);
        assert!(p > 0.01, "{p}");
        let z: Vec<f64> = y.iter().map(|v| v + 0.3).collect();
        let (_, p) = ks_two_sample(&x, &z);
        assert!(p < 1e-6, "{p}");
    }

    proptest! {
        #[test]
        fn two_sample_matches_brute(x in prop::collection::vec(0u8..20, 1..40), y in prop::collection::vec(0u8..20, 1..40)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            prop_assert!((ks_two_sample_statistic(&x, &y) - brute_two(&x, &y)).abs() < 1e-12);
        }
    }
}
