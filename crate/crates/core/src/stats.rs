//! Small numeric helpers shared by testers and the harness.

/// `Poi(lambda)` draw; `lambda = 0` gives 0.
pub fn poisson<R: rand::Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    assert!(lambda >= 0.0 && lambda.is_finite(), "bad Poisson mean {lambda}");
    if lambda == 0.0 {
        return 0;
    }
    let d = rand_distr::Poisson::new(lambda).expect("positive finite mean");
    rand_distr::Distribution::<f64>::sample(&d, rng) as u64
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n−1 denominator).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Runs needed for a majority vote of 1/12-error runs to reach `delta`.
pub fn majority_runs(delta: f64) -> usize {
    if delta >= 1.0 / 12.0 {
        return 1;
    }
    let r = (18.0 * (1.0 / delta).ln()).ceil() as usize;
    r | 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_moments() {
        let mut rng = crate::rng_from_seed(11);
        for &lam in &[0.3, 4.0, 1200.0] {
            let xs: Vec<f64> = (0..20000).map(|_| poisson(lam, &mut rng) as f64).collect();
            let m = mean(&xs);
            let v = variance(&xs);
            let se = (lam / xs.len() as f64).sqrt();
            assert!((m - lam).abs() < 4.0 * se, "mean {m} for {lam}");
            assert!((v / lam - 1.0).abs() < 0.1, "var {v} for {lam}");
        }
        assert_eq!(poisson(0.0, &mut rng), 0);
    }

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(45, 50);
        assert!(lo < 0.9 && 0.9 < hi);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn majority_runs_are_odd() {
        assert_eq!(majority_runs(1.0 / 6.0), 1);
        assert_eq!(majority_runs(0.01) % 2, 1);
    }
}
