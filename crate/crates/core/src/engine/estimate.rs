use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticReference;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateFlag {
    /// No events before the trial cap; the interval is one-sided.
    FloorBelowResolution,
    /// The trial cap ended the run before `min_errors` events.
    TrialCap,
}

impl EstimateFlag {
    pub fn name(self) -> &'static str {
        match self {
            Self::FloorBelowResolution => "floor-below-resolution",
            Self::TrialCap => "trial-cap",
        }
    }
}

/// Monte Carlo probability estimate with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub estimate: f64,
    pub trials: u64,
    pub events: u64,
    pub ci95: (f64, f64),
    pub analytic: Option<AnalyticReference>,
    pub flag: Option<EstimateFlag>,
}

impl MetricEstimate {
    pub fn from_counts(events: u64, trials: u64, min_events: u64) -> Self {
        assert!(events <= trials, "events exceed trials");
        let estimate = if trials == 0 { 0.0 } else { events as f64 / trials as f64 };
        let flag = if events == 0 {
            Some(EstimateFlag::FloorBelowResolution)
        } else if events < min_events {
            Some(EstimateFlag::TrialCap)
        } else {
            None
        };
        Self {
            estimate,
            trials,
            events,
            ci95: wilson_interval(events, trials),
            analytic: None,
            flag,
        }
    }

    /// Half-width of the interval relative to the estimate; infinite with
    /// no events.
    pub fn relative_half_width(&self) -> f64 {
        if self.events == 0 {
            return f64::INFINITY;
        }
        0.5 * (self.ci95.1 - self.ci95.0) / self.estimate
    }
}

/// Wilson score 95% interval for `events` successes out of `trials`.
///
/// With zero events the upper end is the exact one-sided 95% bound
/// `1 - 0.05^(1/n)`.
pub fn wilson_interval(events: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    if events == 0 {
        return (0.0, -(0.05f64.ln() / n).exp_m1());
    }
    let p = events as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wilson_textbook_value() {
        // 10 of 100: (0.05523, 0.17437).
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.055_229_4).abs() < 1e-6, "{lo}");
        assert!((hi - 0.174_366_1).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn zero_events_use_one_sided_bound() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!((hi - 2.9914e-3).abs() < 1e-6);
        let e = MetricEstimate::from_counts(0, 1000, 200);
        assert_eq!(e.flag, Some(EstimateFlag::FloorBelowResolution));
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn interval_contains_estimate() {
        for (k, n) in [(1, 1), (1, 2), (3, 7), (999, 1000), (1000, 1000), (5, 10_000_000)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{k}/{n}");
        }
    }

    #[test]
    fn coverage_on_bernoulli_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for p in [0.01, 0.1, 0.5] {
            let n = 2000;
            let reps = 1000;
            let covered = (0..reps)
                .filter(|_| {
                    let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                    let (lo, hi) = wilson_interval(k, n);
                    lo <= p && p <= hi
                })
                .count();
            let rate = covered as f64 / reps as f64;
            assert!((0.93..=0.97).contains(&rate), "p={p}: coverage {rate}");
        }
    }
}
