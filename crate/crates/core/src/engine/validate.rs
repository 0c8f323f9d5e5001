use crate::analytics::{AnalyticReference, ReferenceKind};
use crate::Result;

use super::{Engine, MetricEstimate, PointResult, Stopping, SweepConfig};

/// Fewest events for which an interval is considered informative.
const MIN_INFORMATIVE_EVENTS: u64 = 50;
const MAX_RELATIVE_HALF_WIDTH: f64 = 0.3;
pub const WIDE_CI_WARNING: &str = "CI too wide for validation";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Multiplies every analytic value; 1 for a normal run.
    pub corrupt_factor: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { corrupt_factor: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// No comparable reference for this point.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValidation {
    pub result: PointResult,
    pub verdict: Verdict,
    pub warning: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub points: Vec<PointValidation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PointValidation> {
        self.points.iter().filter(|p| p.verdict == Verdict::Fail)
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.points.iter().filter(|p| p.verdict == verdict).count()
    }
}

/// Compares one estimate against its reference.
pub fn judge(estimate: &MetricEstimate, reference: Option<AnalyticReference>) -> Verdict {
    let Some(r) = reference else {
        return Verdict::Skipped;
    };
    let (lo, hi) = estimate.ci95;
    let inside = match r.kind {
        ReferenceKind::Informational => return Verdict::Skipped,
        ReferenceKind::Exact => lo <= r.value && r.value <= hi,
        ReferenceKind::Approximate { rel_tol } => {
            r.value * (1.0 - rel_tol) <= hi && lo <= r.value * (1.0 + rel_tol)
        }
    };
    if inside {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Runs `config` and checks each analytic reference against the Monte
/// Carlo interval.
pub fn validate_analytics(engine: &Engine, config: &SweepConfig, opts: ValidationOptions) -> Result<ValidationReport> {
    let stop = Stopping::from(config);
    let mut points = Vec::new();
    for point in config.points()? {
        let mut estimate = engine.run_point(&point, config.seed, stop, config.ser_form)?;
        if let Some(r) = estimate.analytic.as_mut() {
            r.value *= opts.corrupt_factor;
        }
        let verdict = judge(&estimate, estimate.analytic);
        let wide = estimate.events < MIN_INFORMATIVE_EVENTS
            || estimate.relative_half_width() > MAX_RELATIVE_HALF_WIDTH;
        points.push(PointValidation {
            result: PointResult { point, estimate },
            verdict,
            warning: wide.then_some(WIDE_CI_WARNING),
        });
    }
    Ok(ValidationReport { points })
}
