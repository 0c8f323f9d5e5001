//! Deterministic Monte Carlo sweeps.
//!
//! Every point owns a counter-based stream family: chunk `i` of a point is
//! generated by ChaCha8 keyed on `(master seed, point hash)` with stream
//! number `i`. Chunks have a fixed size and the stopping rule is applied by
//! scanning chunk results in index order, so estimates do not depend on the
//! number of workers or on scheduling.

mod config;
mod estimate;
mod validate;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::{self, AnalyticReference, SerRxForm};
use crate::channel::MirrorPairChannel;
use crate::impairment::IqiParams;
use crate::numerics::Modulation;
use crate::schemes::{LinkConfig, PowerAllocation, SchemeId};
use crate::{Error, Result};

pub use config::{
    IqiPoint, IqiSpec, MetricSelection, SweepConfig, DEFAULT_MAX_TRIALS, DEFAULT_MIN_ERRORS, DEFAULT_SEED,
    MIN_ERRORS_FLOOR,
};
pub use estimate::{wilson_interval, EstimateFlag, MetricEstimate, Z95};
pub use validate::{judge, validate_analytics, PointValidation, ValidationOptions, ValidationReport, Verdict};

/// Blocks per chunk. Part of the reproducibility contract.
pub const CHUNK_BLOCKS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointMetric {
    Ser,
    Outage { rate: f64 },
}

impl PointMetric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ser => "ser",
            Self::Outage { .. } => "outage",
        }
    }

    pub fn rate(self) -> Option<f64> {
        match self {
            Self::Ser => None,
            Self::Outage { rate } => Some(rate),
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub scheme: SchemeId,
    /// `None` for outage points, which do not depend on the alphabet.
    pub modulation: Option<Modulation>,
    pub irr_db: f64,
    pub iqi: IqiParams,
    pub snr_db: f64,
    pub metric: PointMetric,
    pub power: PowerAllocation,
}

impl SweepPoint {
    pub fn link(&self) -> Result<LinkConfig> {
        LinkConfig::new(
            self.scheme,
            self.iqi,
            self.snr_db,
            self.modulation.unwrap_or(Modulation::Bpsk),
            self.power,
        )
    }

    /// Stable 64-bit FNV-1a hash of the point's full description.
    pub fn key(&self) -> u64 {
        let metric = match self.metric {
            PointMetric::Ser => "ser".to_owned(),
            PointMetric::Outage { rate } => format!("outage:{rate:?}"),
        };
        let descriptor = format!(
            "{}|{}|{:?}|{:?}|{:?}|{}|{}",
            self.scheme,
            self.modulation.map_or("na", Modulation::name),
            self.iqi.epsilon(),
            self.iqi.phi(),
            self.snr_db,
            metric,
            self.power.name(),
        );
        fnv1a(descriptor.as_bytes())
    }

    pub fn analytic(&self, form: SerRxForm) -> Result<Option<AnalyticReference>> {
        let link = self.link()?;
        Ok(match self.metric {
            PointMetric::Ser => analytics::scheme_ser(&link, form),
            PointMetric::Outage { rate } => analytics::scheme_outage(&link, rate),
        })
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl SweepConfig {
    /// Expands the grids in the fixed order scheme, IQI, then modulation
    /// (SER) or rate (outage), then SNR.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        self.validate()?;
        let iqis = self.iqi.resolve()?;
        let mut points = Vec::new();
        for &scheme in &self.schemes {
            for iqi in &iqis {
                let base = |modulation, snr_db, metric| SweepPoint {
                    scheme,
                    modulation,
                    irr_db: iqi.irr_db,
                    iqi: iqi.params,
                    snr_db,
                    metric,
                    power: self.power,
                };
                if self.metric.includes_ser() {
                    for &m in &self.modulations {
                        for &snr in &self.snr_db {
                            points.push(base(Some(m), snr, PointMetric::Ser));
                        }
                    }
                }
                if self.metric.includes_outage() {
                    for &rate in &self.rates {
                        for &snr in &self.snr_db {
                            points.push(base(None, snr, PointMetric::Outage { rate }));
                        }
                    }
                }
            }
        }
        Ok(points)
    }
}

/// Stopping rule for one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stopping {
    pub min_errors: u64,
    pub max_trials: u64,
}

impl From<&SweepConfig> for Stopping {
    fn from(c: &SweepConfig) -> Self {
        Self {
            min_errors: c.min_errors,
            max_trials: c.max_trials,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub point: SweepPoint,
    pub estimate: MetricEstimate,
}

/// Runs points on a fixed-size worker pool.
pub struct Engine {
    workers: usize,
    pool: Option<rayon::ThreadPool>,
}

impl Engine {
    /// `workers == 0` selects the available parallelism.
    pub fn new(workers: usize) -> Result<Self> {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::invalid("workers", e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Self { workers, pool })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs chunks until `min_events` or `block_cap` blocks; returns
    /// `(events, trials)`.
    fn run_chunks<F>(&self, seed: u64, key: u64, block_cap: u64, min_events: u64, chunk: F) -> (u64, u64)
    where
        F: Fn(&mut ChaCha8Rng, u64) -> (u64, u64) + Sync,
    {
        let mut seed_bytes = [0u8; 32];
        seed_bytes[..8].copy_from_slice(&seed.to_le_bytes());
        seed_bytes[8..16].copy_from_slice(&key.to_le_bytes());
        let n_chunks = block_cap.div_ceil(CHUNK_BLOCKS);
        let run_one = |i: u64| {
            let mut rng = ChaCha8Rng::from_seed(seed_bytes);
            rng.set_stream(i);
            let blocks = CHUNK_BLOCKS.min(block_cap - i * CHUNK_BLOCKS);
            chunk(&mut rng, blocks)
        };

        let (mut events, mut trials) = (0u64, 0u64);
        let mut next = 0u64;
        let mut round = 1u64;
        while next < n_chunks {
            let end = (next + round).min(n_chunks);
            let results: Vec<(u64, u64)> = match &self.pool {
                Some(pool) => pool.install(|| (next..end).into_par_iter().map(run_one).collect()),
                None => (next..end).map(run_one).collect(),
            };
            for (e, t) in results {
                events += e;
                trials += t;
                if events >= min_events {
                    return (events, trials);
                }
            }
            next = end;
            round = (round * 2).min(16 * self.workers as u64);
        }
        (events, trials)
    }

    /// Symbol error rate of `point` under the stopping rule. Trials count
    /// detected symbols.
    pub fn estimate_ser(&self, point: &SweepPoint, seed: u64, stop: Stopping, form: SerRxForm) -> Result<MetricEstimate> {
        let link = point.link()?;
        let per_block = u64::from(point.scheme.symbols_per_block());
        let block_cap = (stop.max_trials / per_block).max(1);
        let (events, trials) = self.run_chunks(seed, point.key(), block_cap, stop.min_errors, |rng, blocks| {
            let (mut e, mut t) = (0u64, 0u64);
            for _ in 0..blocks {
                let out = link.run_block(rng);
                e += u64::from(out.symbol_errors);
                t += u64::from(out.symbols_sent);
            }
            (e, t)
        });
        let mut est = MetricEstimate::from_counts(events, trials, stop.min_errors);
        est.analytic = analytics::scheme_ser(&link, form);
        Ok(est)
    }

    /// Outage probability of `point` at `rate`: fraction of channel draws
    /// whose instantaneous SINR falls below the scheme's threshold.
    pub fn estimate_outage(&self, point: &SweepPoint, rate: f64, seed: u64, stop: Stopping) -> Result<MetricEstimate> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::invalid("rate", format!("must be positive, got {rate}")));
        }
        let link = point.link()?;
        let th = point.scheme.outage_threshold(rate);
        let (events, trials) = self.run_chunks(seed, point.key(), stop.max_trials, stop.min_errors, |rng, blocks| {
            let mut e = 0u64;
            for _ in 0..blocks {
                let ch = MirrorPairChannel::sample(rng);
                if link.instantaneous_snr(&ch) < th {
                    e += 1;
                }
            }
            (e, blocks)
        });
        let mut est = MetricEstimate::from_counts(events, trials, stop.min_errors);
        est.analytic = analytics::scheme_outage(&link, rate);
        Ok(est)
    }

    pub fn run_point(&self, point: &SweepPoint, seed: u64, stop: Stopping, form: SerRxForm) -> Result<MetricEstimate> {
        match point.metric {
            PointMetric::Ser => self.estimate_ser(point, seed, stop, form),
            PointMetric::Outage { rate } => self.estimate_outage(point, rate, seed, stop),
        }
    }

    pub fn run_sweep(&self, config: &SweepConfig) -> Result<Vec<PointResult>> {
        let stop = Stopping::from(config);
        config
            .points()?
            .into_iter()
            .map(|point| {
                let estimate = self.run_point(&point, config.seed, stop, config.ser_form)?;
                Ok(PointResult { point, estimate })
            })
            .collect()
    }
}

/// Analytic reference for every point of `config`.
pub fn analytic_sweep(config: &SweepConfig) -> Result<Vec<(SweepPoint, Option<AnalyticReference>)>> {
    config
        .points()?
        .into_iter()
        .map(|p| Ok((p, p.analytic(config.ser_form)?)))
        .collect()
}
