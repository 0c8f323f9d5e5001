//! Link-level simulation and closed-form analytics for multi-carrier
//! receivers with I/Q imbalance (IQI).
//!
//! The crate works per mirror-subcarrier pair `(k, -k)` in the frequency
//! domain. It provides:
//!
//! - [`impairment`]: receiver mixer imbalance and its mirror-pair mixing.
//! - [`channel`]: Rayleigh block fading and AWGN.
//! - [`schemes`]: transceiver chains (ideal, uncompensated, ZF, IQSC,
//!   A-IQSC, repetition coding with MRC).
//! - [`analytics`]: SINR, outage and SER closed forms.
//! - [`engine`]: deterministic parallel Monte Carlo sweeps and
//!   analytics cross-validation.

pub mod analytics;
pub mod channel;
pub mod engine;
mod error;
pub mod impairment;
pub mod numerics;
pub mod schemes;

pub use error::{Error, Result};
pub use numerics::ComplexSample;

/// Converts a power ratio in dB to linear scale. `+inf` maps to `+inf`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
