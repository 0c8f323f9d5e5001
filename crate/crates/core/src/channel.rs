//! Rayleigh block fading for a mirror subcarrier pair, and AWGN.

use rand::Rng;
use serde::Serialize;

use crate::numerics::{circular_gaussian, ComplexSample};
use crate::{Error, Result};

/// Fading gains `h(k)` and `h(-k)`, independent `CN(0, 1)`, held constant
/// for one coding block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirrorPairChannel {
    pub h_k: ComplexSample,
    pub h_mk: ComplexSample,
}

impl MirrorPairChannel {
    pub fn new(h_k: ComplexSample, h_mk: ComplexSample) -> Self {
        Self { h_k, h_mk }
    }

    /// Draws one block of uncorrelated unit-power Rayleigh gains.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let sigma = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            h_k: circular_gaussian(rng, sigma),
            h_mk: circular_gaussian(rng, sigma),
        }
    }

    /// `|h(k)|^2 + |h(-k)|^2`.
    pub fn total_gain(&self) -> f64 {
        self.h_k.norm_sqr() + self.h_mk.norm_sqr()
    }
}

/// Additive white Gaussian noise of power `n0` per subcarrier per slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    n0: f64,
    sigma: f64,
}

impl NoiseModel {
    pub fn new(n0: f64) -> Result<Self> {
        if !(n0 >= 0.0) || !n0.is_finite() {
            return Err(Error::invalid("n0", format!("must be finite and >= 0, got {n0}")));
        }
        Ok(Self {
            n0,
            sigma: (0.5 * n0).sqrt(),
        })
    }

    /// Noise for unit symbol energy at `Es/N0 = snr_db`. `+inf` dB gives a
    /// noiseless model.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::invalid("snr_db", format!("got {snr_db}")));
        }
        Self::new(10f64.powf(-snr_db / 10.0))
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexSample {
        if self.n0 == 0.0 {
            return ComplexSample::new(0.0, 0.0);
        }
        circular_gaussian(rng, self.sigma)
    }

    #[inline]
    pub fn add<R: Rng + ?Sized>(&self, rng: &mut R, x: ComplexSample) -> ComplexSample {
        x + self.sample(rng)
    }
}

/// Returns `x + n` with `n ~ CN(0, n0)`.
pub fn add_awgn<R: Rng + ?Sized>(rng: &mut R, x: ComplexSample, n0: f64) -> Result<ComplexSample> {
    Ok(NoiseModel::new(n0)?.add(rng, x))
}
