//! Receiver I/Q mixer imbalance.
//!
//! An imbalanced quadrature mixer with relative amplitude mismatch `epsilon`
//! and phase mismatch `phi` maps the balanced down-converted spectrum `G` to
//! `K1 G(k) + K2 G*(-k)`, coupling each subcarrier with its mirror. The
//! coefficients satisfy `K1 = 1 - K2*`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::numerics::ComplexSample;
use crate::{Error, Result};

/// Mixer imbalance and the derived mirror-mixing coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IqiParams {
    epsilon: f64,
    phi: f64,
    k1: ComplexSample,
    k2: ComplexSample,
}

impl IqiParams {
    /// Builds the mixing coefficients `K1 = (1 + eps e^{-j phi}) / 2` and
    /// `K2 = (1 - eps e^{j phi}) / 2`.
    pub fn new(epsilon: f64, phi: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("must be finite and > 0, got {epsilon}")));
        }
        if !(phi.abs() < FRAC_PI_2) {
            return Err(Error::invalid("phi", format!("|phi| must be < pi/2 rad, got {phi}")));
        }
        let k1 = 0.5 * (1.0 + ComplexSample::from_polar(epsilon, -phi));
        let k2 = 0.5 * (1.0 - ComplexSample::from_polar(epsilon, phi));
        Ok(Self { epsilon, phi, k1, k2 })
    }

    /// Perfectly matched branches: `K1 = 1`, `K2 = 0`.
    pub fn ideal() -> Self {
        Self {
            epsilon: 1.0,
            phi: 0.0,
            k1: ComplexSample::new(1.0, 0.0),
            k2: ComplexSample::new(0.0, 0.0),
        }
    }

    /// Amplitude-only imbalance (`phi = 0`) reaching the requested image
    /// rejection ratio. `+inf` dB yields [`IqiParams::ideal`].
    pub fn from_irr_db(irr_db: f64) -> Result<Self> {
        if irr_db == f64::INFINITY {
            return Ok(Self::ideal());
        }
        if !(irr_db > 0.0) || !irr_db.is_finite() {
            return Err(Error::invalid("irr_db", format!("must be > 0 dB, got {irr_db}")));
        }
        let a = 10f64.powf(-irr_db / 20.0);
        Self::new((1.0 - a) / (1.0 + a), 0.0)
    }

    /// Amplitude imbalance that reaches `irr_db` for a fixed phase mismatch.
    ///
    /// Solves `eps^2 - 2 c eps + 1 = 0` with `c = cos(phi) (r+1)/(r-1)` and
    /// keeps the root with `eps <= 1`. Fails when the phase error alone
    /// already limits the IRR below the target.
    pub fn from_irr_db_with_phase(irr_db: f64, phi: f64) -> Result<Self> {
        if phi == 0.0 {
            return Self::from_irr_db(irr_db);
        }
        if !(irr_db > 0.0) || !irr_db.is_finite() {
            return Err(Error::invalid("irr_db", format!("must be finite and > 0 dB, got {irr_db}")));
        }
        let r = 10f64.powf(irr_db / 10.0);
        let c = phi.cos() * (r + 1.0) / (r - 1.0);
        if c < 1.0 {
            let max_db = 10.0 * ((1.0 + phi.cos()) / (1.0 - phi.cos())).log10();
            return Err(Error::invalid(
                "irr_db",
                format!("{irr_db} dB unreachable with phi = {phi} rad (max {max_db:.3} dB)"),
            ));
        }
        Self::new(c - (c * c - 1.0).sqrt(), phi)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Phase mismatch in radians.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn k1(&self) -> ComplexSample {
        self.k1
    }

    pub fn k2(&self) -> ComplexSample {
        self.k2
    }

    pub fn is_ideal(&self) -> bool {
        self.k2 == ComplexSample::new(0.0, 0.0)
    }

    /// `|K1|^2 / |K2|^2`; `+inf` for perfect matching.
    pub fn irr_linear(&self) -> f64 {
        let k2 = self.k2.norm_sqr();
        if k2 == 0.0 {
            f64::INFINITY
        } else {
            self.k1.norm_sqr() / k2
        }
    }

    pub fn irr_db(&self) -> f64 {
        10.0 * self.irr_linear().log10()
    }

    /// `|K1|^2 + |K2|^2`, the power gain applied to white noise.
    pub fn power_gain(&self) -> f64 {
        self.k1.norm_sqr() + self.k2.norm_sqr()
    }

    /// Determinant `|K1|^2 - |K2|^2` of the mixing map on `(r(k), r*(-k))`.
    pub fn mixing_determinant(&self) -> f64 {
        self.k1.norm_sqr() - self.k2.norm_sqr()
    }

    /// Applies receiver IQI to the balanced signals of a mirror pair.
    #[inline]
    pub fn apply_rx_iqi(&self, r_id_k: ComplexSample, r_id_mk: ComplexSample) -> (ComplexSample, ComplexSample) {
        (
            self.k1 * r_id_k + self.k2 * r_id_mk.conj(),
            self.k1 * r_id_mk + self.k2 * r_id_k.conj(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sample_circular_gaussian;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexSample {
        ComplexSample::new(re, im)
    }

    #[test]
    fn perfect_matching() {
        let p = IqiParams::new(1.0, 0.0).unwrap();
        assert_eq!(p.k1(), c(1.0, 0.0));
        assert_eq!(p.k2(), c(0.0, 0.0));
        assert_eq!(p.irr_linear(), f64::INFINITY);
        assert!(p.is_ideal());
    }

    #[test]
    fn five_degree_phase_error() {
        let p = IqiParams::new(1.0, 5f64.to_radians()).unwrap();
        assert!((p.k1() - c(0.998097, -0.043578)).norm() < 1e-6);
        assert!((p.k2() - c(0.001903, -0.043578)).norm() < 1e-6);
        // |K1|^2 = (1 + cos phi)/2, |K2|^2 = (1 - cos phi)/2
        let cos = 5f64.to_radians().cos();
        assert!((p.irr_linear() - (1.0 + cos) / (1.0 - cos)).abs() < 1e-9);
        assert!((p.irr_linear() - 524.5).abs() < 0.1);
        assert!((p.irr_db() - 27.2).abs() < 0.05);
    }

    #[test]
    fn amplitude_only_twenty_db() {
        let p = IqiParams::new(0.8182, 0.0).unwrap();
        assert!((p.k1() - c(0.9091, 0.0)).norm() < 1e-12);
        assert!((p.k2() - c(0.0909, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn irr_inverse_map() {
        let p = IqiParams::from_irr_db(20.0).unwrap();
        assert!((p.epsilon() - 0.818182).abs() < 1e-6);
        assert!((p.irr_linear() - 100.0).abs() < 1e-9);
        let p = IqiParams::from_irr_db(40.0).unwrap();
        assert!((p.epsilon() - 0.980198).abs() < 1e-6);
        assert_eq!(IqiParams::from_irr_db(f64::INFINITY).unwrap(), IqiParams::ideal());
    }

    #[test]
    fn irr_with_phase() {
        let phi = 5f64.to_radians();
        let p = IqiParams::from_irr_db_with_phase(20.0, phi).unwrap();
        assert!((p.irr_linear() / 100.0 - 1.0).abs() < 1e-9);
        assert_eq!(p.phi(), phi);
        assert!(p.epsilon() < 1.0);
        assert!(IqiParams::from_irr_db_with_phase(30.0, phi).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(IqiParams::new(0.0, 0.0).is_err());
        assert!(IqiParams::new(-0.5, 0.0).is_err());
        assert!(IqiParams::new(1.0, 1.6).is_err());
        assert!(IqiParams::from_irr_db(0.0).is_err());
        assert!(IqiParams::from_irr_db(-3.0).is_err());
    }

    #[test]
    fn apply_known_values() {
        let ideal = IqiParams::ideal();
        let (a, b) = ideal.apply_rx_iqi(c(0.3, -0.2), c(1.5, 0.7));
        assert_eq!((a, b), (c(0.3, -0.2), c(1.5, 0.7)));

        let p = IqiParams::new(0.8, 0.0).unwrap();
        assert!((p.k1() - c(0.9, 0.0)).norm() < 1e-15);
        let (rk, rmk) = p.apply_rx_iqi(c(1.0, 0.0), c(0.0, 1.0));
        assert!((rk - c(0.9, -0.1)).norm() < 1e-15);
        assert!((rmk - c(0.1, 0.9)).norm() < 1e-15);
    }

    #[test]
    fn apply_preserves_noise_power_on_average() {
        let p = IqiParams::from_irr_db(15.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut out, mut inp) = (0.0, 0.0);
        for _ in 0..n {
            let a = sample_circular_gaussian(&mut rng, 1.0).unwrap();
            let b = sample_circular_gaussian(&mut rng, 2.0).unwrap();
            let (x, y) = p.apply_rx_iqi(a, b);
            out += x.norm_sqr() + y.norm_sqr();
            inp += a.norm_sqr() + b.norm_sqr();
        }
        assert!((out / (p.power_gain() * inp) - 1.0).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn coefficient_identities(eps in 0.05f64..3.0, phi in -1.5f64..1.5) {
            let p = IqiParams::new(eps, phi).unwrap();
            prop_assert!((p.k1() - (1.0 - p.k2().conj())).norm() < 1e-12);
            prop_assert!((p.power_gain() - 0.5 * (1.0 + eps * eps)).abs() < 1e-12);
        }

        #[test]
        fn apply_is_real_linear(a in -5f64..5.0, x in -2f64..2.0, y in -2f64..2.0, u in -2f64..2.0, v in -2f64..2.0) {
            let p = IqiParams::from_irr_db(25.0).unwrap();
            let (r1, r2) = p.apply_rx_iqi(c(x, y) * a, c(u, v) * a);
            let (s1, s2) = p.apply_rx_iqi(c(x, y), c(u, v));
            prop_assert!((r1 - s1 * a).norm() < 1e-12);
            prop_assert!((r2 - s2 * a).norm() < 1e-12);
        }

        #[test]
        fn irr_round_trip(db in 1.0f64..60.0) {
            let p = IqiParams::from_irr_db(db).unwrap();
            prop_assert!((p.irr_linear() / 10f64.powf(db / 10.0) - 1.0).abs() < 1e-9);
            prop_assert!(p.k1().norm() > p.k2().norm());
        }
    }
}
