//! Complex sample type, special functions, Gaussian sampling, quadrature
//! and modulation alphabets.

mod constellation;
pub mod quadrature;

pub use constellation::{Constellation, Modulation};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Baseband complex amplitude (dimensionless).
pub type ComplexSample = Complex64;

/// Complementary error function `2/sqrt(pi) * int_x^inf exp(-t^2) dt`.
///
/// Backed by the FreeBSD/musl rational approximations (`libm`), which use a
/// separate asymptotic branch for large arguments and never return a
/// negative value.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Gaussian Q-function, `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Draws a circularly-symmetric complex Gaussian with total power `variance`
/// (each quadrature carries `variance / 2`).
pub fn sample_circular_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Result<ComplexSample> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::invalid(
            "variance",
            format!("must be finite and non-negative, got {variance}"),
        ));
    }
    Ok(circular_gaussian(rng, (0.5 * variance).sqrt()))
}

/// Unchecked hot-path variant: `sigma` is the per-quadrature standard deviation.
#[inline]
pub(crate) fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> ComplexSample {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ComplexSample::new(sigma * re, sigma * im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn erfc_reference_points() {
        assert_eq!(erfc(0.0), 1.0);
        // mpmath, 30 digits
        let cases = [
            (1.0, 0.157299207050285130658779364917),
            (-3.0, 1.99997790950300141455862722387),
            (10.0, 2.08848758376254475700078629496e-45),
        ];
        for (x, want) in cases {
            let got = erfc(x);
            assert!(((got - want) / want).abs() < 1e-10, "erfc({x}) = {got}, want {want}");
        }
        assert!(erfc(10.0) <= 1e-44 && erfc(10.0) >= 0.0);
        assert_eq!(erfc(40.0), 0.0);
    }

    #[test]
    fn q_function_matches_erfc() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(2.0) - 0.022750131948179195).abs() < 1e-15);
    }

    #[test]
    fn gaussian_zero_variance_is_exact_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = sample_circular_gaussian(&mut rng, 0.0).unwrap();
        assert_eq!(z, ComplexSample::new(0.0, 0.0));
    }

    #[test]
    fn gaussian_rejects_negative_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_circular_gaussian(&mut rng, -1.0),
            Err(Error::InvalidParameter { name: "variance", .. })
        ));
        assert!(sample_circular_gaussian(&mut rng, f64::NAN).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for variance in [1.0, 4.0] {
            let n = 1_000_000;
            let mut mean = ComplexSample::new(0.0, 0.0);
            let mut power = 0.0;
            let mut re2 = 0.0;
            for _ in 0..n {
                let z = sample_circular_gaussian(&mut rng, variance).unwrap();
                mean += z;
                power += z.norm_sqr();
                re2 += z.re * z.re;
            }
            let mean = mean / n as f64;
            let power = power / n as f64;
            assert!(mean.norm() < 0.005 * variance.sqrt(), "mean {mean}");
            assert!((power / variance - 1.0).abs() < 0.01, "power {power}");
            assert!((re2 / n as f64 / (variance / 2.0) - 1.0).abs() < 0.01);
        }
    }
}
