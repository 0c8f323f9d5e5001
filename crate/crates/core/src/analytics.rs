//! Closed-form SINR, outage and SER expressions.
//!
//! Average SNR arguments named `gbar` are per-branch means: `Es/N0` for the
//! rate-1 schemes and the per-copy SNR for the half-rate schemes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::{erfc, quadrature, ComplexSample, Modulation};
use crate::schemes::{iqsc_noise_penalty, LinkConfig, SchemeId};
use crate::{Error, Result};

const AVERAGE_REL_TOL: f64 = 1e-11;

/// Constants of the single-term conditional SER `A erfc(sqrt(B gamma))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationSerParams {
    pub a: f64,
    pub b: f64,
}

impl ModulationSerParams {
    pub const BPSK: Self = Self { a: 0.5, b: 1.0 };
    /// Union-bound style single-erfc QPSK approximation.
    pub const QPSK: Self = Self { a: 1.0, b: 0.5 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid("A", format!("must be positive, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid("B", format!("must be positive, got {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn conditional(&self, gamma: f64) -> f64 {
        self.a * erfc((self.b * gamma).sqrt())
    }
}

/// Variant of the per-symbol uncompensated-IQI QAM expression.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SerRxForm {
    /// Third-term coefficient `4(sqrt(M)-1)^2/(pi M)`, arctan argument `1/(1+phi^2)`.
    #[default]
    Corrected,
    /// Third-term coefficient `4(M-1)^2/(pi M)`; negative and clipped to 0
    /// at small distortion.
    AsPrinted,
    /// Rayleigh square-QAM average with the image treated as Gaussian
    /// noise: corrected coefficient, arctan argument `1/sqrt(1+phi^2)`.
    Textbook,
}

impl SerRxForm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Corrected => "corrected",
            Self::AsPrinted => "as-printed",
            Self::Textbook => "textbook",
        }
    }
}

impl std::str::FromStr for SerRxForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "as-printed" => Ok(Self::AsPrinted),
            "textbook" => Ok(Self::Textbook),
            _ => Err(Error::invalid("ser_form", format!("unknown form `{s}`"))),
        }
    }
}

/// SINR on subcarrier `k` with the mirror image treated as noise.
pub fn sinr_iqi(gid_k: f64, gid_mk: f64, irr: f64) -> f64 {
    gid_k / (gid_mk / irr + 1.0 + 1.0 / irr)
}

/// IQSC post-combining SNR with each copy at half power.
pub fn snr_iqsc(gid_k: f64, gid_mk: f64) -> f64 {
    0.5 * (gid_k + gid_mk)
}

/// Repetition coding + MRC SINR: `S / (I + N)` normalized by `|K1|^2`, with
/// `es_n0` the per-copy SNR. Finite as `es_n0 -> inf` unless `irr` is too.
pub fn sinr_rc(h_k: ComplexSample, h_mk: ComplexSample, irr: f64, es_n0: f64) -> f64 {
    let (g_k, g_mk) = (h_k.norm_sqr(), h_mk.norm_sqr());
    let sum = g_k + g_mk;
    let interference = 4.0 * g_k * g_mk / irr;
    let noise = (1.0 + 1.0 / irr) * sum / es_n0;
    sum * sum / (interference + noise)
}

/// Outage threshold for rate-1 schemes.
pub fn threshold(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// Outage threshold for rate-1/2 schemes.
pub fn threshold_half_rate(rate: f64) -> f64 {
    (2.0 * rate).exp2() - 1.0
}

pub fn outage_ideal(gbar: f64, rate: f64) -> f64 {
    -(-threshold(rate) / gbar).exp_m1()
}

/// Outage with uncompensated IQI; floors at `(2^R-1)/(irr + 2^R - 1)`.
pub fn outage_iqi(gbar: f64, rate: f64, irr: f64) -> f64 {
    let th = threshold(rate);
    let a = th / gbar * (1.0 + 1.0 / irr);
    let b = th / irr;
    ((b - (-a).exp_m1()) / (1.0 + b)).clamp(0.0, 1.0)
}

/// Outage of a two-branch chi-square SNR with per-branch mean `gbar` at the
/// half-rate threshold.
pub fn outage_iqsc(gbar: f64, rate: f64) -> f64 {
    gamma2_cdf(threshold_half_rate(rate) / gbar)
}

/// `1 - (1 + x) e^-x`, summed as `e^-x sum_{n>=2} x^n/n!` for small `x`.
fn gamma2_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.5 {
        let mut term = 0.5 * x * x;
        let mut sum = 0.0;
        let mut n = 2.0;
        while term > sum * 1e-18 && term > 0.0 {
            sum += term;
            n += 1.0;
            term *= x / n;
        }
        sum * (-x).exp()
    } else {
        (1.0 - (1.0 + x) * (-x).exp()).clamp(0.0, 1.0)
    }
}

/// Rayleigh-averaged `A erfc(sqrt(B gamma))`.
pub fn ser_ideal(gbar: f64, p: ModulationSerParams) -> f64 {
    let bg = p.b * gbar;
    if bg.is_infinite() {
        return 0.0;
    }
    p.a / (1.0 + bg + (bg + bg * bg).sqrt())
}

/// `A erfc(sqrt(B gamma))` averaged over a chi-square SNR with four degrees
/// of freedom and per-branch mean `gbar`.
pub fn ser_iqsc(gbar: f64, p: ModulationSerParams) -> f64 {
    let bg = p.b * gbar;
    if bg.is_infinite() {
        return 0.0;
    }
    let mu = (bg / (1.0 + bg)).sqrt();
    // 1 - mu = (1 - mu^2) / (1 + mu) avoids cancellation at high SNR.
    let one_minus_mu = (1.0 / (1.0 + bg)) / (1.0 + mu);
    0.5 * p.a * one_minus_mu * one_minus_mu * (2.0 + mu)
}

fn square_qam_order(order: u32) -> Result<u32> {
    let m = Modulation::from_order(order)?;
    if !m.is_square_qam() {
        return Err(Error::invalid("M", format!("{order} is not a square QAM order")));
    }
    Ok(order)
}

fn qam_conditional(gamma: f64, order: u32) -> f64 {
    let m = f64::from(order);
    let p = (1.0 - 1.0 / m.sqrt()) * erfc((1.5 * gamma / (m - 1.0)).sqrt());
    p * (2.0 - p)
}

/// Exact square M-QAM symbol error probability in AWGN at SNR `gamma`.
pub fn ser_qam_conditional(gamma: f64, order: u32) -> Result<f64> {
    Ok(qam_conditional(gamma, square_qam_order(order)?))
}

/// Exact symbol error probability of `modulation` in AWGN.
pub fn ser_awgn(gamma: f64, modulation: Modulation) -> f64 {
    match modulation {
        Modulation::Bpsk => ModulationSerParams::BPSK.conditional(gamma),
        m => qam_conditional(gamma, m.order()),
    }
}

/// `E[f(gbar X)]` for a density `w` on `[0, inf)`. `f(g)` is negligible
/// beyond `g = knee`, so the range is split there to keep the mass near
/// zero visible to the quadrature at high `gbar`.
fn average(f: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64, gbar: f64, knee: f64) -> f64 {
    let integrand = |t: f64| f(gbar * t) * w(t);
    let split = (knee / gbar).min(1.0);
    quadrature::integrate(integrand, 0.0, split, AVERAGE_REL_TOL, 0.0)
        + quadrature::integrate_to_infinity(integrand, split, AVERAGE_REL_TOL, 0.0)
}

/// SNR beyond which the AWGN SER of `m` is below `1e-30`.
fn ser_knee(m: Modulation) -> f64 {
    70.0 * (f64::from(m.order()) - 1.0) / 1.5
}

/// `E[f(gbar X)]` for `X ~ Exp(1)`.
fn average_exponential(f: impl Fn(f64) -> f64, gbar: f64, knee: f64) -> f64 {
    average(f, |t| (-t).exp(), gbar, knee)
}

/// `E[f(gbar X)]` for `X ~ Gamma(2, 1)`.
fn average_gamma2(f: impl Fn(f64) -> f64, gbar: f64, knee: f64) -> f64 {
    average(f, |t| t * (-t).exp(), gbar, knee)
}

/// Exact Rayleigh-faded SER of `modulation` at mean SNR `gbar`.
pub fn ser_rayleigh(gbar: f64, modulation: Modulation) -> f64 {
    match modulation {
        Modulation::Bpsk => ser_ideal(gbar, ModulationSerParams::BPSK),
        _ if gbar.is_infinite() => 0.0,
        m => average_exponential(|g| ser_awgn(g, m), gbar, ser_knee(m)),
    }
}

/// Exact SER of `modulation` under two-branch diversity with per-branch
/// mean SNR `gbar`.
pub fn ser_two_branch(gbar: f64, modulation: Modulation) -> f64 {
    match modulation {
        Modulation::Bpsk => ser_iqsc(gbar, ModulationSerParams::BPSK),
        _ if gbar.is_infinite() => 0.0,
        m => average_gamma2(|g| ser_awgn(g, m), gbar, ser_knee(m)),
    }
}

/// Per-symbol breakdown of the uncompensated-IQI square-QAM SER.
#[derive(Debug, Clone, PartialEq)]
pub struct QamIqiSerTerms {
    pub order: u32,
    pub phi_sq: Vec<f64>,
    pub per_symbol: Vec<f64>,
}

impl QamIqiSerTerms {
    pub fn ser(&self) -> f64 {
        let mean = self.per_symbol.iter().sum::<f64>() / self.per_symbol.len() as f64;
        mean.clamp(0.0, 1.0)
    }
}

/// Evaluates the per-symbol SER terms for unit-energy square M-QAM.
pub fn qam_iqi_terms(es_n0: f64, order: u32, irr: f64, form: SerRxForm) -> Result<QamIqiSerTerms> {
    let order = square_qam_order(order)?;
    if !(irr > 0.0) {
        return Err(Error::invalid("irr", format!("must be positive, got {irr}")));
    }
    let con = crate::numerics::Constellation::from_order(order)?;
    let m = f64::from(order);
    let sm = m.sqrt();
    let c2 = 2.0 * (sm - 1.0) / m;
    let c3 = match form {
        SerRxForm::AsPrinted => 4.0 * (m - 1.0).powi(2) / (PI * m),
        SerRxForm::Corrected | SerRxForm::Textbook => 4.0 * (sm - 1.0).powi(2) / (PI * m),
    };
    // (irr + 1) N0 / irr, finite in the irr -> inf limit.
    let noise = (1.0 + 1.0 / irr) / es_n0;
    let phi_sq: Vec<f64> = con
        .points()
        .iter()
        .map(|i| 2.0 * (m - 1.0) / 3.0 * (i.norm_sqr() / irr + noise))
        .collect();
    let per_symbol = phi_sq
        .iter()
        .map(|&p2| {
            let root = (1.0 + p2).sqrt();
            let arg = match form {
                SerRxForm::Textbook => 1.0 / root,
                _ => 1.0 / (1.0 + p2),
            };
            (m - 1.0) / m - c2 / root - c3 / root * arg.atan()
        })
        .collect();
    Ok(QamIqiSerTerms { order, phi_sq, per_symbol })
}

/// Uncompensated-IQI SER of unit-energy square M-QAM, clipped to `[0, 1]`.
pub fn ser_iqi_qam(es_n0: f64, order: u32, irr: f64) -> Result<f64> {
    ser_iqi_qam_with_form(es_n0, order, irr, SerRxForm::Corrected)
}

pub fn ser_iqi_qam_with_form(es_n0: f64, order: u32, irr: f64, form: SerRxForm) -> Result<f64> {
    Ok(qam_iqi_terms(es_n0, order, irr, form)?.ser())
}

/// SNR in dB at which a decreasing `ser_of_db` crosses `target`, by bisection
/// on `[lo_db, hi_db]`. `None` when the target is not bracketed.
pub fn snr_db_at(ser_of_db: impl Fn(f64) -> f64, target: f64, lo_db: f64, hi_db: f64) -> Option<f64> {
    let (mut lo, mut hi) = (lo_db, hi_db);
    if ser_of_db(lo) < target || ser_of_db(hi) > target {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ser_of_db(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// How a Monte Carlo estimate may be compared against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ReferenceKind {
    /// Must lie inside the confidence interval.
    Exact,
    /// The band `value * (1 +- rel_tol)` must intersect the interval.
    Approximate { rel_tol: f64 },
    /// Reported only.
    Informational,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReference {
    pub value: f64,
    pub kind: ReferenceKind,
}

impl AnalyticReference {
    fn exact(value: f64) -> Self {
        Self { value, kind: ReferenceKind::Exact }
    }

    fn approximate(value: f64) -> Self {
        Self {
            value,
            kind: ReferenceKind::Approximate { rel_tol: 0.10 },
        }
    }

    fn informational(value: f64) -> Self {
        Self {
            value,
            kind: ReferenceKind::Informational,
        }
    }
}

fn link_es_n0(link: &LinkConfig) -> f64 {
    link.es_per_use() / link.noise().n0()
}

/// Closed-form SER matching `link`'s simulated chain, where one exists.
///
/// IQSC uses the exact combiner noise, so its per-branch SNR carries the
/// factor returned by [`iqsc_noise_penalty`]. A-IQSC borrows the IQSC value.
pub fn scheme_ser(link: &LinkConfig, form: SerRxForm) -> Option<AnalyticReference> {
    let m = link.constellation().modulation();
    let g = link_es_n0(link);
    let irr = link.iqi().irr_linear();
    match link.scheme() {
        SchemeId::Ideal | SchemeId::ZfCompensated => Some(AnalyticReference::exact(ser_rayleigh(g, m))),
        SchemeId::IqiUncompensated if link.iqi().is_ideal() => {
            Some(AnalyticReference::exact(ser_rayleigh(g, m)))
        }
        SchemeId::IqiUncompensated => {
            // Averaged over the fading in the mirror branch only through the
            // Gaussian-image approximation.
            let order = m.order();
            ser_iqi_qam_with_form(g, order, irr, form)
                .ok()
                .map(AnalyticReference::informational)
        }
        SchemeId::Iqsc => {
            let g = g * iqsc_noise_penalty(link.iqi());
            Some(AnalyticReference::exact(ser_two_branch(g, m)))
        }
        SchemeId::AIqsc => Some(AnalyticReference::approximate(ser_two_branch(g, m))),
        SchemeId::RcMrc => None,
    }
}

/// Closed-form outage of `link` at `rate` bits/s/Hz, where one exists.
pub fn scheme_outage(link: &LinkConfig, rate: f64) -> Option<AnalyticReference> {
    let g = link_es_n0(link);
    let irr = link.iqi().irr_linear();
    match link.scheme() {
        SchemeId::Ideal | SchemeId::ZfCompensated => Some(AnalyticReference::exact(outage_ideal(g, rate))),
        SchemeId::IqiUncompensated => Some(AnalyticReference::exact(outage_iqi(g, rate, irr))),
        SchemeId::Iqsc => Some(AnalyticReference::exact(outage_iqsc(g, rate))),
        SchemeId::AIqsc => Some(AnalyticReference::approximate(outage_iqsc(g, rate))),
        SchemeId::RcMrc => None,
    }
}
