//! Per-mirror-pair transceiver chains.
//!
//! Every chain works on one mirror subcarrier pair `(k, -k)` over one coding
//! block: draw the channel and data, encode, pass through the balanced
//! channel with AWGN, apply receiver IQI, combine or equalize, detect.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytics;
use crate::channel::{MirrorPairChannel, NoiseModel};
use crate::impairment::IqiParams;
use crate::numerics::{ComplexSample, Constellation, Modulation};
use crate::{Error, Result};

/// Transceiver chain exercised by a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SchemeId {
    /// No IQI at the receiver; one-tap equalizer per subcarrier.
    Ideal,
    /// IQI present, image treated as noise.
    IqiUncompensated,
    /// IQI removed by inverting the known 2x2 mixing, then one-tap equalizer.
    ZfCompensated,
    /// Two-slot mirror-pair block code with the interference-cancelling combiner.
    Iqsc,
    /// Single-slot variant sending `s` on `k` and `s*` on `-k`.
    AIqsc,
    /// Repetition of `s` on both mirror subcarriers with MRC.
    RcMrc,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        Self::Ideal,
        Self::IqiUncompensated,
        Self::ZfCompensated,
        Self::Iqsc,
        Self::AIqsc,
        Self::RcMrc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::IqiUncompensated => "iqi-uncompensated",
            Self::ZfCompensated => "zf-compensated",
            Self::Iqsc => "iqsc",
            Self::AIqsc => "a-iqsc",
            Self::RcMrc => "rc-mrc",
        }
    }

    /// One information symbol per subcarrier per two channel uses.
    pub fn is_half_rate(self) -> bool {
        matches!(self, Self::Iqsc | Self::AIqsc | Self::RcMrc)
    }

    pub fn slots_per_block(self) -> u32 {
        match self {
            Self::Iqsc => 2,
            _ => 1,
        }
    }

    /// Information symbols detected per mirror pair per block.
    pub fn symbols_per_block(self) -> u32 {
        match self {
            Self::AIqsc | Self::RcMrc => 1,
            _ => 2,
        }
    }

    /// Independent noise samples drawn per mirror pair per block.
    pub fn noise_draws_per_block(self) -> u32 {
        2 * self.slots_per_block()
    }

    /// Outage threshold `2^R - 1`, or `2^(2R) - 1` for half-rate schemes.
    pub fn outage_threshold(self, rate: f64) -> f64 {
        let bits = if self.is_half_rate() { 2.0 * rate } else { rate };
        bits.exp2() - 1.0
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "ideal" => Self::Ideal,
            "iqi-uncompensated" | "iqi" | "uncompensated" => Self::IqiUncompensated,
            "zf-compensated" | "zf" => Self::ZfCompensated,
            "iqsc" => Self::Iqsc,
            "a-iqsc" | "aiqsc" => Self::AIqsc,
            "rc-mrc" | "rc" | "rcmrc" => Self::RcMrc,
            _ => return Err(Error::invalid("scheme", format!("unknown scheme `{s}`"))),
        })
    }
}

impl TryFrom<String> for SchemeId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SchemeId> for String {
    fn from(s: SchemeId) -> String {
        s.name().to_owned()
    }
}

/// Energy split for the half-rate schemes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerAllocation {
    /// Each of the two copies carries `Es/2`: the same energy per
    /// information symbol as the rate-1 baselines.
    #[default]
    EqualEnergy,
    /// Each copy carries `Es`: the same power per channel use as the rate-1
    /// baselines, doubling the energy per information symbol.
    EqualPower,
}

impl PowerAllocation {
    /// Energy per transmitted copy for `scheme` given symbol energy `es`.
    pub fn energy_per_use(self, scheme: SchemeId, es: f64) -> f64 {
        match (self, scheme.is_half_rate()) {
            (Self::EqualEnergy, true) => 0.5 * es,
            _ => es,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::EqualEnergy => "equal-energy",
            Self::EqualPower => "equal-power",
        }
    }
}

impl FromStr for PowerAllocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-energy" => Ok(Self::EqualEnergy),
            "equal-power" => Ok(Self::EqualPower),
            _ => Err(Error::invalid("power", format!("unknown power allocation `{s}`"))),
        }
    }
}

/// Signals on `(k, -k)` in one time slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotPair {
    pub k: ComplexSample,
    pub mk: ComplexSample,
}

impl SlotPair {
    pub fn energy(&self) -> f64 {
        self.k.norm_sqr() + self.mk.norm_sqr()
    }
}

/// Two-slot IQSC transmission for one mirror pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqscBlock {
    pub slot1: SlotPair,
    pub slot2: SlotPair,
}

impl IqscBlock {
    pub fn energy(&self) -> f64 {
        self.slot1.energy() + self.slot2.energy()
    }
}

/// IQSC effective channel: `a1 = K1 h(k)`, `a2 = K2 h*(-k)`,
/// `a3 = K1 h(-k)`, `a4 = K2 h*(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqscChannelParams {
    pub a1: ComplexSample,
    pub a2: ComplexSample,
    pub a3: ComplexSample,
    pub a4: ComplexSample,
}

impl IqscChannelParams {
    pub fn new(iqi: &IqiParams, ch: &MirrorPairChannel) -> Self {
        Self {
            a1: iqi.k1() * ch.h_k,
            a2: iqi.k2() * ch.h_mk.conj(),
            a3: iqi.k1() * ch.h_mk,
            a4: iqi.k2() * ch.h_k.conj(),
        }
    }

    /// Combiner gain `sum |a_i|^2 = (|K1|^2 + |K2|^2)(|h(k)|^2 + |h(-k)|^2)`.
    pub fn gain(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr() + self.a3.norm_sqr() + self.a4.norm_sqr()
    }
}

/// Noise variance at either IQSC combiner output.
///
/// The composite noises `w1(k)` and `w1(-k)` share `n1(k)` and `n1(-k)`, so
/// their contributions add coherently: the variance is
/// `((|K1|^2 + |K2|^2)^2 + 4|K1|^2|K2|^2)(|h(k)|^2 + |h(-k)|^2) N0`.
pub fn iqsc_noise_variance(iqi: &IqiParams, ch: &MirrorPairChannel, n0: f64) -> f64 {
    let p = iqi.power_gain();
    let cross = 4.0 * iqi.k1().norm_sqr() * iqi.k2().norm_sqr();
    (p * p + cross) * ch.total_gain() * n0
}

/// Combiner noise variance when the composite noises are treated as
/// independent: `(|K1|^2 + |K2|^2)^2 (|h(k)|^2 + |h(-k)|^2) N0`.
pub fn iqsc_nominal_noise_variance(iqi: &IqiParams, ch: &MirrorPairChannel, n0: f64) -> f64 {
    let p = iqi.power_gain();
    p * p * ch.total_gain() * n0
}

/// Ratio of nominal to exact IQSC combiner noise variance; equals
/// `(IRR + 1)^2 / ((IRR + 1)^2 + 4 IRR)`, 1 for an ideal front end.
pub fn iqsc_noise_penalty(iqi: &IqiParams) -> f64 {
    let p = iqi.power_gain();
    let cross = 4.0 * iqi.k1().norm_sqr() * iqi.k2().norm_sqr();
    p * p / (p * p + cross)
}

/// A-IQSC effective channel: `alpha = a1 + a2`, `beta = a3 + a4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AIqscChannelParams {
    pub alpha: ComplexSample,
    pub beta: ComplexSample,
}

impl AIqscChannelParams {
    pub fn new(iqi: &IqiParams, ch: &MirrorPairChannel) -> Self {
        Self::from(IqscChannelParams::new(iqi, ch))
    }

    /// `|alpha|^2 + |beta|^2`.
    pub fn gain(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    /// Exact combiner noise variance. `n(k)` enters through
    /// `alpha* K1 + beta K2*` and `n*(-k)` through `alpha* K2 + beta K1*`.
    pub fn noise_variance(&self, iqi: &IqiParams, n0: f64) -> f64 {
        let (k1, k2) = (iqi.k1(), iqi.k2());
        let c1 = self.alpha.conj() * k1 + self.beta * k2.conj();
        let c2 = self.alpha.conj() * k2 + self.beta * k1.conj();
        (c1.norm_sqr() + c2.norm_sqr()) * n0
    }
}

impl From<IqscChannelParams> for AIqscChannelParams {
    fn from(p: IqscChannelParams) -> Self {
        Self {
            alpha: p.a1 + p.a2,
            beta: p.a3 + p.a4,
        }
    }
}

/// IQSC encoder. Slot 1 sends `s*(-k)` on `-k` and `s(k)` on `k`; slot 2
/// sends `s(k)` on `-k` and `-s*(-k)` on `k`. Each entry is scaled by
/// `sqrt(es_per_use)`.
pub fn iqsc_encode(s_k: ComplexSample, s_mk: ComplexSample, es_per_use: f64) -> IqscBlock {
    let g = es_per_use.sqrt();
    IqscBlock {
        slot1: SlotPair {
            k: s_k * g,
            mk: s_mk.conj() * g,
        },
        slot2: SlotPair {
            k: -s_mk.conj() * g,
            mk: s_k * g,
        },
    }
}

/// IQSC combiner. `x1`, `x2` are received on `k` in slots 1 and 2; `x3`,
/// `x4` on `-k`. Returns `(y(k), y(-k))`, each `sum |a_i|^2 s + z`.
pub fn iqsc_combine(
    x1: ComplexSample,
    x2: ComplexSample,
    x3: ComplexSample,
    x4: ComplexSample,
    p: &IqscChannelParams,
) -> (ComplexSample, ComplexSample) {
    let y_k = p.a1.conj() * x1 + p.a2 * x2.conj() + p.a3.conj() * x4 + p.a4 * x3.conj();
    let y_mk = -p.a1 * x2.conj() + p.a2.conj() * x1 + p.a3 * x3.conj() - p.a4.conj() * x4;
    (y_k, y_mk)
}

/// A-IQSC encoder: `s*` on `-k`, `s` on `k`.
pub fn aiqsc_encode(s_k: ComplexSample, es_per_use: f64) -> SlotPair {
    let g = es_per_use.sqrt();
    SlotPair {
        k: s_k * g,
        mk: s_k.conj() * g,
    }
}

/// A-IQSC combiner `y = alpha* x(k) + beta x*(-k)`.
pub fn aiqsc_combine(x_k: ComplexSample, x_mk: ComplexSample, p: &AIqscChannelParams) -> ComplexSample {
    p.alpha.conj() * x_k + p.beta * x_mk.conj()
}

/// Repetition encoder: the same symbol on both mirror subcarriers.
pub fn rc_encode(s: ComplexSample, es_per_use: f64) -> SlotPair {
    let g = es_per_use.sqrt();
    SlotPair { k: s * g, mk: s * g }
}

/// MRC over the mirror pair, `y = h*(k) x(k) + h*(-k) x(-k)`. The IQI
/// self-interference `2 K2 h*(k) h*(-k) s*` is left in place.
pub fn rc_combine(x_k: ComplexSample, x_mk: ComplexSample, h_k: ComplexSample, h_mk: ComplexSample) -> ComplexSample {
    h_k.conj() * x_k + h_mk.conj() * x_mk
}

/// Inverse of the receiver mixing `(r(k), r*(-k)) = [[K1, K2], [K2*, K1*]] (r_id(k), r_id*(-k))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZfEqualizer {
    k1: ComplexSample,
    k2: ComplexSample,
    inv_det: f64,
}

impl ZfEqualizer {
    pub fn new(iqi: &IqiParams) -> Result<Self> {
        let det = iqi.mixing_determinant();
        if !(det.abs() > 1e-12 * iqi.power_gain()) {
            return Err(Error::DegenerateMixing { determinant: det });
        }
        Ok(Self {
            k1: iqi.k1(),
            k2: iqi.k2(),
            inv_det: det.recip(),
        })
    }

    #[inline]
    pub fn apply(&self, r_k: ComplexSample, r_mk: ComplexSample) -> (ComplexSample, ComplexSample) {
        let a = (self.k1.conj() * r_k - self.k2 * r_mk.conj()) * self.inv_det;
        let b = (self.k1.conj() * r_mk - self.k2 * r_k.conj()) * self.inv_det;
        (a, b)
    }
}

/// Undoes receiver IQI on a mirror pair given perfect knowledge of `K1, K2`.
pub fn zf_compensate(
    r_k: ComplexSample,
    r_mk: ComplexSample,
    params: &IqiParams,
) -> Result<(ComplexSample, ComplexSample)> {
    Ok(ZfEqualizer::new(params)?.apply(r_k, r_mk))
}

/// Result of one coding block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub symbol_errors: u32,
    pub symbols_sent: u32,
    /// Instantaneous post-combining SNR/SINR for the block's channel.
    pub post_snr: f64,
}

/// A fully resolved link: scheme, impairment, noise and alphabet.
#[derive(Debug, Clone)]
pub struct LinkConfig {
    scheme: SchemeId,
    iqi: IqiParams,
    noise: NoiseModel,
    constellation: Constellation,
    power: PowerAllocation,
    es_per_use: f64,
    zf: Option<ZfEqualizer>,
}

impl LinkConfig {
    /// Unit symbol energy, `Es/N0 = snr_db`. The ideal scheme ignores `iqi`.
    pub fn new(
        scheme: SchemeId,
        iqi: IqiParams,
        snr_db: f64,
        modulation: Modulation,
        power: PowerAllocation,
    ) -> Result<Self> {
        let iqi = if scheme == SchemeId::Ideal { IqiParams::ideal() } else { iqi };
        let zf = match scheme {
            SchemeId::ZfCompensated => Some(ZfEqualizer::new(&iqi)?),
            _ => None,
        };
        Ok(Self {
            scheme,
            iqi,
            noise: NoiseModel::from_snr_db(snr_db)?,
            constellation: Constellation::new(modulation),
            power,
            es_per_use: power.energy_per_use(scheme, 1.0),
            zf,
        })
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn iqi(&self) -> &IqiParams {
        &self.iqi
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn power(&self) -> PowerAllocation {
        self.power
    }

    /// Energy of each transmitted copy.
    pub fn es_per_use(&self) -> f64 {
        self.es_per_use
    }

    /// Instantaneous post-combining SNR/SINR of the scheme on `ch`.
    pub fn instantaneous_snr(&self, ch: &MirrorPairChannel) -> f64 {
        let n0 = self.noise.n0();
        let g_k = ch.h_k.norm_sqr() * self.es_per_use / n0;
        let g_mk = ch.h_mk.norm_sqr() * self.es_per_use / n0;
        match self.scheme {
            SchemeId::Ideal | SchemeId::ZfCompensated => g_k,
            SchemeId::IqiUncompensated => analytics::sinr_iqi(g_k, g_mk, self.iqi.irr_linear()),
            // Half-rate copies already carry es_per_use, so the sum is the
            // equal-power form of (gid(k) + gid(-k)) / 2.
            SchemeId::Iqsc => g_k + g_mk,
            SchemeId::AIqsc => {
                let p = AIqscChannelParams::new(&self.iqi, ch);
                let gain = p.gain();
                gain * gain * self.es_per_use / p.noise_variance(&self.iqi, n0)
            }
            SchemeId::RcMrc => {
                analytics::sinr_rc(ch.h_k, ch.h_mk, self.iqi.irr_linear(), self.es_per_use / n0)
            }
        }
    }

    fn random_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, ComplexSample) {
        let idx = rng.random_range(0..self.constellation.order());
        (idx, self.constellation.points()[idx])
    }

    /// Passes one slot through the balanced channel, AWGN and receiver IQI.
    #[inline]
    fn receive<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        ch: &MirrorPairChannel,
        tx: SlotPair,
    ) -> (ComplexSample, ComplexSample) {
        let r_k = self.noise.add(rng, ch.h_k * tx.k);
        let r_mk = self.noise.add(rng, ch.h_mk * tx.mk);
        if self.scheme == SchemeId::Ideal {
            (r_k, r_mk)
        } else {
            self.iqi.apply_rx_iqi(r_k, r_mk)
        }
    }

    fn detect(&self, y: ComplexSample, sent: usize) -> u32 {
        u32::from(self.constellation.detect_nearest(y) != sent)
    }

    /// Runs one Monte Carlo block: channel, data, encoding, IQI, AWGN,
    /// combining and detection.
    pub fn run_block<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let ch = MirrorPairChannel::sample(rng);
        let g = self.es_per_use.sqrt();
        let symbol_errors = match self.scheme {
            SchemeId::Ideal | SchemeId::IqiUncompensated | SchemeId::ZfCompensated => {
                let (i_k, s_k) = self.random_symbol(rng);
                let (i_mk, s_mk) = self.random_symbol(rng);
                let (r_k, r_mk) = self.receive(rng, &ch, SlotPair { k: s_k * g, mk: s_mk * g });
                let (y_k, y_mk) = match self.scheme {
                    SchemeId::Ideal => (r_k / ch.h_k, r_mk / ch.h_mk),
                    SchemeId::IqiUncompensated => {
                        let k1 = self.iqi.k1();
                        (r_k / (k1 * ch.h_k), r_mk / (k1 * ch.h_mk))
                    }
                    _ => {
                        let zf = self.zf.as_ref().expect("ZF equalizer built with the link");
                        let (a, b) = zf.apply(r_k, r_mk);
                        (a / ch.h_k, b / ch.h_mk)
                    }
                };
                self.detect(y_k / g, i_k) + self.detect(y_mk / g, i_mk)
            }
            SchemeId::Iqsc => {
                let (i_k, s_k) = self.random_symbol(rng);
                let (i_mk, s_mk) = self.random_symbol(rng);
                let block = iqsc_encode(s_k, s_mk, self.es_per_use);
                let (x1, x3) = self.receive(rng, &ch, block.slot1);
                let (x2, x4) = self.receive(rng, &ch, block.slot2);
                let p = IqscChannelParams::new(&self.iqi, &ch);
                let (y_k, y_mk) = iqsc_combine(x1, x2, x3, x4, &p);
                let scale = p.gain() * g;
                self.detect(y_k / scale, i_k) + self.detect(y_mk / scale, i_mk)
            }
            SchemeId::AIqsc => {
                let (i, s) = self.random_symbol(rng);
                let (x_k, x_mk) = self.receive(rng, &ch, aiqsc_encode(s, self.es_per_use));
                let p = AIqscChannelParams::new(&self.iqi, &ch);
                let y = aiqsc_combine(x_k, x_mk, &p);
                self.detect(y / (p.gain() * g), i)
            }
            SchemeId::RcMrc => {
                let (i, s) = self.random_symbol(rng);
                let (x_k, x_mk) = self.receive(rng, &ch, rc_encode(s, self.es_per_use));
                let y = rc_combine(x_k, x_mk, ch.h_k, ch.h_mk);
                self.detect(y / (self.iqi.k1() * ch.total_gain() * g), i)
            }
        };
        TrialOutcome {
            symbol_errors,
            symbols_sent: self.scheme.symbols_per_block(),
            post_snr: self.instantaneous_snr(&ch),
        }
    }
}

/// One-shot convenience wrapper around [`LinkConfig::run_block`] using the
/// equal-energy power split.
pub fn run_block<R: Rng + ?Sized>(
    scheme: SchemeId,
    rng: &mut R,
    iqi: IqiParams,
    snr_db: f64,
    constellation: &Constellation,
) -> Result<TrialOutcome> {
    let link = LinkConfig::new(scheme, iqi, snr_db, constellation.modulation(), PowerAllocation::EqualEnergy)?;
    Ok(link.run_block(rng))
}
