use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ComplexSample;
use crate::{Error, Result};

/// Supported modulation alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [Self::Bpsk, Self::Qpsk, Self::Qam16, Self::Qam64];

    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Self::Bpsk),
            4 => Ok(Self::Qpsk),
            16 => Ok(Self::Qam16),
            64 => Ok(Self::Qam64),
            _ => Err(Error::invalid(
                "order",
                format!("unsupported constellation order {order}; expected 2, 4, 16 or 64"),
            )),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Self::Bpsk => 2,
            Self::Qpsk => 4,
            Self::Qam16 => 16,
            Self::Qam64 => 64,
        }
    }

    pub fn bits_per_symbol(self) -> u32 {
        self.order().trailing_zeros()
    }

    /// True for the square QAM family (QPSK counts as 4-QAM).
    pub fn is_square_qam(self) -> bool {
        !matches!(self, Self::Bpsk)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bpsk => "bpsk",
            Self::Qpsk => "qpsk",
            Self::Qam16 => "16qam",
            Self::Qam64 => "64qam",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" | "2" => Ok(Self::Bpsk),
            "qpsk" | "4qam" | "4" => Ok(Self::Qpsk),
            "16qam" | "16-qam" | "16" => Ok(Self::Qam16),
            "64qam" | "64-qam" | "64" => Ok(Self::Qam64),
            other => Err(Error::invalid("modulation", format!("unknown modulation `{other}`"))),
        }
    }
}

impl TryFrom<u32> for Modulation {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        Self::from_order(order)
    }
}

impl From<Modulation> for u32 {
    fn from(m: Modulation) -> u32 {
        m.order()
    }
}

/// Gray-mapped alphabet normalized to unit average symbol energy.
///
/// Square QAM indices split into an in-phase half (high bits) and a
/// quadrature half (low bits); each half is Gray-coded along its axis, so
/// grid neighbours differ in exactly one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<ComplexSample>,
}

fn inverse_gray(mut g: u32) -> u32 {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Amplitude level for a Gray label on an axis with `levels` positions,
/// running from `+(levels-1)` down to `-(levels-1)`.
fn axis_level(label: u32, levels: u32) -> f64 {
    let position = inverse_gray(label);
    f64::from(levels - 1) - 2.0 * f64::from(position)
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let m = modulation.order();
        let points = match modulation {
            Modulation::Bpsk => (0..m).map(|i| ComplexSample::new(axis_level(i, 2), 0.0)).collect(),
            _ => {
                let axis_bits = modulation.bits_per_symbol() / 2;
                let levels = 1u32 << axis_bits;
                let scale = (2.0 * f64::from(m - 1) / 3.0).sqrt().recip();
                (0..m)
                    .map(|i| {
                        let re = axis_level(i >> axis_bits, levels);
                        let im = axis_level(i & (levels - 1), levels);
                        ComplexSample::new(re * scale, im * scale)
                    })
                    .collect()
            }
        };
        Self { modulation, points }
    }

    pub fn from_order(order: u32) -> Result<Self> {
        Modulation::from_order(order).map(Self::new)
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.modulation.bits_per_symbol()
    }

    pub fn points(&self) -> &[ComplexSample] {
        &self.points
    }

    pub fn modulate(&self, index: usize) -> Result<ComplexSample> {
        self.points.get(index).copied().ok_or_else(|| {
            Error::invalid(
                "index",
                format!("symbol index {index} out of range for {}-point alphabet", self.order()),
            )
        })
    }

    /// Minimum-distance decision. Distances equal to within a relative
    /// 1e-12 count as ties and resolve to the lowest index.
    pub fn detect_nearest(&self, y: ComplexSample) -> usize {
        let mut best = 0;
        let mut best_d = (y - self.points[0]).norm_sqr();
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let d = (y - p).norm_sqr();
            if d < best_d - 1e-12 * (1.0 + best_d) {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}
