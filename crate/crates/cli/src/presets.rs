//! Named sweeps reproducing the standard comparison plots.

use iqsc_core::analytics::SerRxForm;
use iqsc_core::engine::{IqiSpec, MetricSelection, SweepConfig};
use iqsc_core::numerics::Modulation;
use iqsc_core::schemes::{PowerAllocation, SchemeId};

pub const NAMES: &[&str] = &[
    "fig2-outage-r1",
    "fig3-outage-vs-rate",
    "fig4-outage",
    "fig5-ser-modulations",
    "fig6-ser-qpsk-irr",
    "fig7-ser-16qam-floors",
];

const IRR_GRID: [f64; 4] = [20.0, 25.0, 30.0, 35.0];

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

fn outage_vs_snr(rate: f64) -> SweepConfig {
    SweepConfig {
        metric: MetricSelection::Outage,
        rates: vec![rate],
        // Outage curves compare schemes at equal per-use SNR.
        power: PowerAllocation::EqualPower,
        ..SweepConfig::new(
            vec![SchemeId::Ideal, SchemeId::IqiUncompensated, SchemeId::Iqsc],
            IqiSpec::Irr { irr_db: IRR_GRID.to_vec(), phi_deg: None },
            grid(0.0, 40.0, 2.5),
        )
    }
}

pub fn preset(name: &str) -> Option<SweepConfig> {
    let cfg = match name {
        "fig2-outage-r1" => outage_vs_snr(1.0),
        "fig4-outage" => outage_vs_snr(2.0),
        "fig3-outage-vs-rate" => SweepConfig {
            rates: grid(0.5, 6.0, 0.25),
            snr_db: vec![35.0],
            ..outage_vs_snr(2.0)
        },
        "fig5-ser-modulations" => SweepConfig {
            modulations: vec![Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16],
            ..SweepConfig::new(
                vec![
                    SchemeId::Ideal,
                    SchemeId::IqiUncompensated,
                    SchemeId::ZfCompensated,
                    SchemeId::Iqsc,
                    SchemeId::AIqsc,
                ],
                IqiSpec::Irr { irr_db: vec![20.0], phi_deg: Some(5.0) },
                grid(0.0, 40.0, 2.5),
            )
        },
        "fig6-ser-qpsk-irr" => SweepConfig {
            modulations: vec![Modulation::Qpsk],
            ..SweepConfig::new(
                vec![SchemeId::Ideal, SchemeId::IqiUncompensated, SchemeId::Iqsc],
                IqiSpec::Irr { irr_db: IRR_GRID.to_vec(), phi_deg: None },
                grid(0.0, 40.0, 2.5),
            )
        },
        "fig7-ser-16qam-floors" => SweepConfig {
            modulations: vec![Modulation::Qam16],
            ..SweepConfig::new(
                vec![
                    SchemeId::Ideal,
                    SchemeId::IqiUncompensated,
                    SchemeId::Iqsc,
                    SchemeId::AIqsc,
                    SchemeId::RcMrc,
                ],
                IqiSpec::Irr { irr_db: vec![20.0], phi_deg: Some(5.0) },
                grid(0.0, 60.0, 5.0),
            )
        },
        _ => return None,
    };
    debug_assert_eq!(cfg.ser_form, SerRxForm::Corrected);
    Some(cfg)
}

/// What `validate` runs when given neither a config nor a preset: Ideal and
/// IQSC, BPSK and QPSK, SER and outage at R = 1, IRR 20 dB, 0..30 dB. The
/// trial cap is high enough that every point reaches `min_errors`.
pub fn default_validation() -> SweepConfig {
    SweepConfig {
        modulations: vec![Modulation::Bpsk, Modulation::Qpsk],
        metric: MetricSelection::Both,
        rates: vec![1.0],
        max_trials: 10_000_000_000,
        ..SweepConfig::new(
            vec![SchemeId::Ideal, SchemeId::Iqsc],
            IqiSpec::Irr { irr_db: vec![20.0], phi_deg: None },
            grid(0.0, 30.0, 5.0),
        )
    }
}
