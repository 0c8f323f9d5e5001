//! Sweep configuration: flat JSON keys, validated one key at a time.

use serde_json::{json, Map, Value};

use crate::analytics::SerRxForm;
use crate::impairment::IqiParams;
use crate::numerics::Modulation;
use crate::schemes::{PowerAllocation, SchemeId};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5EED_1D5C_0000_2016;
pub const DEFAULT_MIN_ERRORS: u64 = 200;
pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;
/// Smallest `min_errors` for which the normal-theory interval is trusted.
pub const MIN_ERRORS_FLOOR: u64 = 50;

const KEYS: &[&str] = &[
    "schemes",
    "order",
    "irr_db",
    "epsilon",
    "phi_deg",
    "snr_db",
    "rate",
    "metric",
    "seed",
    "min_errors",
    "max_trials",
    "power",
    "ser_form",
    "tx_iqi",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricSelection {
    Ser,
    Outage,
    Both,
}

impl MetricSelection {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ser => "ser",
            Self::Outage => "outage",
            Self::Both => "both",
        }
    }

    pub fn includes_ser(self) -> bool {
        matches!(self, Self::Ser | Self::Both)
    }

    pub fn includes_outage(self) -> bool {
        matches!(self, Self::Outage | Self::Both)
    }
}

impl std::str::FromStr for MetricSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ser" => Ok(Self::Ser),
            "outage" => Ok(Self::Outage),
            "both" => Ok(Self::Both),
            _ => Err(Error::config("metric", format!("expected ser, outage or both, got `{s}`"))),
        }
    }
}

/// Receiver imbalance grid.
#[derive(Debug, Clone, PartialEq)]
pub enum IqiSpec {
    /// One point per IRR. With `phi_deg` the phase is pinned and the
    /// amplitude solved for; otherwise the imbalance is amplitude-only.
    Irr { irr_db: Vec<f64>, phi_deg: Option<f64> },
    /// A single explicit `(epsilon, phi)` pair.
    Explicit { epsilon: f64, phi_deg: f64 },
}

/// One resolved imbalance setting and its IRR label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqiPoint {
    pub irr_db: f64,
    pub params: IqiParams,
}

impl IqiSpec {
    pub fn resolve(&self) -> Result<Vec<IqiPoint>> {
        match self {
            Self::Irr { irr_db, phi_deg } => irr_db
                .iter()
                .map(|&db| {
                    let params = match phi_deg {
                        Some(p) if db.is_finite() => IqiParams::from_irr_db_with_phase(db, p.to_radians()),
                        _ => IqiParams::from_irr_db(db),
                    }
                    .map_err(|e| Error::config("irr_db", e.to_string()))?;
                    Ok(IqiPoint { irr_db: db, params })
                })
                .collect(),
            Self::Explicit { epsilon, phi_deg } => {
                let params = IqiParams::new(*epsilon, phi_deg.to_radians())
                    .map_err(|e| Error::config("epsilon", e.to_string()))?;
                Ok(vec![IqiPoint {
                    irr_db: params.irr_db(),
                    params,
                }])
            }
        }
    }
}

/// A full Monte Carlo / analytic sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub schemes: Vec<SchemeId>,
    pub modulations: Vec<Modulation>,
    pub iqi: IqiSpec,
    pub snr_db: Vec<f64>,
    pub rates: Vec<f64>,
    pub metric: MetricSelection,
    pub seed: u64,
    pub min_errors: u64,
    pub max_trials: u64,
    pub power: PowerAllocation,
    pub ser_form: SerRxForm,
}

impl SweepConfig {
    /// A config with defaults for everything but the grids.
    pub fn new(schemes: Vec<SchemeId>, iqi: IqiSpec, snr_db: Vec<f64>) -> Self {
        Self {
            schemes,
            modulations: vec![Modulation::Bpsk],
            iqi,
            snr_db,
            rates: Vec::new(),
            metric: MetricSelection::Ser,
            seed: DEFAULT_SEED,
            min_errors: DEFAULT_MIN_ERRORS,
            max_trials: DEFAULT_MAX_TRIALS,
            power: PowerAllocation::EqualEnergy,
            ser_form: SerRxForm::Corrected,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::config("<file>", format!("invalid JSON: {e}")))?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::config("<file>", "top level must be a JSON object"))?;
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::config(k.clone(), "unknown key"));
        }
        let mut cfg = Self::new(Vec::new(), IqiSpec::Irr { irr_db: Vec::new(), phi_deg: None }, Vec::new());
        cfg.apply(obj, true)?;
        Ok(cfg)
    }

    /// Overrides the keys present in `obj`; the result is revalidated.
    pub fn merge_json(&mut self, obj: &Map<String, Value>) -> Result<()> {
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::config(k.clone(), "unknown key"));
        }
        self.apply(obj, false)
    }

    fn apply(&mut self, obj: &Map<String, Value>, fresh: bool) -> Result<()> {
        if let Some(v) = obj.get("tx_iqi") {
            match v.as_bool() {
                Some(false) => {}
                Some(true) => return Err(Error::config("tx_iqi", "transmitter IQI is not modelled")),
                None => return Err(Error::config("tx_iqi", "expected a boolean")),
            }
        }
        if let Some(v) = obj.get("schemes") {
            self.schemes = list(v, "schemes")?
                .iter()
                .map(|s| {
                    s.as_str()
                        .ok_or_else(|| Error::config("schemes", "entries must be strings"))?
                        .parse::<SchemeId>()
                        .map_err(|e| Error::config("schemes", e.to_string()))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = obj.get("order") {
            self.modulations = list(v, "order")?
                .iter()
                .map(|m| {
                    let order = m
                        .as_u64()
                        .and_then(|o| u32::try_from(o).ok())
                        .ok_or_else(|| Error::config("order", "entries must be positive integers"))?;
                    Modulation::from_order(order).map_err(|e| Error::config("order", e.to_string()))
                })
                .collect::<Result<_>>()?;
        }
        let has_irr = obj.contains_key("irr_db");
        let has_eps = obj.contains_key("epsilon");
        if has_irr && has_eps {
            return Err(Error::config("epsilon", "give either irr_db or epsilon, not both"));
        }
        let phi_deg = obj.get("phi_deg").map(|v| number(v, "phi_deg")).transpose()?;
        if has_irr {
            let irr_db = list(&obj["irr_db"], "irr_db")?
                .iter()
                .map(|v| extended_number(v, "irr_db"))
                .collect::<Result<Vec<_>>>()?;
            self.iqi = IqiSpec::Irr { irr_db, phi_deg };
        } else if has_eps {
            self.iqi = IqiSpec::Explicit {
                epsilon: number(&obj["epsilon"], "epsilon")?,
                phi_deg: phi_deg.unwrap_or(0.0),
            };
        } else if let Some(p) = phi_deg {
            match &mut self.iqi {
                IqiSpec::Irr { phi_deg, .. } => *phi_deg = Some(p),
                IqiSpec::Explicit { phi_deg, .. } => *phi_deg = p,
            }
        }
        if let Some(v) = obj.get("snr_db") {
            self.snr_db = list(v, "snr_db")?
                .iter()
                .map(|v| extended_number(v, "snr_db"))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = obj.get("rate") {
            self.rates = list(v, "rate")?
                .iter()
                .map(|v| number(v, "rate"))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = obj.get("metric") {
            self.metric = string(v, "metric")?.parse()?;
        }
        if let Some(v) = obj.get("seed") {
            self.seed = v.as_u64().ok_or_else(|| Error::config("seed", "expected an unsigned 64-bit integer"))?;
        }
        if let Some(v) = obj.get("min_errors") {
            self.min_errors = count(v, "min_errors")?;
        }
        if let Some(v) = obj.get("max_trials") {
            self.max_trials = count(v, "max_trials")?;
        }
        if let Some(v) = obj.get("power") {
            self.power = string(v, "power")?
                .parse()
                .map_err(|e: Error| Error::config("power", e.to_string()))?;
        }
        if let Some(v) = obj.get("ser_form") {
            self.ser_form = string(v, "ser_form")?
                .parse()
                .map_err(|e: Error| Error::config("ser_form", e.to_string()))?;
        }
        if fresh && !has_irr && !has_eps {
            return Err(Error::config("irr_db", "missing: give irr_db or epsilon"));
        }
        self.validate()
    }

    /// Checks the cross-key invariants.
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "must not be empty"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("snr_db", "must not be empty"));
        }
        if self.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::config("snr_db", "entries must be numbers or \"inf\""));
        }
        if self.metric.includes_ser() && self.modulations.is_empty() {
            return Err(Error::config("order", "must not be empty"));
        }
        if self.metric.includes_outage() {
            if self.rates.is_empty() {
                return Err(Error::config("rate", "required for outage"));
            }
            if self.rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                return Err(Error::config("rate", "entries must be positive"));
            }
        }
        match &self.iqi {
            IqiSpec::Irr { irr_db, .. } if irr_db.is_empty() => {
                return Err(Error::config("irr_db", "must not be empty"));
            }
            _ => {}
        }
        self.iqi.resolve()?;
        if self.min_errors < MIN_ERRORS_FLOOR {
            return Err(Error::config(
                "min_errors",
                format!("must be at least {MIN_ERRORS_FLOOR}, got {}", self.min_errors),
            ));
        }
        if self.max_trials == 0 {
            return Err(Error::config("max_trials", "must be positive"));
        }
        Ok(())
    }

    /// Flat-key JSON that [`SweepConfig::from_json`] reads back unchanged.
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert(
            "schemes".into(),
            self.schemes.iter().map(|s| Value::from(s.name())).collect(),
        );
        obj.insert(
            "order".into(),
            self.modulations.iter().map(|m| Value::from(m.order())).collect(),
        );
        match &self.iqi {
            IqiSpec::Irr { irr_db, phi_deg } => {
                obj.insert("irr_db".into(), irr_db.iter().map(|&x| extended_value(x)).collect());
                if let Some(p) = phi_deg {
                    obj.insert("phi_deg".into(), json!(p));
                }
            }
            IqiSpec::Explicit { epsilon, phi_deg } => {
                obj.insert("epsilon".into(), json!(epsilon));
                obj.insert("phi_deg".into(), json!(phi_deg));
            }
        }
        obj.insert("snr_db".into(), self.snr_db.iter().map(|&x| extended_value(x)).collect());
        obj.insert("rate".into(), json!(self.rates));
        obj.insert("metric".into(), json!(self.metric.name()));
        obj.insert("seed".into(), json!(self.seed));
        obj.insert("min_errors".into(), json!(self.min_errors));
        obj.insert("max_trials".into(), json!(self.max_trials));
        obj.insert("power".into(), json!(self.power.name()));
        obj.insert("ser_form".into(), json!(self.ser_form.name()));
        Value::Object(obj)
    }
}

fn list<'a>(v: &'a Value, key: &str) -> Result<Vec<&'a Value>> {
    match v {
        Value::Array(items) => Ok(items.iter().collect()),
        Value::Null => Err(Error::config(key, "must not be null")),
        other => Ok(vec![other]),
    }
}

fn number(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(key, format!("expected a number, got {v}")))
}

/// A number or the string `"inf"`.
fn extended_number(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        _ => number(v, key).map_err(|_| Error::config(key, format!("expected a number or \"inf\", got {v}"))),
    }
}

fn extended_value(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else {
        json!(x)
    }
}

fn string<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::config(key, format!("expected a string, got {v}")))
}

fn count(v: &Value, key: &str) -> Result<u64> {
    if let Some(n) = v.as_u64() {
        return Ok(n);
    }
    // Accept integral floats such as 1e7.
    match v.as_f64() {
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(Error::config(key, format!("expected a non-negative integer, got {v}"))),
    }
}
