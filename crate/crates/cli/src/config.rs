//! Scenario configuration: JSON with explicit `{value, unit}` pairs.
//!
//! Units are accepted only at this boundary; everything behind it is SI.
//! Unknown fields and units outside the whitelist are rejected.

use serde::{Deserialize, Serialize};
use spdc_core::crystal::{CrystalSpec, SellmeierSet};
use spdc_core::qkd::QkdScenario;
use spdc_core::temporal::{ChannelParams, DetectorParams, SourceParams};

use crate::CliError;

/// A physical quantity with an explicit unit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    #[serde(with = "unit_string")]
    pub unit: Unit,
}

/// The closed set of accepted units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Second,
    Picosecond,
    Femtosecond,
    Nanosecond,
    Meter,
    Kilometer,
    Hertz,
    Kilohertz,
    Gigahertz,
    Terahertz,
    DbPerKm,
    SecondSquaredPerMeter,
}

impl Unit {
    pub const WHITELIST: [(&'static str, Unit); 12] = [
        ("s", Unit::Second),
        ("ps", Unit::Picosecond),
        ("fs", Unit::Femtosecond),
        ("ns", Unit::Nanosecond),
        ("m", Unit::Meter),
        ("km", Unit::Kilometer),
        ("Hz", Unit::Hertz),
        ("kHz", Unit::Kilohertz),
        ("GHz", Unit::Gigahertz),
        ("THz", Unit::Terahertz),
        ("dB/km", Unit::DbPerKm),
        ("s²/m", Unit::SecondSquaredPerMeter),
    ];

    pub fn parse(s: &str) -> Option<Unit> {
        Self::WHITELIST
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, u)| *u)
    }

    pub fn name(&self) -> &'static str {
        Self::WHITELIST
            .iter()
            .find(|(_, u)| u == self)
            .map(|(name, _)| *name)
            .unwrap()
    }

    fn si_factor(&self) -> f64 {
        match self {
            Unit::Second
            | Unit::Meter
            | Unit::Hertz
            | Unit::DbPerKm
            | Unit::SecondSquaredPerMeter => 1.0,
            Unit::Picosecond => 1e-12,
            Unit::Femtosecond => 1e-15,
            Unit::Nanosecond => 1e-9,
            Unit::Kilometer => 1e3,
            Unit::Kilohertz => 1e3,
            Unit::Gigahertz => 1e9,
            Unit::Terahertz => 1e12,
        }
    }

    fn dimension(&self) -> Dimension {
        match self {
            Unit::Second | Unit::Picosecond | Unit::Femtosecond | Unit::Nanosecond => {
                Dimension::Time
            }
            Unit::Meter | Unit::Kilometer => Dimension::Length,
            Unit::Hertz | Unit::Kilohertz | Unit::Gigahertz | Unit::Terahertz => Dimension::Rate,
            Unit::DbPerKm => Dimension::Attenuation,
            Unit::SecondSquaredPerMeter => Dimension::Dispersion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Length,
    /// Frequencies and angular-frequency widths, numerically 1/s.
    Rate,
    Attenuation,
    Dispersion,
}

impl Dimension {
    fn label(&self) -> &'static str {
        match self {
            Dimension::Time => "time",
            Dimension::Length => "length",
            Dimension::Rate => "frequency",
            Dimension::Attenuation => "attenuation",
            Dimension::Dispersion => "dispersion",
        }
    }
}

mod unit_string {
    use super::Unit;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(unit: &Unit, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(unit.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Unit, D::Error> {
        let raw = String::deserialize(d)?;
        Unit::parse(&raw).ok_or_else(|| {
            de::Error::custom(format!(
                "unit {raw:?} is not in the whitelist (s, ps, fs, ns, m, km, Hz, kHz, GHz, THz, dB/km, s²/m)"
            ))
        })
    }
}

impl Quantity {
    /// SI value, after checking the unit has the expected dimension.
    pub fn si(&self, expected: Dimension, field: &str) -> Result<f64, CliError> {
        if self.unit.dimension() != expected {
            return Err(CliError::config(format!(
                "field {field}: unit {:?} is a {} unit, expected {}",
                self.unit.name(),
                self.unit.dimension().label(),
                expected.label()
            )));
        }
        Ok(self.value * self.unit.si_factor())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub tau_p: Quantity,
    pub sigma: Quantity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub length: Quantity,
    pub beta: Quantity,
    pub attenuation: Quantity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub jitter: Quantity,
    pub dark_rate: Quantity,
    pub window_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub length: Quantity,
    pub mode_width: Quantity,
    pub emission_angle_rad: f64,
    pub pump_wavelength: Quantity,
    pub signal_wavelength: Quantity,
    /// Optional path to a Sellmeier JSON file; the built-in BBO set otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sellmeier_file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    /// Points per sweep axis.
    pub points: usize,
    /// Upper end of length axes in kilometers.
    pub l_max_km: f64,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self {
            points: 121,
            l_max_km: 300.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub source: SourceConfig,
    pub channel_a: ChannelConfig,
    pub channel_b: ChannelConfig,
    pub detector_a: DetectorConfig,
    pub detector_b: DetectorConfig,
    pub crystal: CrystalConfig,
    #[serde(default)]
    pub figure: FigureConfig,
}

/// Built-in defaults: standard single-mode fiber at 1550 nm (0.2 dB/km,
/// 18 ps/(nm km) dispersion), 1 kHz dark rates, a 1 ns / 1 THz source, and
/// a centimeter BBO crystal in the collinear degenerate cut.
pub const DEFAULT_CONFIG: &str = r#"{
  "source": {
    "tau_p": { "value": 1.0, "unit": "ns" },
    "sigma": { "value": 1.0, "unit": "THz" }
  },
  "channel_a": {
    "length": { "value": 1.0, "unit": "km" },
    "beta": { "value": -1.15e-26, "unit": "s²/m" },
    "attenuation": { "value": 0.2, "unit": "dB/km" }
  },
  "channel_b": {
    "length": { "value": 1.0, "unit": "km" },
    "beta": { "value": -1.15e-26, "unit": "s²/m" },
    "attenuation": { "value": 0.2, "unit": "dB/km" }
  },
  "detector_a": {
    "jitter": { "value": 0.0, "unit": "ps" },
    "dark_rate": { "value": 1.0, "unit": "kHz" },
    "window_factor": 6.0
  },
  "detector_b": {
    "jitter": { "value": 0.0, "unit": "ps" },
    "dark_rate": { "value": 1.0, "unit": "kHz" },
    "window_factor": 6.0
  },
  "crystal": {
    "length": { "value": 0.01, "unit": "m" },
    "mode_width": { "value": 1e-4, "unit": "m" },
    "emission_angle_rad": 0.0,
    "pump_wavelength": { "value": 7.75e-7, "unit": "m" },
    "signal_wavelength": { "value": 1.55e-6, "unit": "m" }
  }
}"#;

impl ScenarioConfig {
    /// Load from a file (or the defaults when `path` is `None`), then apply
    /// `key=value` overrides on dotted JSON paths. A sidecar written by the
    /// `figure` command is accepted transparently via its `effective_config`.
    pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("reading {}: {e}", p.display())))?,
            None => DEFAULT_CONFIG.to_string(),
        };
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("config is not valid JSON: {e}")))?;
        // Sidecars round-trip: unwrap the embedded effective config.
        if let Some(inner) = value.get("effective_config") {
            value = inner.clone();
        }
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        serde_json::from_value(value).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn to_scenario(&self) -> Result<QkdScenario, CliError> {
        use Dimension::*;
        let source = SourceParams::new(
            self.source.tau_p.si(Time, "source.tau_p")?,
            self.source.sigma.si(Rate, "source.sigma")?,
        )
        .map_err(CliError::config_from)?;
        let channel = |c: &ChannelConfig, name: &str| -> Result<ChannelParams, CliError> {
            ChannelParams::new(
                c.length.si(Length, &format!("{name}.length"))?,
                c.beta.si(Dispersion, &format!("{name}.beta"))?,
                c.attenuation
                    .si(Attenuation, &format!("{name}.attenuation"))?,
            )
            .map_err(CliError::config_from)
        };
        let detector = |d: &DetectorConfig, name: &str| -> Result<DetectorParams, CliError> {
            DetectorParams::new(
                d.jitter.si(Time, &format!("{name}.jitter"))?,
                d.dark_rate.si(Rate, &format!("{name}.dark_rate"))?,
                d.window_factor,
            )
            .map_err(CliError::config_from)
        };
        Ok(QkdScenario::new(
            source,
            channel(&self.channel_a, "channel_a")?,
            channel(&self.channel_b, "channel_b")?,
            detector(&self.detector_a, "detector_a")?,
            detector(&self.detector_b, "detector_b")?,
        ))
    }

    pub fn to_crystal(&self) -> Result<(SellmeierSet, CrystalSpec), CliError> {
        use Dimension::*;
        let set = match &self.crystal.sellmeier_file {
            Some(path) => SellmeierSet::from_path(std::path::Path::new(path))
                .map_err(|e| CliError::config(e.to_string()))?,
            None => SellmeierSet::bbo(),
        };
        let spec = CrystalSpec::new(
            self.crystal.length.si(Length, "crystal.length")?,
            self.crystal.mode_width.si(Length, "crystal.mode_width")?,
            self.crystal.emission_angle_rad,
            self.crystal
                .pump_wavelength
                .si(Length, "crystal.pump_wavelength")?,
            self.crystal
                .signal_wavelength
                .si(Length, "crystal.signal_wavelength")?,
        )
        .map_err(CliError::config_from)?;
        Ok((set, spec))
    }
}

fn apply_override(root: &mut serde_json::Value, entry: &str) -> Result<(), CliError> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override {entry:?} is not key=value")))?;
    let new_value: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let obj = cursor.as_object_mut().ok_or_else(|| {
            CliError::config(format!("override path {path:?}: {seg:?} is not an object"))
        })?;
        if i + 1 == segments.len() {
            obj.insert(seg.to_string(), new_value);
            return Ok(());
        }
        cursor = obj
            .entry(seg.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}
