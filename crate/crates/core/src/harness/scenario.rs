//! Scenario files.
//!
//! A scenario is a JSON document describing the constellation snapshot, the
//! nominal PSD, the attacker model, the fusion rule and the Monte Carlo
//! budget. Units: meters, m/s, Hz.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PlaError, Result};
use crate::fusion::FusionRule;
use crate::geometry::SatelliteState;
use crate::signal::{parse_psd_table, NominalPsd};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

fn default_schema() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

fn one() -> f64 {
    1.0
}

fn default_period() -> f64 {
    1.0e3
}

/// Tabulated shape of the nominal message PSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsdShape {
    Flat,
    Triangular { points: usize },
    /// Inline `[offset_hz, power]` rows; rescaled to the configured signal variance.
    Table { points: Vec<[f64; 2]> },
    /// Two-column CSV file, resolved relative to the scenario file.
    Csv { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdSpec {
    pub shape: PsdShape,
    /// Period Δf of the shape, Hz.
    #[serde(default = "default_period")]
    pub period_hz: f64,
    /// Message variance σ_m² (mean of the shape).
    #[serde(default = "one")]
    pub signal_variance: f64,
    /// Channel power gain `l`.
    #[serde(default = "one")]
    pub channel_power: f64,
}

impl Default for PsdSpec {
    fn default() -> Self {
        PsdSpec {
            shape: PsdShape::Flat,
            period_hz: default_period(),
            signal_variance: 1.0,
            channel_power: 1.0,
        }
    }
}

/// How the attacker's NPSDS ratio per receiver is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaSpec {
    /// One β per receiver.
    Explicit(Vec<f64>),
    /// `β_i = Θ(ω_s,i) / Θ(ω_a,i)` from the Doppler shifts of Eve and Alice.
    FromGeometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub alice: SatelliteState,
    pub eve: SatelliteState,
    pub receivers: Vec<SatelliteState>,
    pub carrier_hz: f64,
    #[serde(default)]
    pub psd: PsdSpec,
    /// Receiver noise variance σ_w²; also the PSD noise floor.
    #[serde(default = "one")]
    pub noise_variance: f64,
    pub slot_length: usize,
    pub attacker_beta: BetaSpec,
    pub fusion: FusionRule,
    pub trials: u64,
    pub seed: u64,
}

impl Scenario {
    /// Parses and validates a scenario without touching the filesystem.
    pub fn parse(data: &[u8]) -> Result<Scenario> {
        let de = &mut serde_json::Deserializer::from_slice(data);
        let scn: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            PlaError::config(path, e.into_inner().to_string())
        })?;
        scn.validate()?;
        Ok(scn)
    }

    /// Reads a scenario file and inlines any CSV PSD table it references.
    pub fn load(path: &Path) -> Result<Scenario> {
        let data = std::fs::read(path)?;
        let mut scn = Scenario::parse(&data)?;
        if let PsdShape::Csv { path: rel } = &scn.psd.shape {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            let table_path = base.join(rel);
            let bytes = std::fs::read(&table_path).map_err(|e| {
                PlaError::config("psd.shape.path", format!("{}: {e}", table_path.display()))
            })?;
            let rows = parse_psd_table(&bytes)
                .map_err(|e| PlaError::config("psd.shape.path", e.to_string()))?;
            scn.psd.shape = PsdShape::Table {
                points: rows.into_iter().map(|(f, p)| [f, p]).collect(),
            };
            scn.validate()?;
        }
        Ok(scn)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks every invariant, naming the offending field on failure.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(PlaError::config(
                "schema_version",
                format!("unsupported version {} (expected {SCENARIO_SCHEMA_VERSION})", self.schema_version),
            ));
        }
        self.alice.validate("alice")?;
        self.eve.validate("eve")?;
        if self.receivers.is_empty() {
            return Err(PlaError::config("receivers", "at least one receiver is required"));
        }
        for (i, rx) in self.receivers.iter().enumerate() {
            let path = format!("receivers[{i}]");
            rx.validate(&path)?;
            for (name, tx) in [("alice", &self.alice), ("eve", &self.eve)] {
                if rx.position == tx.position {
                    return Err(PlaError::config(
                        format!("{path}.position"),
                        format!("coincides with {name}"),
                    ));
                }
            }
        }
        if !(self.carrier_hz > 0.0) || !self.carrier_hz.is_finite() {
            return Err(PlaError::config("carrier_hz", format!("must be positive, got {}", self.carrier_hz)));
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(PlaError::config(
                "noise_variance",
                format!("must be non-negative, got {}", self.noise_variance),
            ));
        }
        if self.slot_length == 0 {
            return Err(PlaError::config("slot_length", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(PlaError::config("trials", "must be at least 1"));
        }
        if let BetaSpec::Explicit(betas) = &self.attacker_beta {
            if betas.len() != self.receivers.len() {
                return Err(PlaError::config(
                    "attacker_beta.explicit",
                    format!("expected {} values (one per receiver), got {}", self.receivers.len(), betas.len()),
                ));
            }
            for (i, b) in betas.iter().enumerate() {
                if !(*b > 0.0) || !b.is_finite() {
                    return Err(PlaError::config(
                        format!("attacker_beta.explicit[{i}]"),
                        format!("must be positive and finite, got {b}"),
                    ));
                }
            }
        }
        self.fusion
            .quorum_for(self.receivers.len())
            .map_err(|e| PlaError::config("fusion.quorum", e.to_string()))?;
        match &self.psd.shape {
            PsdShape::Triangular { points } if *points < 2 || !points.is_multiple_of(2) => {
                return Err(PlaError::config("psd.shape.points", "must be even and >= 2"));
            }
            PsdShape::Csv { path } if path.trim().is_empty() => {
                return Err(PlaError::config("psd.shape.path", "must not be empty"));
            }
            _ => {}
        }
        if !matches!(self.psd.shape, PsdShape::Csv { .. }) {
            self.nominal_psd()?;
        }
        Ok(())
    }

    /// Number of receiving satellites.
    pub fn receiver_count(&self) -> usize {
        self.receivers.len()
    }

    /// Builds the nominal PSD, with the receiver noise variance as its floor.
    pub fn nominal_psd(&self) -> Result<NominalPsd> {
        let p = &self.psd;
        if !(p.signal_variance >= 0.0) || !p.signal_variance.is_finite() {
            return Err(PlaError::config(
                "psd.signal_variance",
                format!("must be non-negative, got {}", p.signal_variance),
            ));
        }
        let psd = match &p.shape {
            PsdShape::Flat => NominalPsd::flat(p.signal_variance, p.channel_power, self.noise_variance, p.period_hz),
            PsdShape::Triangular { points } => {
                NominalPsd::triangular(p.signal_variance, p.channel_power, self.noise_variance, p.period_hz, *points)
            }
            PsdShape::Table { points } => NominalPsd::normalized(
                points.iter().map(|r| (r[0], r[1])).collect(),
                p.period_hz,
                p.signal_variance,
                p.channel_power,
                self.noise_variance,
            ),
            PsdShape::Csv { .. } => Err(PlaError::config(
                "psd.shape.path",
                "CSV table not resolved; load the scenario from its file",
            )),
        };
        psd
    }

    /// SHA-256 over the canonical JSON encoding, hex encoded.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
