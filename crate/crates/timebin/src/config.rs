//! Experiment configuration: one JSON document merged over built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use timebin_core::analyzer::{AnalyzerPhase, Port};
use timebin_core::engine::PortPair;
use timebin_core::simulator::RunConfig;
use timebin_core::source::SourceParams;

use crate::error::{Error, Result};

/// One analyzer setting in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSetting {
    pub phi_xx_deg: f64,
    pub phi_x_deg: f64,
}

impl PhaseSetting {
    pub fn new(phi_xx_deg: f64, phi_x_deg: f64) -> Self {
        Self { phi_xx_deg, phi_x_deg }
    }

    pub fn phase(&self) -> AnalyzerPhase {
        AnalyzerPhase::new(self.phi_xx_deg.to_radians(), self.phi_x_deg.to_radians())
    }

    /// `phi_<xx>_<x>` with whole degrees in `[0, 360)`.
    pub fn label(&self) -> String {
        let (a, b) = self.phase().degrees();
        format!("phi_{a}_{b}")
    }

    /// Inverse of [`Self::label`], also accepting a `run_` prefix and a
    /// file extension.
    pub fn from_label(s: &str) -> Option<Self> {
        let stem = s.split('.').next()?;
        let stem = stem.strip_prefix("run_").unwrap_or(stem);
        let mut parts = stem.strip_prefix("phi_")?.split('_');
        let a = parts.next()?.parse().ok()?;
        let b = parts.next()?.parse().ok()?;
        parts.next().is_none().then(|| Self::new(a, b))
    }

    pub fn tomography_settings() -> Vec<PhaseSetting> {
        vec![Self::new(0.0, 0.0), Self::new(90.0, 0.0), Self::new(0.0, 90.0), Self::new(90.0, 90.0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Designated XX detector port, 1 or 2.
    pub port_xx: u8,
    /// Designated X detector port, 1 or 2.
    pub port_x: u8,
    /// Post-selection window per peak (s).
    pub window: f64,
    /// Arrival histogram bin width (s).
    pub bin_width: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { port_xx: 1, port_x: 2, window: 1.28e-9, bin_width: 16e-12 }
    }
}

impl AnalysisConfig {
    pub fn port_pair(&self) -> Result<PortPair> {
        match (Port::from_number(self.port_xx), Port::from_number(self.port_x)) {
            (Some(xx), Some(x)) => Ok(PortPair::new(xx, x)),
            _ => Err(Error::Config(format!("ports must be 1 or 2, got XX{} X{}", self.port_xx, self.port_x))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SourceParams,
    pub run: RunConfig,
    pub phase_settings: Vec<PhaseSetting>,
    pub analysis: AnalysisConfig,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: SourceParams::default(),
            run: RunConfig::default(),
            phase_settings: PhaseSetting::tomography_settings(),
            analysis: AnalysisConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Recursively overlays `overrides` on `base`. Objects merge key by key;
/// anything else replaces.
pub fn merge(base: &mut Value, overrides: Value) {
    match (base, overrides) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

impl ExperimentConfig {
    /// Defaults overridden by the fields present in `json`.
    pub fn from_json_str(json: &str) -> std::result::Result<Self, serde_json::Error> {
        let overrides: Value = serde_json::from_str(json)?;
        let mut base = serde_json::to_value(Self::default())?;
        merge(&mut base, overrides);
        serde_json::from_value(base)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_json_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.phase_settings.is_empty() {
            return Err(Error::Config("at least one phase setting is required".into()));
        }
        let bad = self.phase_settings.iter().find(|p| !(p.phi_xx_deg.is_finite() && p.phi_x_deg.is_finite()));
        if let Some(p) = bad {
            return Err(Error::Config(format!("phase setting {p:?} is not finite")));
        }
        self.source.validate()?;
        self.run.validate(self.source.pump.bin_delay)?;
        let a = &self.analysis;
        self.analysis.port_pair()?;
        if !(a.window > 0.0 && a.window < self.source.pump.bin_delay) {
            return Err(Error::Config(format!("analysis window {} s must be in (0, bin_delay)", a.window)));
        }
        if !(a.bin_width >= 1e-12 && a.bin_width < self.run.rep_period) {
            return Err(Error::Config(format!("bin width {} s must be in [1 ps, rep_period)", a.bin_width)));
        }
        Ok(())
    }

    /// Seed of the `i`-th phase setting.
    pub fn seed_for(&self, i: usize) -> u64 {
        self.run.seed.wrapping_add(i as u64)
    }

    pub fn phases(&self) -> Vec<AnalyzerPhase> {
        self.phase_settings.iter().map(PhaseSetting::phase).collect()
    }
}
