//! Run configuration: strict JSON loading and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{CavityConfig, ModeParams};

fn default_tol() -> f64 {
    1e-10
}

fn default_kick() -> f64 {
    1e-3
}

fn default_cascade_order() -> u32 {
    2
}

/// Grid spacing of a power sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// First pump power (W).
    pub start: f64,
    /// Last pump power (W).
    pub stop: f64,
    /// Number of grid points.
    pub steps: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Model tag: eq4, eq5 or eq6.
    pub model: String,
    /// Scaled pump power N.
    pub n_scaled: f64,
    /// Upper edge of the analysis-frequency grid, in units of γ₁.
    pub omega_max_over_gamma1: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: PathBuf,
    pub format: OutputFormat,
}

/// Full run configuration. Unknown keys are rejected; detunings and solver
/// settings carry defaults (Δ = 0, tol = 1e-10, kick = 1e-3, cascade
/// order 2).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Fundamental total decay rate γ₁ (s⁻¹).
    pub gamma1: f64,
    /// Fundamental coupling-mirror decay rate γ₁ᶜ (s⁻¹).
    pub gamma1_c: f64,
    /// Signal decay rate γ_s (s⁻¹).
    pub gamma_s: f64,
    /// Idler decay rate γ_i (s⁻¹).
    pub gamma_i: f64,
    /// Fundamental detuning Δ₁ (rad·s⁻¹).
    #[serde(default)]
    pub delta1: f64,
    /// Signal detuning Δ_s (rad·s⁻¹).
    #[serde(default)]
    pub delta_s: f64,
    /// Idler detuning Δ_i (rad·s⁻¹).
    #[serde(default)]
    pub delta_i: f64,
    /// SHG interaction rate μ₁ (s⁻¹).
    pub mu1: f64,
    /// NDOPO interaction rate μ₂ (s⁻¹).
    pub mu2: f64,
    /// Fundamental optical frequency ν (Hz).
    pub nu_hz: f64,
    /// Pump power (W) for commands that need one.
    #[serde(default)]
    pub pump_power: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
    /// Steady-state residual tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Signal/idler seed amplitude, relative to the threshold pair scale.
    #[serde(default = "default_kick")]
    pub kick: f64,
    #[serde(default = "default_cascade_order")]
    pub cascade_order: u32,
}

impl RunConfig {
    /// Validate and convert to the physical cavity description.
    pub fn cavity(&self) -> Result<CavityConfig, Error> {
        if !(self.gamma1 > 0.0) {
            return Err(Error::Config(format!(
                "gamma1 must be > 0, got {}",
                self.gamma1
            )));
        }
        if !(self.gamma1_c > 0.0) || self.gamma1_c > self.gamma1 {
            return Err(Error::Config(format!(
                "gamma1_c ({}) must satisfy 0 < gamma1_c <= gamma1 ({})",
                self.gamma1_c, self.gamma1
            )));
        }
        for (key, value) in [
            ("gamma_s", self.gamma_s),
            ("gamma_i", self.gamma_i),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("nu_hz", self.nu_hz),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!("{key} must be > 0, got {value}")));
            }
        }
        if let Some(power) = self.pump_power {
            if power < 0.0 {
                return Err(Error::Config(format!(
                    "pump_power must be >= 0, got {power}"
                )));
            }
        }
        if !(self.tol > 0.0) || self.tol > 1e-3 {
            return Err(Error::Config(format!(
                "tol must lie in (0, 1e-3], got {}",
                self.tol
            )));
        }
        if !(self.kick > 0.0) {
            return Err(Error::Config(format!(
                "kick must be > 0, got {}",
                self.kick
            )));
        }
        let fundamental = ModeParams::new(self.gamma1, self.gamma1_c, self.delta1)
            .map_err(|e| Error::Config(e.to_string()))?;
        let signal = ModeParams::simple(self.gamma_s, self.delta_s)
            .map_err(|e| Error::Config(e.to_string()))?;
        let idler = ModeParams::simple(self.gamma_i, self.delta_i)
            .map_err(|e| Error::Config(e.to_string()))?;
        CavityConfig::new(fundamental, signal, idler, self.mu1, self.mu2, self.nu_hz)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Load and validate a JSON run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))?;
    config.cavity()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(json: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(json.as_bytes()).unwrap();
        file
    }

    const MINIMAL: &str = r#"{
        "gamma1": 1e7, "gamma1_c": 1e7, "gamma_s": 1e7, "gamma_i": 1e7,
        "mu1": 1.0, "mu2": 1.0, "nu_hz": 2.818e14
    }"#;

    #[test]
    fn minimal_config_loads_with_defaults() {
        let file = write_config(MINIMAL);
        let config = load_config(file.path()).unwrap();
        assert_eq!(config.delta1, 0.0);
        assert_eq!(config.tol, 1e-10);
        assert_eq!(config.kick, 1e-3);
        assert_eq!(config.cascade_order, 2);
        assert!(config.cavity().is_ok());
    }

    #[test]
    fn overcoupled_mirror_rejected_naming_both_keys() {
        let file = write_config(
            r#"{"gamma1": 1e7, "gamma1_c": 2e7, "gamma_s": 1e7, "gamma_i": 1e7,
                "mu1": 1.0, "mu2": 1.0, "nu_hz": 2.818e14}"#,
        );
        let err = load_config(file.path()).unwrap_err().to_string();
        assert!(err.contains("gamma1_c"), "{err}");
        assert!(err.contains("gamma1"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let file = write_config(
            r#"{"gamma1": 1e7, "gamma1_c": 1e7, "gamma_s": 1e7, "gamma_i": 1e7,
                "mu1": 1.0, "mu2": 1.0, "mu3": 1.0, "nu_hz": 2.818e14}"#,
        );
        let err = load_config(file.path()).unwrap_err().to_string();
        assert!(err.contains("mu3"), "{err}");
    }

    #[test]
    fn missing_file_is_config_error() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/config.json")),
            Err(Error::Config(_))
        ));
    }
}
