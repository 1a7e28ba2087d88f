//! Cavity model: mode parameters, pump conversion between optical power and
//! photon flux, derived scale quantities, and cascade-frequency bookkeeping.
//!
//! Unit conventions used throughout the crate:
//! - decay rates γ, detunings Δ, nonlinear couplings μ and analysis
//!   frequencies ω are angular rates in s⁻¹ (rad·s⁻¹ where the distinction
//!   matters);
//! - optical frequencies ν are ordinary frequencies in Hz;
//! - powers are in watts;
//! - field amplitudes are in √(photons/s), so |α|² is an intracavity photon
//!   number scale and A₁² = P₁/(hν) is the pump photon flux.

use num_complex::Complex64;

use crate::error::Error;

/// Physical constants. Fixed values, never user-set.
pub mod constants {
    /// Planck constant, J·s (2019 SI exact value).
    pub const PLANCK: f64 = 6.62607015e-34;
    /// Speed of light in vacuum, m/s (exact).
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
}

/// Decay and detuning parameters of one cavity mode.
///
/// `gamma_coupling` is the part of the total decay rate due to the output
/// coupler. It is meaningful for the fundamental mode; the signal and idler
/// have no separate output coupler, so for them it must equal `gamma_total`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Total amplitude decay rate γ (s⁻¹).
    pub gamma_total: f64,
    /// Output-coupler decay rate γᶜ (s⁻¹), 0 < γᶜ ≤ γ.
    pub gamma_coupling: f64,
    /// Detuning Δ from cavity resonance (rad·s⁻¹, may be negative).
    pub detuning: f64,
}

impl ModeParams {
    pub fn new(gamma_total: f64, gamma_coupling: f64, detuning: f64) -> Result<Self, Error> {
        if !(gamma_total > 0.0) || !gamma_total.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma_total must be > 0, got {gamma_total}"
            )));
        }
        if !(gamma_coupling > 0.0) || gamma_coupling > gamma_total {
            return Err(Error::InvalidParameter(format!(
                "gamma_coupling must satisfy 0 < gamma_coupling <= gamma_total, got gamma_coupling {gamma_coupling}, gamma_total {gamma_total}"
            )));
        }
        if !detuning.is_finite() {
            return Err(Error::InvalidParameter("detuning must be finite".into()));
        }
        Ok(Self {
            gamma_total,
            gamma_coupling,
            detuning,
        })
    }

    /// Mode with its entire decay through a single channel (γᶜ = γ).
    pub fn simple(gamma_total: f64, detuning: f64) -> Result<Self, Error> {
        Self::new(gamma_total, gamma_total, detuning)
    }
}

/// Complex effective decay rate γ + iΔ of a mode. Detuning limits the
/// intracavity field the same way extra loss would, so |γ + iΔ| acts as an
/// effective decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDecay {
    pub value: Complex64,
    pub magnitude: f64,
}

/// γ_x^eff = γ_x + iΔ_x and its magnitude.
pub fn effective_decay(mode: &ModeParams) -> EffectiveDecay {
    let value = Complex64::new(mode.gamma_total, mode.detuning);
    EffectiveDecay {
        value,
        magnitude: value.norm(),
    }
}

/// Full cavity description: the three mode parameter sets, the two
/// nonlinear interaction rates, and the fundamental optical frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    pub fundamental: ModeParams,
    pub signal: ModeParams,
    pub idler: ModeParams,
    /// SHG interaction rate μ₁ (s⁻¹ per photon).
    pub mu1: f64,
    /// NDOPO interaction rate μ₂ (s⁻¹ per photon).
    pub mu2: f64,
    /// Fundamental optical frequency ν (Hz).
    pub nu: f64,
}

impl CavityConfig {
    pub fn new(
        fundamental: ModeParams,
        signal: ModeParams,
        idler: ModeParams,
        mu1: f64,
        mu2: f64,
        nu: f64,
    ) -> Result<Self, Error> {
        if !(mu1 > 0.0) || !(mu2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nonlinear rates must be > 0, got mu1 {mu1}, mu2 {mu2}"
            )));
        }
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
        }
        for (name, mode) in [("signal", &signal), ("idler", &idler)] {
            if mode.gamma_coupling != mode.gamma_total {
                return Err(Error::InvalidParameter(format!(
                    "{name} mode has no separate output coupler; gamma_coupling must equal gamma_total"
                )));
            }
        }
        Ok(Self {
            fundamental,
            signal,
            idler,
            mu1,
            mu2,
            nu,
        })
    }

    /// Symmetric-optimum cavity: γ_s = γ_i = γ₁ = γ₁ᶜ, μ₁ = μ₂, zero
    /// detunings. In this configuration the oscillation threshold equals the
    /// minimum threshold power.
    pub fn symmetric(gamma1: f64, mu: f64, nu: f64) -> Result<Self, Error> {
        let mode = ModeParams::simple(gamma1, 0.0)?;
        Self::new(mode, mode, mode, mu, mu, nu)
    }

    /// γ̄ = √(γ_s γ_i).
    pub fn gamma_bar(&self) -> f64 {
        (self.signal.gamma_total * self.idler.gamma_total).sqrt()
    }

    /// r = √(μ₁/μ₂).
    pub fn coupling_ratio(&self) -> f64 {
        (self.mu1 / self.mu2).sqrt()
    }

    /// Cavity escape efficiency η = γ₁ᶜ/γ₁.
    pub fn escape_efficiency(&self) -> f64 {
        self.fundamental.gamma_coupling / self.fundamental.gamma_total
    }

    /// √(μ₁μ₂), the cross-coupling rate between the SHG and NDOPO chains.
    pub fn mu_cross(&self) -> f64 {
        (self.mu1 * self.mu2).sqrt()
    }

    pub fn all_detunings_zero(&self) -> bool {
        self.fundamental.detuning == 0.0
            && self.signal.detuning == 0.0
            && self.idler.detuning == 0.0
    }
}

/// Coherent pump drive: optical power and the corresponding photon-flux
/// amplitude A₁ = √(P₁/(hν)). The amplitude is taken real and non-negative
/// (global phase gauge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpDrive {
    /// Pump power (W).
    pub power: f64,
    /// Pump amplitude (√(photons/s)).
    pub amplitude: f64,
}

/// Build a [`PumpDrive`] from optical power at fundamental frequency `nu`.
pub fn pump_drive(power: f64, nu: f64) -> Result<PumpDrive, Error> {
    if power < 0.0 || !power.is_finite() {
        return Err(Error::Domain(format!(
            "pump power must be >= 0, got {power}"
        )));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
    }
    Ok(PumpDrive {
        power,
        amplitude: (power / (constants::PLANCK * nu)).sqrt(),
    })
}

/// Optical power carried by photon-flux amplitude `amplitude` at frequency
/// `nu`; inverse of [`pump_drive`].
pub fn power_of(amplitude: f64, nu: f64) -> f64 {
    amplitude * amplitude * constants::PLANCK * nu
}

/// Scale quantities derived from a configuration and a pump power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// γ̄ = √(γ_s γ_i) (s⁻¹).
    pub gamma_bar: f64,
    /// r = √(μ₁/μ₂).
    pub r: f64,
    /// Escape efficiency η = γ₁ᶜ/γ₁.
    pub eta: f64,
    /// Competition threshold power (zero-detuning formula), W.
    pub p1_thr: f64,
    /// Minimum threshold power h·2ν·γ₁²/(ημ₁), W.
    pub p1_min: f64,
    /// Scaled pump power N = P₁/P₁ᵗʰʳ.
    pub n_scaled: f64,
}

/// Compute [`DerivedScales`] for a config at the given pump power (W).
pub fn derived_scales(config: &CavityConfig, power: f64) -> DerivedScales {
    debug_assert!(power >= 0.0);
    let p1_thr = crate::thresholds::threshold_power(config);
    DerivedScales {
        gamma_bar: config.gamma_bar(),
        r: config.coupling_ratio(),
        eta: config.escape_efficiency(),
        p1_thr,
        p1_min: crate::thresholds::min_threshold_power(config),
        n_scaled: power / p1_thr,
    }
}

/// Frequencies generated by the cascade of SHG, SFG and DFG processes
/// between the pump, signal and idler fields, with the signal/idler offset
/// Δ from degeneracy (ν_{s,i} = ν ± Δ).
///
/// Kinematic bookkeeping only: no amplitudes are assigned to the lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeLayout {
    /// Signal/idler offset Δ (Hz) from degeneracy.
    pub delta: f64,
    /// Lines around the fundamental: ν + kΔ for |k| ≤ order, ascending.
    pub infrared_lines: Vec<f64>,
    /// Lines around the harmonic: 2ν + kΔ for |k| ≤ 2·order, ascending.
    pub visible_lines: Vec<f64>,
}

/// Enumerate the cascade lines up to the given order. At order m the
/// infrared comb spans ν ± mΔ (signal/idler plus their DFG products) and
/// the visible comb spans 2ν ± 2mΔ (SFG products at ±Δ and SHG products of
/// the signal/idler at ±2Δ, iterated).
pub fn cascade_lines(nu: f64, delta: f64, order: u32) -> Result<CascadeLayout, Error> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
    }
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta must be >= 0, got {delta}"
        )));
    }
    if order < 1 {
        return Err(Error::InvalidParameter("cascade order must be >= 1".into()));
    }

    let comb = |center: f64, reach: i64| -> Vec<f64> {
        if delta == 0.0 {
            return vec![center];
        }
        (-reach..=reach)
            .map(|k| center + k as f64 * delta)
            .collect()
    };

    Ok(CascadeLayout {
        delta,
        infrared_lines: comb(nu, order as i64),
        visible_lines: comb(2.0 * nu, 2 * order as i64),
    })
}

/// Vacuum wavelength (nm) of an optical frequency (Hz).
pub fn wavelength_nm(frequency: f64) -> f64 {
    constants::SPEED_OF_LIGHT / frequency * 1e9
}
