//! Oscillation thresholds, second-harmonic power clamping and conversion
//! efficiency.
//!
//! For zero detunings the competition threshold is
//!
//! ```text
//! P₁ᵗʰʳ = h·2ν · (γ̄/γ₁ᶜ) · (γ₁²/√(μ₁μ₂)) · ¼ (1 + r·γ̄/γ₁)²
//! ```
//!
//! with γ̄ = √(γ_sγ_i) and r = √(μ₁/μ₂). Above threshold the harmonic
//! output power clamps at P₂ = h·2ν·γ̄²/μ₂, and the conversion efficiency
//! at the minimum threshold P₁ᵐⁱⁿ = h·2ν·γ₁²/(ημ₁) equals the escape
//! efficiency η.

use rayon::prelude::*;

use crate::dynamics::{self, trivial_branch_alpha1, trivial_branch_growth_rate};
use crate::error::Error;
use crate::model::{constants::PLANCK, effective_decay, pump_drive, CavityConfig};

/// Photon energy at the harmonic, h·2ν (J).
pub fn harmonic_photon_energy(nu: f64) -> f64 {
    PLANCK * 2.0 * nu
}

/// Competition threshold power (W), zero-detuning formula. Detunings in the
/// config are ignored here; see [`detuned_threshold_power`].
pub fn threshold_power(config: &CavityConfig) -> f64 {
    let gamma_bar = config.gamma_bar();
    let g1 = config.fundamental.gamma_total;
    let g1c = config.fundamental.gamma_coupling;
    let r = config.coupling_ratio();
    harmonic_photon_energy(config.nu)
        * (gamma_bar / g1c)
        * (g1 * g1 / config.mu_cross())
        * 0.25
        * (1.0 + r * gamma_bar / g1).powi(2)
}

/// Threshold power with every decay rate replaced by the magnitude of its
/// effective decay rate |γ_x + iΔ_x|.
///
/// The coupling rate γ₁ᶜ is a mirror property, not an effective decay
/// rate, and is left untouched. The substitution is exact for
/// γ_s = γ_i, Δ_s = Δ_i at zero fundamental detuning and a heuristic
/// otherwise; [`numeric_bifurcation_power`] gives the exact value.
pub fn detuned_threshold_power(config: &CavityConfig) -> f64 {
    let g1_eff = effective_decay(&config.fundamental).magnitude;
    let gs_eff = effective_decay(&config.signal).magnitude;
    let gi_eff = effective_decay(&config.idler).magnitude;
    let gamma_bar_eff = (gs_eff * gi_eff).sqrt();
    let g1c = config.fundamental.gamma_coupling;
    let r = config.coupling_ratio();
    harmonic_photon_energy(config.nu)
        * (gamma_bar_eff / g1c)
        * (g1_eff * g1_eff / config.mu_cross())
        * 0.25
        * (1.0 + r * gamma_bar_eff / g1_eff).powi(2)
}

/// Minimum threshold power h·2ν·γ₁²/(ημ₁), reached at the symmetric
/// optimum γ_s = γ_i = γ₁, μ₁ = μ₂.
pub fn min_threshold_power(config: &CavityConfig) -> f64 {
    let g1 = config.fundamental.gamma_total;
    harmonic_photon_energy(config.nu) * g1 * g1 / (config.escape_efficiency() * config.mu1)
}

/// Invert the minimum-threshold relation: given an observed P₁ᵐⁱⁿ (W) and
/// the fundamental frequency, return γ₁²/(ημ₁) in s⁻¹. Useful when the
/// individual cavity rates are not known.
pub fn invert_min_threshold(p1_min: f64, nu: f64) -> f64 {
    p1_min / harmonic_photon_energy(nu)
}

/// Clamped second-harmonic output power h·2ν·γ̄²/μ₂ (W), the plateau for
/// P₁ > P₁ᵗʰʳ at zero detunings.
pub fn clamped_sh_power(config: &CavityConfig) -> f64 {
    let gamma_bar = config.gamma_bar();
    harmonic_photon_energy(config.nu) * gamma_bar * gamma_bar / config.mu2
}

/// Clamp value with detunings, h·2ν·γ̄_eff²/μ₂ where
/// γ̄_eff = √(|γ_s^eff||γ_i^eff|).
///
/// This follows from the steady-state algebra of the equations of motion:
/// the signal/idler equations force |√μ₁α₁² + 2√μ₂α_sα_i|² = |g_s g_i|/μ₂
/// on the oscillating branch, for any detunings.
pub fn effective_clamped_sh_power(config: &CavityConfig) -> f64 {
    let gs_eff = effective_decay(&config.signal).magnitude;
    let gi_eff = effective_decay(&config.idler).magnitude;
    harmonic_photon_energy(config.nu) * gs_eff * gi_eff / config.mu2
}

/// Real positive fundamental amplitude on the trivial branch at zero
/// detunings: the unique real root of γ₁x + μ₁x³ = √(2γ₁ᶜ)A₁.
///
/// Uses the hyperbolic closed form of the depressed cubic (the linear
/// coefficient is positive, so there is exactly one real root) followed by
/// a Newton polish.
pub fn below_threshold_alpha1(config: &CavityConfig, power: f64) -> Result<f64, Error> {
    if !config.all_detunings_zero() {
        return Err(Error::UnsupportedRegime(
            "the real-cubic trivial branch requires zero detunings; use trivial_branch_alpha1"
                .into(),
        ));
    }
    let drive = pump_drive(power, config.nu)?;
    let d = (2.0 * config.fundamental.gamma_coupling).sqrt() * drive.amplitude;
    if d == 0.0 {
        return Ok(0.0);
    }
    let gamma1 = config.fundamental.gamma_total;
    let mu1 = config.mu1;

    // x³ + (γ₁/μ₁)x = d/μ₁, solved as x = 2u·sinh(asinh(q/(2u³))/3),
    // u = √(γ₁/(3μ₁)).
    let u = (gamma1 / (3.0 * mu1)).sqrt();
    let q = d / mu1;
    let mut x = 2.0 * u * ((q / (2.0 * u.powi(3))).asinh() / 3.0).sinh();
    for _ in 0..3 {
        let g = mu1 * x * x * x + gamma1 * x - d;
        let slope = 3.0 * mu1 * x * x + gamma1;
        x -= g / slope;
    }
    Ok(x)
}

/// Exact threshold power by bisecting the sign change of the trivial-branch
/// growth rate, valid at any detunings. Bisection brackets
/// [1e-3, 1e3]×(substitution-rule estimate) and converges to 1e-10
/// relative.
pub fn numeric_bifurcation_power(config: &CavityConfig) -> Result<f64, Error> {
    let scale = detuned_threshold_power(config);
    let growth = |power: f64| -> Result<f64, Error> {
        let drive = pump_drive(power, config.nu)?;
        Ok(trivial_branch_growth_rate(
            config,
            trivial_branch_alpha1(config, &drive),
        ))
    };
    let mut lo = 1e-3 * scale;
    let mut hi = 1e3 * scale;
    if growth(lo)? >= 0.0 || growth(hi)? <= 0.0 {
        return Err(Error::Domain(format!(
            "threshold not bracketed by [{lo:.3e}, {hi:.3e}] W"
        )));
    }
    while hi - lo > 1e-10 * lo {
        let mid = 0.5 * (lo + hi);
        if growth(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which threshold definition a [`ThresholdReport`] was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Zero-detuning closed form.
    ZeroDetuning,
    /// Effective-decay-rate substitution |γ_x^eff| in the closed form.
    EffectiveDecaySubstitution,
    /// Bisection of the exact stability criterion.
    NumericBifurcation,
}

impl std::fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThresholdMode::ZeroDetuning => write!(f, "zero_detuning"),
            ThresholdMode::EffectiveDecaySubstitution => {
                write!(f, "effective_decay_substitution")
            }
            ThresholdMode::NumericBifurcation => write!(f, "numeric_bifurcation"),
        }
    }
}

/// Threshold, clamp and efficiency summary for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub p1_thr: f64,
    pub p1_min: f64,
    pub eta: f64,
    pub clamped_p2: f64,
    /// ε = P₂/P₁ᵗʰʳ; bounded by η.
    pub efficiency_at_threshold: f64,
    pub mode: ThresholdMode,
}

pub fn threshold_report(
    config: &CavityConfig,
    mode: ThresholdMode,
) -> Result<ThresholdReport, Error> {
    let (p1_thr, clamped_p2) = match mode {
        ThresholdMode::ZeroDetuning => (threshold_power(config), clamped_sh_power(config)),
        ThresholdMode::EffectiveDecaySubstitution => (
            detuned_threshold_power(config),
            effective_clamped_sh_power(config),
        ),
        ThresholdMode::NumericBifurcation => (
            numeric_bifurcation_power(config)?,
            effective_clamped_sh_power(config),
        ),
    };
    Ok(ThresholdReport {
        p1_thr,
        p1_min: min_threshold_power(config),
        eta: config.escape_efficiency(),
        clamped_p2,
        efficiency_at_threshold: clamped_p2 / p1_thr,
        mode,
    })
}

/// Operating regime of one point of a power sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Below,
    Clamped,
    /// The steady-state solve failed; p2 and efficiency are NaN.
    Failed,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Below => write!(f, "below"),
            Regime::Clamped => write!(f, "clamped"),
            Regime::Failed => write!(f, "failed"),
        }
    }
}

/// One point of a second-harmonic power curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPoint {
    pub p1: f64,
    pub p2: f64,
    pub efficiency: f64,
    pub regime: Regime,
}

/// Second-harmonic output power versus pump power over `p1_grid`
/// (non-negative, ascending).
///
/// At zero detunings both regimes are closed forms: P₂ = h·2ν·μ₁x⁴ below
/// threshold and the clamp above. With detunings the threshold label comes
/// from the substitution rule and P₂ from converged numeric steady states;
/// per-point solver failures are marked, not propagated.
pub fn power_curve(config: &CavityConfig, p1_grid: &[f64]) -> Result<Vec<EfficiencyPoint>, Error> {
    if p1_grid.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidParameter(
            "power grid must be non-negative".into(),
        ));
    }
    if p1_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "power grid must be ascending".into(),
        ));
    }

    let h2nu = harmonic_photon_energy(config.nu);
    if config.all_detunings_zero() {
        let p_thr = threshold_power(config);
        let clamp = clamped_sh_power(config);
        p1_grid
            .iter()
            .map(|&p1| {
                let (p2, regime) = if p1 < p_thr {
                    let x = below_threshold_alpha1(config, p1)?;
                    (h2nu * config.mu1 * x.powi(4), Regime::Below)
                } else {
                    (clamp, Regime::Clamped)
                };
                let efficiency = if p1 > 0.0 { p2 / p1 } else { 0.0 };
                Ok(EfficiencyPoint {
                    p1,
                    p2,
                    efficiency,
                    regime,
                })
            })
            .collect()
    } else {
        let p_thr = detuned_threshold_power(config);
        Ok(p1_grid
            .par_iter()
            .map(|&p1| {
                let point = pump_drive(p1, config.nu)
                    .and_then(|drive| dynamics::find_steady_state(config, &drive, 1e-10, 1e-3))
                    .map(|report| {
                        let p2 = h2nu * report.fluxes.sh_flux;
                        let efficiency = if p1 > 0.0 { p2 / p1 } else { 0.0 };
                        let regime = if p1 < p_thr {
                            Regime::Below
                        } else {
                            Regime::Clamped
                        };
                        EfficiencyPoint {
                            p1,
                            p2,
                            efficiency,
                            regime,
                        }
                    });
                point.unwrap_or(EfficiencyPoint {
                    p1,
                    p2: f64::NAN,
                    efficiency: f64::NAN,
                    regime: Regime::Failed,
                })
            })
            .collect())
    }
}
