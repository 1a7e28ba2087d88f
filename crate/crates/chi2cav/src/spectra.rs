//! Second-harmonic amplitude-quadrature squeezing spectra.
//!
//! All spectra are normalized to shot noise (V = 1); V < 1 is squeezing.
//! Three models are provided, addressed by the tags used on the command
//! line:
//!
//! - `eq4` — doubler without competition. Squeezing improves with the
//!   nonlinear loss rate γ_nl = μ₁|α₁|², approaching V = 1/9 (−9.5 dB) at
//!   zero frequency for γ_nl ≫ γ₁.
//! - `eq5` — competition above threshold (N > 1), general decay rates and
//!   coupling ratio.
//! - `eq6` — competition at the symmetric optimum (γ_s = γ_i = γ₁,
//!   μ₁ = μ₂), a function of the scaled frequency ω̂ = ω/(2γ₁) alone. At
//!   threshold it meets the no-competition spectrum with V = 1/2 (−3 dB)
//!   at zero frequency; above threshold the oscillating signal/idler pair
//!   injects excess low-frequency noise and pulls the whole spectrum
//!   toward shot noise as N grows.

use crate::dynamics;
use crate::error::Error;
use crate::model::{CavityConfig, PumpDrive};
use crate::thresholds;

/// Parameters entering the squeezing spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumParams {
    /// Nonlinear loss rate γ_nl = μ₁|α₁|² (s⁻¹).
    pub gamma_nl: f64,
    /// Fundamental decay rate γ₁ (s⁻¹).
    pub gamma1: f64,
    /// Fundamental coupling rate γ₁ᶜ (s⁻¹).
    pub gamma1_c: f64,
    /// Amplitude quadrature spectrum of the pump field (shot noise = 1).
    pub v1_in: f64,
    /// Scaled pump power N = P₁/P₁ᵗʰʳ.
    pub n_scaled: f64,
    /// Coupling ratio r = √(μ₁/μ₂).
    pub r: f64,
    /// γ̄ = √(γ_sγ_i) (s⁻¹).
    pub gamma_bar: f64,
}

impl SpectrumParams {
    pub fn new(
        gamma_nl: f64,
        gamma1: f64,
        gamma1_c: f64,
        v1_in: f64,
        n_scaled: f64,
        r: f64,
        gamma_bar: f64,
    ) -> Result<Self, Error> {
        if gamma_nl < 0.0 || v1_in < 0.0 {
            return Err(Error::InvalidParameter(
                "gamma_nl and v1_in must be non-negative".into(),
            ));
        }
        if !(gamma1 > 0.0) || !(gamma1_c > 0.0) || !(r > 0.0) || !(gamma_bar > 0.0) {
            return Err(Error::InvalidParameter(
                "gamma1, gamma1_c, r and gamma_bar must be positive".into(),
            ));
        }
        Ok(Self {
            gamma_nl,
            gamma1,
            gamma1_c,
            v1_in,
            n_scaled,
            r,
            gamma_bar,
        })
    }

    /// Parameters for a cavity driven at scaled power `n_scaled`, with a
    /// shot-noise-limited pump. Requires zero detunings (the operating
    /// point comes from the analytic branch).
    pub fn from_config(config: &CavityConfig, n_scaled: f64) -> Result<Self, Error> {
        if n_scaled < 0.0 {
            return Err(Error::Domain(format!(
                "n_scaled must be >= 0, got {n_scaled}"
            )));
        }
        let power = n_scaled * thresholds::threshold_power(config);
        let drive = crate::model::pump_drive(power, config.nu)?;
        Self::new(
            gamma_nl_at(config, &drive)?,
            config.fundamental.gamma_total,
            config.fundamental.gamma_coupling,
            1.0,
            n_scaled,
            config.coupling_ratio(),
            config.gamma_bar(),
        )
    }

    /// Loop decay rate γ_f = γ₁ + r·γ̄.
    pub fn gamma_f(&self) -> f64 {
        self.gamma1 + self.r * self.gamma_bar
    }
}

/// Nonlinear loss rate γ_nl = μ₁|α₁|² at the operating point of `drive`.
/// Zero detunings (analytic branch); use [`gamma_nl_of`] with a converged
/// state otherwise.
pub fn gamma_nl_at(config: &CavityConfig, drive: &PumpDrive) -> Result<f64, Error> {
    let report = dynamics::steady_state_analytic(config, drive)?;
    Ok(gamma_nl_of(config, &report.state))
}

/// γ_nl = μ₁|α₁|² of an arbitrary field state.
pub fn gamma_nl_of(config: &CavityConfig, state: &dynamics::FieldState) -> f64 {
    config.mu1 * state.alpha1.norm_sqr()
}

/// Squeezing spectrum of the doubler without competition (model `eq4`)
/// at analysis frequency `omega` (rad/s):
///
/// ```text
/// V₂ = 1 − [8γ_nl² − 8γ_nl·γ₁ᶜ(V₁ⁱⁿ−1)] / [(3γ_nl+γ₁)² + ω²]
/// ```
pub fn v2_no_competition(omega: f64, params: &SpectrumParams) -> f64 {
    let numerator = 8.0 * params.gamma_nl * params.gamma_nl
        - 8.0 * params.gamma_nl * params.gamma1_c * (params.v1_in - 1.0);
    let g = 3.0 * params.gamma_nl + params.gamma1;
    1.0 - numerator / (g * g + omega * omega)
}

/// Squeezing spectrum with competing nonlinearities above threshold
/// (model `eq5`), general decay rates, at `omega` (rad/s):
///
/// ```text
/// V₂ = 1 + [2(N−1)B(ω) − 2N·A(ω)]
///        / [(N−1)²B(ω) + ω²(γ_f/(2γ̄))² + C(N)·N·A(ω)/r + (ω²/(2γ̄))²]
/// ```
///
/// with γ_f = γ₁+rγ̄, A(ω) = r²ω², B(ω) = γ_f²+ω² and
/// C(N) = γ₁/γ̄ + r(N+1) + 2(N−1). Valid for N > 1 with a
/// shot-noise-limited pump and γ₁ᶜ = γ₁.
pub fn v2_competition_general(omega: f64, params: &SpectrumParams) -> Result<f64, Error> {
    let n = params.n_scaled;
    if !(n > 1.0) {
        return Err(Error::Domain(format!(
            "competition spectrum requires N > 1, got N = {n}"
        )));
    }
    let gamma_f = params.gamma_f();
    let omega_sq = omega * omega;
    let a = params.r * params.r * omega_sq;
    let b = gamma_f * gamma_f + omega_sq;
    let c = params.gamma1 / params.gamma_bar + params.r * (n + 1.0) + 2.0 * (n - 1.0);

    let numerator = 2.0 * (n - 1.0) * b - 2.0 * n * a;
    let half_bar = 2.0 * params.gamma_bar;
    let denominator = (n - 1.0) * (n - 1.0) * b
        + omega_sq * (gamma_f / half_bar).powi(2)
        + c * n * a / params.r
        + (omega_sq / half_bar).powi(2);
    Ok(1.0 + numerator / denominator)
}

/// Squeezing spectrum with competition at the symmetric optimum
/// (model `eq6`), as a function of ω̂ = ω/(2γ₁):
///
/// ```text
/// V₂ = 1 + 2(N−1−ω̂²) / [4N²ω̂² + (N−1−ω̂²)²]
/// ```
///
/// Valid for N ≥ 1. The removable singularity at (N = 1, ω̂ = 0) is filled
/// with its limit value 1/2.
pub fn v2_competition_symmetric(omega_hat: f64, n_scaled: f64) -> Result<f64, Error> {
    if n_scaled < 1.0 {
        return Err(Error::Domain(format!(
            "symmetric competition spectrum requires N >= 1, got N = {n_scaled}"
        )));
    }
    let w2 = omega_hat * omega_hat;
    let excess = n_scaled - 1.0 - w2;
    let denominator = 4.0 * n_scaled * n_scaled * w2 + excess * excess;
    if denominator == 0.0 {
        return Ok(0.5);
    }
    Ok(1.0 + 2.0 * excess / denominator)
}

/// Verify that the competition spectrum at threshold joins the
/// no-competition spectrum continuously: under symmetric-optimum parameters
/// both reduce to 1 − 2/(4+ω̂²), so the returned maximum gap over a log
/// grid ω ∈ [1e-3, 1e3]·γ₁ is pure roundoff.
pub fn continuity_check(config: &CavityConfig) -> Result<f64, Error> {
    let g1 = config.fundamental.gamma_total;
    let symmetric = config.signal.gamma_total == g1
        && config.idler.gamma_total == g1
        && config.fundamental.gamma_coupling == g1
        && config.mu1 == config.mu2;
    if !symmetric {
        return Err(Error::UnsupportedRegime(
            "continuity check requires the symmetric optimum (gamma_s = gamma_i = gamma1 = gamma1_c, mu1 = mu2)"
                .into(),
        ));
    }
    // At threshold μ₁|α₁|² = γ̄ = γ₁.
    let params = SpectrumParams::new(g1, g1, g1, 1.0, 1.0, 1.0, g1)?;
    let points = 241;
    let mut max_gap = 0f64;
    for k in 0..points {
        let exponent = -3.0 + 6.0 * k as f64 / (points - 1) as f64;
        let omega = g1 * 10f64.powf(exponent);
        let gap = (v2_no_competition(omega, &params)
            - v2_competition_symmetric(omega / (2.0 * g1), 1.0)?)
        .abs();
        max_gap = max_gap.max(gap);
    }
    Ok(max_gap)
}

/// Spectrum model tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumModel {
    /// `eq4` — no competition; grid and minimum in ω (rad/s).
    NoCompetition,
    /// `eq5` — competition, general parameters; grid in ω (rad/s).
    CompetitionGeneral,
    /// `eq6` — competition, symmetric optimum; grid in ω̂ = ω/(2γ₁).
    CompetitionSymmetric,
}

impl SpectrumModel {
    pub fn tag(&self) -> &'static str {
        match self {
            SpectrumModel::NoCompetition => "eq4",
            SpectrumModel::CompetitionGeneral => "eq5",
            SpectrumModel::CompetitionSymmetric => "eq6",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self, Error> {
        match tag {
            "eq4" => Ok(SpectrumModel::NoCompetition),
            "eq5" => Ok(SpectrumModel::CompetitionGeneral),
            "eq6" => Ok(SpectrumModel::CompetitionSymmetric),
            other => Err(Error::Config(format!(
                "unknown spectrum model '{other}' (expected eq4, eq5 or eq6)"
            ))),
        }
    }
}

impl std::fmt::Display for SpectrumModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A swept squeezing spectrum with its located minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingSpectrum {
    pub model: SpectrumModel,
    /// Analysis frequencies: ω in rad/s, or ω̂ for the symmetric model.
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    /// 10·log₁₀(V) for each value.
    pub db: Vec<f64>,
    /// (frequency, V) of the spectrum minimum, refined off-grid by
    /// golden-section search around the best grid point.
    pub minimum: (f64, f64),
}

/// Evaluate `model` on an ascending frequency grid and locate the spectrum
/// minimum.
pub fn spectrum_sweep(
    model: SpectrumModel,
    params: &SpectrumParams,
    omega_grid: &[f64],
) -> Result<SqueezingSpectrum, Error> {
    if omega_grid.is_empty() {
        return Err(Error::InvalidParameter("frequency grid is empty".into()));
    }
    if omega_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "frequency grid must be ascending".into(),
        ));
    }
    let eval = |omega: f64| -> Result<f64, Error> {
        match model {
            SpectrumModel::NoCompetition => Ok(v2_no_competition(omega, params)),
            SpectrumModel::CompetitionGeneral => v2_competition_general(omega, params),
            SpectrumModel::CompetitionSymmetric => v2_competition_symmetric(omega, params.n_scaled),
        }
    };

    let values = omega_grid
        .iter()
        .map(|&w| eval(w))
        .collect::<Result<Vec<_>, _>>()?;
    let db = values.iter().map(|v| 10.0 * v.log10()).collect();

    let (best, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let lo = omega_grid[best.saturating_sub(1)];
    let hi = omega_grid[(best + 1).min(omega_grid.len() - 1)];
    let minimum = golden_section_min(lo, hi, |w| eval(w).unwrap_or(f64::INFINITY));

    Ok(SqueezingSpectrum {
        model,
        omegas: omega_grid.to_vec(),
        values,
        db,
        minimum,
    })
}

/// Golden-section minimization of a unimodal function on [lo, hi].
fn golden_section_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if hi <= lo {
        return (lo, f(lo));
    }
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}
