//! Coupled-mode dynamics of the competing SHG/NDOPO cavity.
//!
//! The three intracavity amplitudes evolve as
//!
//! ```text
//! dα₁/dt = −(γ₁+iΔ₁)α₁ − 2√(μ₁μ₂) α₁* α_s α_i − μ₁|α₁|² α₁ + √(2γ₁ᶜ) A₁
//! dα_s/dt = −(γ_s+iΔ_s)α_s − √(μ₁μ₂) α₁² α_i* − 2μ₂|α_i|² α_s
//! dα_i/dt = −(γ_i+iΔ_i)α_i − √(μ₁μ₂) α₁² α_s* − 2μ₂|α_s|² α_i
//! ```
//!
//! The μ₁ term is depletion by SHG, the √(μ₁μ₂) cross terms exchange photons
//! between the fundamental and the signal/idler pair through the
//! adiabatically eliminated second-harmonic field, and the μ₂ terms are
//! pump depletion of the NDOPO.

mod integrator;
mod steady;

pub use integrator::{integrate, StepStats, Trajectory};
pub use steady::{find_steady_state, trivial_branch_alpha1};

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::error::Error;
use crate::model::{CavityConfig, PumpDrive};

pub(crate) type Mat6 = SMatrix<f64, 6, 6>;

/// The three complex intracavity field amplitudes, in √(photons/s) units so
/// that |α|² is the photon-number scale of the mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldState {
    pub alpha1: Complex64,
    pub alpha_s: Complex64,
    pub alpha_i: Complex64,
}

impl FieldState {
    pub const ZERO: FieldState = FieldState {
        alpha1: Complex64::new(0.0, 0.0),
        alpha_s: Complex64::new(0.0, 0.0),
        alpha_i: Complex64::new(0.0, 0.0),
    };

    pub fn new(alpha1: Complex64, alpha_s: Complex64, alpha_i: Complex64) -> Self {
        Self {
            alpha1,
            alpha_s,
            alpha_i,
        }
    }

    /// Signal-idler pair amplitude α_s α_i; zero on the trivial branch.
    pub fn pair_product(&self) -> Complex64 {
        self.alpha_s * self.alpha_i
    }

    pub fn is_finite(&self) -> bool {
        [self.alpha1, self.alpha_s, self.alpha_i]
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Largest magnitude among the six real components.
    pub fn norm_inf(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// The six real components, ordered (Re α₁, Im α₁, Re α_s, Im α_s,
    /// Re α_i, Im α_i) to match [`jacobian`].
    pub fn to_array(self) -> [f64; 6] {
        [
            self.alpha1.re,
            self.alpha1.im,
            self.alpha_s.re,
            self.alpha_s.im,
            self.alpha_i.re,
            self.alpha_i.im,
        ]
    }

    /// Inverse of [`FieldState::to_array`].
    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            alpha1: Complex64::new(v[0], v[1]),
            alpha_s: Complex64::new(v[2], v[3]),
            alpha_i: Complex64::new(v[4], v[5]),
        }
    }

    pub(crate) fn map2(self, other: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let a = self.to_array();
        let b = other.to_array();
        Self::from_array(std::array::from_fn(|k| f(a[k], b[k])))
    }
}

/// Pump drive term √(2γ₁ᶜ)·A₁ entering the fundamental equation.
pub(crate) fn drive_term(config: &CavityConfig, drive: &PumpDrive) -> f64 {
    (2.0 * config.fundamental.gamma_coupling).sqrt() * drive.amplitude
}

/// Right-hand side of the equations of motion.
pub fn rhs(state: &FieldState, config: &CavityConfig, drive: &PumpDrive) -> FieldState {
    let g1 = Complex64::new(config.fundamental.gamma_total, config.fundamental.detuning);
    let gs = Complex64::new(config.signal.gamma_total, config.signal.detuning);
    let gi = Complex64::new(config.idler.gamma_total, config.idler.detuning);
    let kappa = config.mu_cross();
    let (a1, as_, ai) = (state.alpha1, state.alpha_s, state.alpha_i);

    let d_a1 = -g1 * a1 - 2.0 * kappa * a1.conj() * as_ * ai - config.mu1 * a1.norm_sqr() * a1
        + drive_term(config, drive);
    let d_as = -gs * as_ - kappa * a1 * a1 * ai.conj() - 2.0 * config.mu2 * ai.norm_sqr() * as_;
    let d_ai = -gi * ai - kappa * a1 * a1 * as_.conj() - 2.0 * config.mu2 * as_.norm_sqr() * ai;

    FieldState::new(d_a1, d_as, d_ai)
}

/// Analytic Jacobian of the equations of motion over the six real field
/// components (Re α₁, Im α₁, Re α_s, Im α_s, Re α_i, Im α_i). The constant
/// drive term drops out, so the Jacobian does not depend on the pump.
pub fn jacobian(state: &FieldState, config: &CavityConfig) -> Mat6 {
    let g1 = Complex64::new(config.fundamental.gamma_total, config.fundamental.detuning);
    let gs = Complex64::new(config.signal.gamma_total, config.signal.detuning);
    let gi = Complex64::new(config.idler.gamma_total, config.idler.detuning);
    let kappa = config.mu_cross();
    let (mu1, mu2) = (config.mu1, config.mu2);
    let (a1, as_, ai) = (state.alpha1, state.alpha_s, state.alpha_i);
    let zero = Complex64::new(0.0, 0.0);

    // Wirtinger partials: da[j][k] = ∂F_j/∂α_k, db[j][k] = ∂F_j/∂α_k*.
    let da = [
        [
            -g1 - 2.0 * mu1 * a1.norm_sqr(),
            -2.0 * kappa * a1.conj() * ai,
            -2.0 * kappa * a1.conj() * as_,
        ],
        [
            -2.0 * kappa * a1 * ai.conj(),
            -gs - 2.0 * mu2 * ai.norm_sqr(),
            -2.0 * mu2 * ai.conj() * as_,
        ],
        [
            -2.0 * kappa * a1 * as_.conj(),
            -2.0 * mu2 * as_.conj() * ai,
            -gi - 2.0 * mu2 * as_.norm_sqr(),
        ],
    ];
    let db = [
        [-2.0 * kappa * as_ * ai - mu1 * a1 * a1, zero, zero],
        [zero, zero, -kappa * a1 * a1 - 2.0 * mu2 * ai * as_],
        [zero, -kappa * a1 * a1 - 2.0 * mu2 * as_ * ai, zero],
    ];

    let mut jac = Mat6::zeros();
    for j in 0..3 {
        for k in 0..3 {
            let (a, b) = (da[j][k], db[j][k]);
            let sum = a + b;
            let diff = a - b;
            jac[(2 * j, 2 * k)] = sum.re;
            jac[(2 * j, 2 * k + 1)] = -diff.im;
            jac[(2 * j + 1, 2 * k)] = sum.im;
            jac[(2 * j + 1, 2 * k + 1)] = diff.re;
        }
    }
    jac
}

/// Largest growth rate of signal/idler fluctuations around the trivial
/// branch (α_s = α_i = 0) with fundamental amplitude `alpha1`.
///
/// Linearizing the pair (δα_s, δα_i*) gives eigenvalues
/// −(g_s+g_i*)/2 ± √(((g_s−g_i*)/2)² + μ₁μ₂|α₁|⁴) with g_s = γ_s+iΔ_s and
/// g_i* = γ_i−iΔ_i; the zero crossing of the returned maximum real part
/// defines the exact oscillation threshold.
pub fn trivial_branch_growth_rate(config: &CavityConfig, alpha1: Complex64) -> f64 {
    let gs = Complex64::new(config.signal.gamma_total, config.signal.detuning);
    let gi_conj = Complex64::new(config.idler.gamma_total, -config.idler.detuning);
    let half_sum = 0.5 * (gs + gi_conj);
    let half_diff = 0.5 * (gs - gi_conj);
    let n1 = alpha1.norm_sqr();
    let root = (half_diff * half_diff + config.mu1 * config.mu2 * n1 * n1).sqrt();
    -half_sum.re + root.re.abs()
}

/// Photon fluxes in and out of the cavity at a steady state, in photons/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputFluxes {
    /// Pump photon flux A₁².
    pub input_flux: f64,
    /// Second-harmonic output flux |√μ₁ α₁² + 2√μ₂ α_s α_i|² at 2ν.
    pub sh_flux: f64,
    /// Reflected fundamental |√(2γ₁ᶜ)α₁ − A₁|² at ν.
    pub fundamental_out_flux: f64,
    /// Fundamental photons lost to channels other than the coupler,
    /// 2(γ₁−γ₁ᶜ)|α₁|².
    pub internal_loss_flux: f64,
    /// Signal photons leaving the cavity, 2γ_s|α_s|².
    pub signal_flux: f64,
    /// Idler photons leaving the cavity, 2γ_i|α_i|².
    pub idler_flux: f64,
}

/// Second-harmonic output photon flux |√μ₁ α₁² + 2√μ₂ α_s α_i|².
///
/// The bracket is the adiabatically eliminated harmonic field: SHG of the
/// fundamental plus the coherent back-conversion of the signal/idler pair.
/// On the trivial branch it reduces to μ₁|α₁|⁴; above threshold the
/// steady-state algebra pins it to γ̄²/μ₂, which is the power clamp.
pub fn sh_output_flux(state: &FieldState, config: &CavityConfig) -> f64 {
    (config.mu1.sqrt() * state.alpha1 * state.alpha1
        + 2.0 * config.mu2.sqrt() * state.pair_product())
    .norm_sqr()
}

/// Assemble all steady-state fluxes. Meaningful only near a fixed point.
pub fn output_fluxes(state: &FieldState, config: &CavityConfig, drive: &PumpDrive) -> OutputFluxes {
    let a_out = (2.0 * config.fundamental.gamma_coupling).sqrt() * state.alpha1 - drive.amplitude;
    OutputFluxes {
        input_flux: drive.amplitude * drive.amplitude,
        sh_flux: sh_output_flux(state, config),
        fundamental_out_flux: a_out.norm_sqr(),
        internal_loss_flux: 2.0
            * (config.fundamental.gamma_total - config.fundamental.gamma_coupling)
            * state.alpha1.norm_sqr(),
        signal_flux: 2.0 * config.signal.gamma_total * state.alpha_s.norm_sqr(),
        idler_flux: 2.0 * config.idler.gamma_total * state.alpha_i.norm_sqr(),
    }
}

/// Relative photon-number balance error at a steady state. Each harmonic
/// photon counts as two fundamental quanta:
///
/// ```text
/// A₁² = |A_out|² + 2(γ₁−γ₁ᶜ)|α₁|² + 2Φ₂ + 2γ_s|α_s|² + 2γ_i|α_i|²
/// ```
///
/// The identity follows from summing 2Re(α*·dα/dt) = 0 over the three modes
/// and holds exactly, detuned or not.
pub fn conservation_residual(state: &FieldState, config: &CavityConfig, drive: &PumpDrive) -> f64 {
    let f = output_fluxes(state, config, drive);
    if f.input_flux == 0.0 {
        let leftover = f.fundamental_out_flux
            + f.internal_loss_flux
            + 2.0 * f.sh_flux
            + f.signal_flux
            + f.idler_flux;
        return if leftover == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let balance = f.fundamental_out_flux
        + f.internal_loss_flux
        + 2.0 * f.sh_flux
        + f.signal_flux
        + f.idler_flux;
    (f.input_flux - balance).abs() / f.input_flux
}

/// Steady-state branch label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Signal and idler off (α_s = α_i = 0).
    Trivial,
    /// Oscillating signal/idler pair.
    Ndopo,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Trivial => write!(f, "trivial"),
            Branch::Ndopo => write!(f, "ndopo"),
        }
    }
}

/// A converged steady state with its stability and flux bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    pub state: FieldState,
    pub branch: Branch,
    /// max |dα/dt| over the six real components at the reported state.
    pub residual: f64,
    /// Largest real part over the stability-relevant eigenvalues (the
    /// neutral phase mode of the NDOPO branch is excluded and reported in
    /// `neutral_phase_eigenvalue`).
    pub max_re_eigenvalue: f64,
    pub stable: bool,
    /// True when `max_re_eigenvalue` sits within ±1e-9·γ₁ of zero.
    pub marginal: bool,
    /// Real part of the excluded neutral phase eigenvalue, NDOPO branch only.
    pub neutral_phase_eigenvalue: Option<f64>,
    pub fluxes: OutputFluxes,
    pub conservation_residual: f64,
}

/// Dead-band below which a pair amplitude |α_s α_i| counts as zero:
/// 1e-6 times the threshold-scale pair amplitude γ̄/√(μ₁μ₂).
pub(crate) fn branch_dead_band(config: &CavityConfig) -> f64 {
    1e-6 * config.gamma_bar() / config.mu_cross()
}

/// Eigenvalues of the Jacobian at `state`.
pub fn eigenvalues(state: &FieldState, config: &CavityConfig) -> Vec<Complex64> {
    jacobian(state, config)
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect()
}

pub(crate) fn assemble_report(
    state: FieldState,
    config: &CavityConfig,
    drive: &PumpDrive,
) -> SteadyStateReport {
    let deriv = rhs(&state, config, drive);
    let residual = deriv.norm_inf();
    let pair = state.pair_product().norm();
    let branch = if pair < branch_dead_band(config) {
        Branch::Trivial
    } else {
        Branch::Ndopo
    };

    let mut eigs = eigenvalues(&state, config);
    let mut neutral = None;
    if branch == Branch::Ndopo {
        // The NDOPO branch is a one-parameter phase family; its neutral
        // direction shows up as one (numerically) zero eigenvalue.
        let (idx, _) = eigs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("six eigenvalues");
        neutral = Some(eigs.remove(idx).re);
    }
    let max_re = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let margin = 1e-9 * config.fundamental.gamma_total;

    SteadyStateReport {
        state,
        branch,
        residual,
        max_re_eigenvalue: max_re,
        stable: max_re < -margin,
        marginal: max_re.abs() <= margin,
        neutral_phase_eigenvalue: neutral,
        fluxes: output_fluxes(&state, config, drive),
        conservation_residual: conservation_residual(&state, config, drive),
    }
}

/// Closed-form steady state at zero detunings.
///
/// Below threshold the signal/idler are off and α₁ is the real positive
/// root of γ₁x + μ₁x³ = √(2γ₁ᶜ)A₁. At and above threshold the fundamental
/// clamps to α₁ = √(2γ₁ᶜ)A₁/(γ₁+rγ̄) and the pair amplitude is
/// p = α_sα_i = −(√(μ₁μ₂)α₁² − γ̄)/(2μ₂) ≤ 0 with γ_s|α_s|² = γ_i|α_i|².
/// The reported phases are θ_s = θ_i = π/2 (θ_s+θ_i = π is forced by the
/// sign structure for real positive α₁ and A₁; θ_s−θ_i is free and set
/// to zero).
pub fn steady_state_analytic(
    config: &CavityConfig,
    drive: &PumpDrive,
) -> Result<SteadyStateReport, Error> {
    if !config.all_detunings_zero() {
        return Err(Error::UnsupportedRegime(
            "analytic steady state requires zero detunings; use find_steady_state".into(),
        ));
    }

    let n = drive.power / crate::thresholds::threshold_power(config);
    let state = if n < 1.0 {
        let x = crate::thresholds::below_threshold_alpha1(config, drive.power)?;
        FieldState::new(
            Complex64::new(x, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
    } else {
        let gamma_bar = config.gamma_bar();
        let r = config.coupling_ratio();
        let alpha1 = drive_term(config, drive) / (config.fundamental.gamma_total + r * gamma_bar);
        // Roundoff can push the pair amplitude marginally positive at N = 1.
        let pair =
            (-(config.mu_cross() * alpha1 * alpha1 - gamma_bar) / (2.0 * config.mu2)).min(0.0);
        let magnitude = pair.abs().sqrt();
        let skew = (config.idler.gamma_total / config.signal.gamma_total).powf(0.25);
        FieldState::new(
            Complex64::new(alpha1, 0.0),
            Complex64::new(0.0, skew * magnitude),
            Complex64::new(0.0, magnitude / skew),
        )
    };
    Ok(assemble_report(state, config, drive))
}

/// Photon-conservation audit of a converged steady-state report.
///
/// Returns the relative balance residual of [`conservation_residual`];
/// refuses reports whose stationarity residual is too large for the audit
/// to be meaningful.
pub fn conservation_audit(
    report: &SteadyStateReport,
    config: &CavityConfig,
    drive: &PumpDrive,
) -> Result<f64, Error> {
    let scale = config.fundamental.gamma_total * report.state.alpha1.norm().max(1.0);
    if report.residual > 1e-6 * scale {
        return Err(Error::Domain(format!(
            "state is not stationary enough to audit: residual {:.3e} exceeds {:.3e}",
            report.residual,
            1e-6 * scale
        )));
    }
    Ok(conservation_residual(&report.state, config, drive))
}

#[cfg(test)]
mod tests;
