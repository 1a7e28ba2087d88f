//! Built-in self-verification: cross-checks the analytic formulas against
//! the numerical dynamics and the spectra against their stated limits.
//!
//! The battery is deterministic (seeded sampling), needs no network, and
//! finishes in seconds. Checks that merely record a measured comparison
//! carry the `documented-discrepancy` status and never affect the overall
//! verdict.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    self, find_steady_state, jacobian, rhs, trivial_branch_alpha1, Branch, FieldState,
};
use crate::model::{pump_drive, CavityConfig, ModeParams};
use crate::spectra::{self, SpectrumParams};
use crate::thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    /// Recorded comparison: reported, never counted as a failure.
    #[serde(rename = "documented-discrepancy")]
    DocumentedDiscrepancy,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    fn within(name: &'static str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (measured - expected).abs() <= tolerance && measured.is_finite();
        Check {
            name,
            status: if pass {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured,
            expected,
            tolerance,
        }
    }

    fn recorded(name: &'static str, measured: f64, expected: f64) -> Self {
        Check {
            name,
            status: CheckStatus::DocumentedDiscrepancy,
            measured,
            expected,
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl VerifyReport {
    fn conclude(checks: Vec<Check>) -> Self {
        let overall = checks.iter().all(|c| c.status != CheckStatus::Fail);
        VerifyReport { checks, overall }
    }
}

/// A random zero-detuning configuration with rates spread over three
/// decades and escape efficiency in [0.3, 1].
fn random_config(rng: &mut impl Rng) -> CavityConfig {
    let gamma1 = 10f64.powf(rng.random_range(6.0..9.0));
    let eta = rng.random_range(0.3..1.0);
    CavityConfig::new(
        ModeParams::new(gamma1, eta * gamma1, 0.0).unwrap(),
        ModeParams::simple(10f64.powf(rng.random_range(6.0..9.0)), 0.0).unwrap(),
        ModeParams::simple(10f64.powf(rng.random_range(6.0..9.0)), 0.0).unwrap(),
        10f64.powf(rng.random_range(-1.0..1.0)),
        10f64.powf(rng.random_range(-1.0..1.0)),
        2.818e14,
    )
    .unwrap()
}

/// Threshold from the exact stability criterion versus the closed form,
/// over 200 random zero-detuning configurations.
fn check_threshold_bisection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7452_0001);
    let configs: Vec<CavityConfig> = (0..200).map(|_| random_config(&mut rng)).collect();
    let worst = configs
        .par_iter()
        .map(|config| {
            let formula = thresholds::threshold_power(config);
            let numeric =
                thresholds::numeric_bifurcation_power(config).expect("bracketed threshold");
            (numeric - formula).abs() / formula
        })
        .reduce(|| 0.0, f64::max);
    Check::within("threshold-bisection-matches-formula", worst, 0.0, 1e-3)
}

/// Clamped harmonic power from long-time integration and from Newton
/// steady states, against the closed form, at N ∈ {1.2, 2, 5}.
fn check_clamp(config: &CavityConfig) -> Check {
    let clamp_flux = thresholds::effective_clamped_sh_power(config)
        / thresholds::harmonic_photon_energy(config.nu);
    let p_thr = if config.all_detunings_zero() {
        thresholds::threshold_power(config)
    } else {
        match thresholds::numeric_bifurcation_power(config) {
            Ok(p) => p,
            Err(_) => return Check::within("clamp-flat-above-threshold", f64::NAN, 0.0, 1e-6),
        }
    };
    let mut worst = 0f64;
    for n in [1.2, 2.0, 5.0] {
        let Ok(drive) = pump_drive(n * p_thr, config.nu) else {
            return Check::within("clamp-flat-above-threshold", f64::NAN, 0.0, 1e-6);
        };
        let newton = find_steady_state(config, &drive, 1e-12, 1e-3)
            .map(|r| r.fluxes.sh_flux)
            .unwrap_or(f64::NAN);
        let seed = Complex64::from_polar(
            1e-3 * (config.gamma_bar() / config.mu_cross()).sqrt(),
            std::f64::consts::FRAC_PI_3,
        );
        let mut state = FieldState::new(trivial_branch_alpha1(config, &drive), seed, seed);
        // Independent route: chunked integration until the state stops
        // moving. Near threshold the slow parametric mode needs hundreds of
        // cavity lifetimes.
        let chunk = 10.0
            / config
                .fundamental
                .gamma_total
                .min(config.signal.gamma_total)
                .min(config.idler.gamma_total);
        let mut ode = f64::NAN;
        for _ in 0..300 {
            let next = match dynamics::integrate(&state, config, &drive, chunk, 1e-11) {
                Ok(t) => t.final_state(),
                Err(_) => break,
            };
            let change = next.map2(state, |a, b| a - b).norm_inf() / (1.0 + next.norm_inf());
            state = next;
            if change < 1e-9 {
                ode = dynamics::sh_output_flux(&state, config);
                break;
            }
        }
        worst = worst
            .max((newton - clamp_flux).abs() / clamp_flux)
            .max((ode - clamp_flux).abs() / clamp_flux);
    }
    Check::within("clamp-flat-above-threshold", worst, 0.0, 1e-6)
}

/// Below threshold the harmonic power must increase strictly with pump
/// power.
fn check_below_threshold_monotone(config: &CavityConfig) -> Check {
    let p_thr = thresholds::threshold_power(config);
    let grid: Vec<f64> = (1..=40).map(|k| 0.95 * p_thr * k as f64 / 40.0).collect();
    let violations = match thresholds::power_curve(config, &grid) {
        Ok(curve) => curve.windows(2).filter(|w| w[1].p2 <= w[0].p2).count(),
        Err(_) => grid.len(),
    };
    Check::within(
        "below-threshold-monotone-harmonic-power",
        violations as f64,
        0.0,
        0.5,
    )
}

/// ε(P₁ᵐⁱⁿ) = η at the symmetric optimum, for η ∈ {0.5, 0.9, 1.0}.
fn check_efficiency_identity(config: &CavityConfig) -> Check {
    let gamma1 = config.fundamental.gamma_total;
    let worst = [0.5, 0.9, 1.0]
        .into_iter()
        .map(|eta| {
            let mut symmetric = CavityConfig::symmetric(gamma1, config.mu1, config.nu).unwrap();
            symmetric.fundamental.gamma_coupling = eta * gamma1;
            let report =
                thresholds::threshold_report(&symmetric, thresholds::ThresholdMode::ZeroDetuning)
                    .unwrap();
            (report.efficiency_at_threshold - eta).abs()
        })
        .fold(0.0, f64::max);
    Check::within(
        "efficiency-at-minimum-threshold-equals-eta",
        worst,
        0.0,
        1e-12,
    )
}

fn check_squeezing_limits(config: &CavityConfig) -> Vec<Check> {
    let gamma1 = config.fundamental.gamma_total;
    let params = SpectrumParams::new(1e3 * gamma1, gamma1, gamma1, 1.0, 1.0, 1.0, gamma1).unwrap();
    let deep = spectra::v2_no_competition(0.0, &params);
    let half = spectra::v2_competition_symmetric(0.0, 1.0).unwrap();
    vec![
        Check::within("deep-squeezing-approaches-one-ninth", deep, 1.0 / 9.0, 1e-3),
        Check::within(
            "deep-squeezing-in-decibels",
            10.0 * deep.log10(),
            -9.5,
            0.05,
        ),
        Check::within("threshold-zero-frequency-value-one-half", half, 0.5, 0.0),
    ]
}

fn check_continuity(config: &CavityConfig) -> Check {
    let symmetric =
        CavityConfig::symmetric(config.fundamental.gamma_total, config.mu1, config.nu).unwrap();
    let gap = spectra::continuity_check(&symmetric).unwrap();
    Check::within(
        "no-competition-joins-competition-at-threshold",
        gap,
        0.0,
        1e-12,
    )
}

/// Shape of the competition spectra at N ∈ {1.001, 1.25, 3}: the
/// zero-frequency spike 1+2/(N−1), the squeezing-region boundary, the
/// monotone decrease of the spike with N, and the located minimum at N = 3.
fn check_spectrum_shapes() -> Vec<Check> {
    let mut checks = Vec::new();

    let mut worst_spike = 0f64;
    let mut spikes = Vec::new();
    for n in [1.001, 1.25, 3.0] {
        let v0 = spectra::v2_competition_symmetric(0.0, n).unwrap();
        let expected = 1.0 + 2.0 / (n - 1.0);
        worst_spike = worst_spike.max((v0 - expected).abs() / expected);
        spikes.push(v0);
    }
    checks.push(Check::within(
        "zero-frequency-spike-value",
        worst_spike,
        0.0,
        1e-9,
    ));

    let mut boundary_violations = 0usize;
    for n in [1.001, 1.25, 3.0] {
        for k in 0..=400 {
            let omega_hat = 4.0 * k as f64 / 400.0;
            let v = spectra::v2_competition_symmetric(omega_hat, n).unwrap();
            let inside = omega_hat * omega_hat > n - 1.0 + 1e-12;
            if (v < 1.0 - 1e-12) != inside && (v - 1.0).abs() > 1e-12 {
                boundary_violations += 1;
            }
        }
    }
    checks.push(Check::within(
        "squeezing-only-beyond-region-boundary",
        boundary_violations as f64,
        0.0,
        0.5,
    ));

    let decreasing = spikes.windows(2).all(|w| w[1] < w[0]);
    checks.push(Check::within(
        "zero-frequency-excess-noise-decreases-with-n",
        if decreasing { 0.0 } else { 1.0 },
        0.0,
        0.5,
    ));

    let grid: Vec<f64> = (0..=800).map(|k| 8.0 * k as f64 / 800.0).collect();
    let params = SpectrumParams::new(3e7, 1e7, 1e7, 1.0, 3.0, 1.0, 1e7).unwrap();
    let sweep =
        spectra::spectrum_sweep(spectra::SpectrumModel::CompetitionSymmetric, &params, &grid)
            .unwrap();
    // Analytic minimum of the symmetric spectrum at N = 3:
    // ω̂² = (N−1) + √((N−1)·4N²), V = 1 − 2√(ab)/(b(2a+√(ab))).
    let a = 2.0f64;
    let b = 36.0f64;
    let w_min = (a + (a * b).sqrt()).sqrt();
    let v_min = 1.0 - 2.0 * (a * b).sqrt() / (b * (2.0 * a + (a * b).sqrt()));
    checks.push(Check::within(
        "minimum-location-at-n3",
        sweep.minimum.0,
        w_min,
        1e-3,
    ));
    checks.push(Check::within(
        "minimum-value-at-n3",
        sweep.minimum.1,
        v_min,
        1e-3,
    ));
    checks
}

struct SweepOutcome {
    conservation: f64,
    rate_asymmetry: f64,
    failed: bool,
}

/// Randomized steady-state sweep: 500 configurations and powers, including
/// η < 1, γ_s ≠ γ_i and mild detunings, auditing photon conservation and
/// the signal/idler rate balance.
///
/// Above threshold a lab-frame steady state only exists when
/// Δ_s/γ_s = Δ_i/γ_i; otherwise the oscillating solution is
/// frequency-pulled and rotates along the free-phase orbit. Detuned
/// above-threshold cases are therefore drawn with proportional detunings;
/// below threshold the trivial branch is stationary for any detunings.
fn check_randomized_steady_sweep() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7452_0002);
    let cases: Vec<(CavityConfig, f64)> = (0..500)
        .map(|k| {
            let mut config = random_config(&mut rng);
            let below = k % 2 == 0;
            if k % 3 == 0 {
                let gamma1 = config.fundamental.gamma_total;
                config.fundamental.detuning = gamma1 * rng.random_range(-0.3..0.3);
                if below {
                    config.signal.detuning =
                        config.signal.gamma_total * rng.random_range(-0.3..0.3);
                    config.idler.detuning = config.idler.gamma_total * rng.random_range(-0.3..0.3);
                } else {
                    let pull = rng.random_range(-0.3..0.3);
                    config.signal.detuning = config.signal.gamma_total * pull;
                    config.idler.detuning = config.idler.gamma_total * pull;
                }
            }
            let n = if below {
                rng.random_range(0.2..0.9)
            } else {
                rng.random_range(1.3..4.0)
            };
            (config, n)
        })
        .collect();

    let outcomes: Vec<SweepOutcome> = cases
        .par_iter()
        .map(|(config, n)| {
            let threshold = if config.all_detunings_zero() {
                Ok(thresholds::threshold_power(config))
            } else {
                thresholds::numeric_bifurcation_power(config)
            };
            let result = threshold
                .and_then(|p_thr| pump_drive(n * p_thr, config.nu))
                .and_then(|drive| {
                    find_steady_state(config, &drive, 1e-12, 1e-3).map(|report| (drive, report))
                });
            match result {
                Ok((drive, report)) => {
                    let conservation =
                        dynamics::conservation_audit(&report, config, &drive).unwrap_or(f64::NAN);
                    let rate_asymmetry = if report.branch == Branch::Ndopo {
                        let s = config.signal.gamma_total * report.state.alpha_s.norm_sqr();
                        let i = config.idler.gamma_total * report.state.alpha_i.norm_sqr();
                        (s - i).abs() / s.max(i)
                    } else {
                        0.0
                    };
                    SweepOutcome {
                        conservation,
                        rate_asymmetry,
                        failed: false,
                    }
                }
                Err(_) => SweepOutcome {
                    conservation: f64::NAN,
                    rate_asymmetry: f64::NAN,
                    failed: true,
                },
            }
        })
        .collect();

    let failures = outcomes.iter().filter(|o| o.failed).count();
    let worst_conservation = outcomes
        .iter()
        .filter(|o| !o.failed)
        .map(|o| o.conservation)
        .fold(0.0, f64::max);
    let worst_asymmetry = outcomes
        .iter()
        .filter(|o| !o.failed)
        .map(|o| o.rate_asymmetry)
        .fold(0.0, f64::max);

    vec![
        Check::within(
            "randomized-sweep-convergence-failures",
            failures as f64,
            0.0,
            0.5,
        ),
        Check::within("conservation-audit-residual", worst_conservation, 0.0, 1e-9),
        Check::within(
            "balanced-signal-idler-photon-rates",
            worst_asymmetry,
            0.0,
            1e-8,
        ),
    ]
}

/// Analytic Jacobian versus central finite differences on 100 random
/// states.
fn check_jacobian() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7452_0003);
    let mut worst = 0f64;
    for _ in 0..100 {
        let mut config = random_config(&mut rng);
        let gamma1 = config.fundamental.gamma_total;
        config.fundamental.detuning = gamma1 * rng.random_range(-1.0..1.0);
        config.signal.detuning = gamma1 * rng.random_range(-1.0..1.0);
        config.idler.detuning = gamma1 * rng.random_range(-1.0..1.0);
        let drive = pump_drive(10f64.powf(rng.random_range(-6.0..-3.0)), config.nu).unwrap();
        let scale = 10f64.powf(rng.random_range(1.0..4.0));
        let mut components = [0.0; 6];
        for c in components.iter_mut() {
            *c = scale * rng.random_range(-1.0..1.0);
        }
        let state = FieldState::from_array(components);

        let analytic = jacobian(&state, &config);
        let base = state.to_array();
        let mut gap = 0f64;
        let mut magnitude = 0f64;
        for col in 0..6 {
            let h = 6e-6 * (base[col].abs() + 0.01 * (1.0 + state.norm_inf()));
            let mut plus = base;
            let mut minus = base;
            plus[col] += h;
            minus[col] -= h;
            let fp = rhs(&FieldState::from_array(plus), &config, &drive).to_array();
            let fm = rhs(&FieldState::from_array(minus), &config, &drive).to_array();
            for row in 0..6 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                gap = gap.max((analytic[(row, col)] - fd).abs());
                magnitude = magnitude.max(analytic[(row, col)].abs());
            }
        }
        worst = worst.max(gap / magnitude);
    }
    Check::within("jacobian-matches-finite-differences", worst, 0.0, 1e-6)
}

/// Compare the general and symmetric competition spectra under
/// symmetric-optimum parameters: the zero-frequency values must agree to
/// 1e-12 for all N in (1, 10]; the full-frequency comparison is recorded
/// with its measured worst-case ratio.
fn check_competition_spectra_agreement() -> Vec<Check> {
    let mut zero_gap = 0f64;
    let mut full_gap = 0f64;
    let mut worst_ratio = 1f64;
    for k in 1..=40 {
        let n = 1.0 + 9.0 * k as f64 / 40.0;
        let params = SpectrumParams::new(n * 1e7, 1e7, 1e7, 1.0, n, 1.0, 1e7).unwrap();
        let general0 = spectra::v2_competition_general(0.0, &params).unwrap();
        let symmetric0 = spectra::v2_competition_symmetric(0.0, n).unwrap();
        zero_gap = zero_gap.max((general0 - symmetric0).abs() / symmetric0);

        for j in 0..=160 {
            let omega_hat = 10f64.powf(-3.0 + 6.0 * j as f64 / 160.0);
            let general = spectra::v2_competition_general(2e7 * omega_hat, &params).unwrap();
            let symmetric = spectra::v2_competition_symmetric(omega_hat, n).unwrap();
            full_gap = full_gap.max((general - symmetric).abs() / symmetric.abs());
            let ratio = general / symmetric;
            if (ratio - 1.0).abs() > (worst_ratio - 1.0).abs() {
                worst_ratio = ratio;
            }
        }
    }
    vec![
        Check::within(
            "competition-spectra-agree-at-zero-frequency",
            zero_gap,
            0.0,
            1e-12,
        ),
        Check::recorded("competition-spectra-full-range-ratio", worst_ratio, 1.0),
        Check::recorded("competition-spectra-full-range-gap", full_gap, 0.0),
    ]
}

/// The clamp formula against dynamics for a proportionally detuned variant
/// of the configuration (Δ_x = 0.4γ_x keeps a lab-frame fixed point).
fn check_detuned_clamp(config: &CavityConfig) -> Check {
    let mut detuned = zero_detuned(config);
    detuned.fundamental.detuning = 0.4 * detuned.fundamental.gamma_total;
    detuned.signal.detuning = 0.4 * detuned.signal.gamma_total;
    detuned.idler.detuning = 0.4 * detuned.idler.gamma_total;
    let clamp_flux = thresholds::effective_clamped_sh_power(&detuned)
        / thresholds::harmonic_photon_energy(detuned.nu);
    let measured = thresholds::numeric_bifurcation_power(&detuned)
        .and_then(|p_thr| pump_drive(2.0 * p_thr, detuned.nu))
        .and_then(|drive| find_steady_state(&detuned, &drive, 1e-12, 1e-3))
        .map(|report| (report.fluxes.sh_flux - clamp_flux).abs() / clamp_flux)
        .unwrap_or(f64::NAN);
    Check::within(
        "detuned-clamp-matches-effective-rate-formula",
        measured,
        0.0,
        1e-6,
    )
}

/// True when the oscillating branch has a lab-frame fixed point: zero
/// signal/idler detunings or detunings proportional to the decay rates.
fn stationary_above_threshold(config: &CavityConfig) -> bool {
    let pull = config.signal.detuning * config.idler.gamma_total
        - config.idler.detuning * config.signal.gamma_total;
    pull.abs()
        <= 1e-12 * (config.signal.gamma_total * config.idler.gamma_total).max(f64::MIN_POSITIVE)
}

/// Run the whole battery against `config`.
pub fn run_verify(config: &CavityConfig) -> VerifyReport {
    let clamp_target = if stationary_above_threshold(config) {
        *config
    } else {
        zero_detuned(config)
    };
    let mut checks = vec![
        check_threshold_bisection(),
        check_clamp(&clamp_target),
        check_detuned_clamp(config),
        check_below_threshold_monotone(&zero_detuned(config)),
        check_efficiency_identity(config),
    ];
    checks.extend(check_squeezing_limits(config));
    checks.push(check_continuity(config));
    checks.extend(check_spectrum_shapes());
    checks.extend(check_randomized_steady_sweep());
    checks.push(check_jacobian());
    checks.extend(check_competition_spectra_agreement());
    VerifyReport::conclude(checks)
}

fn zero_detuned(config: &CavityConfig) -> CavityConfig {
    let mut copy = *config;
    copy.fundamental.detuning = 0.0;
    copy.signal.detuning = 0.0;
    copy.idler.detuning = 0.0;
    copy
}
