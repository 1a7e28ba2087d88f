use approx::assert_relative_eq;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::model::{pump_drive, CavityConfig, ModeParams, PumpDrive};
use crate::thresholds;

fn ref1() -> CavityConfig {
    CavityConfig::symmetric(1e7, 1.0, 2.818e14).unwrap()
}

fn drive_at(config: &CavityConfig, n_scaled: f64) -> PumpDrive {
    pump_drive(n_scaled * thresholds::threshold_power(config), config.nu).unwrap()
}

fn kicked(config: &CavityConfig, drive: &PumpDrive) -> FieldState {
    let seed = Complex64::from_polar(
        1e-3 * (config.gamma_bar() / config.mu_cross()).sqrt(),
        std::f64::consts::FRAC_PI_3,
    );
    FieldState::new(trivial_branch_alpha1(config, drive), seed, seed)
}

#[test]
fn rhs_origin_is_fixed_point_without_drive() {
    let config = ref1();
    let drive = pump_drive(0.0, config.nu).unwrap();
    let deriv = rhs(&FieldState::ZERO, &config, &drive);
    assert_eq!(deriv.norm_inf(), 0.0);
}

#[test]
fn rhs_drive_term_only_at_origin() {
    let config = ref1();
    let drive = drive_at(&config, 2.0);
    let deriv = rhs(&FieldState::ZERO, &config, &drive);
    let expected = (2.0 * config.fundamental.gamma_coupling).sqrt() * drive.amplitude;
    assert_relative_eq!(deriv.alpha1.re, expected, max_relative = 1e-14);
    assert_eq!(deriv.alpha1.im, 0.0);
    assert_eq!(deriv.alpha_s.norm(), 0.0);
    assert_eq!(deriv.alpha_i.norm(), 0.0);
}

#[test]
fn rhs_vanishes_on_analytic_branch() {
    let config = ref1();
    let drive = drive_at(&config, 2.0);
    let report = steady_state_analytic(&config, &drive).unwrap();
    let deriv = rhs(&report.state, &config, &drive);
    let bound = 1e-9 * config.fundamental.gamma_total * report.state.alpha1.norm();
    assert!(deriv.norm_inf() < bound, "residual {}", deriv.norm_inf());
}

#[test]
fn integrate_respects_linear_decay_bound() {
    // With the signal/idler dark, nonlinear loss only accelerates the decay
    // of the fundamental, so e^{-γ₁t} bounds it from above.
    let config = ref1();
    let drive = pump_drive(0.0, config.nu).unwrap();
    let state0 = FieldState::new(Complex64::new(5e3, 2e3), Complex64::ZERO, Complex64::ZERO);
    let t_end = 1e-6;
    let trajectory = integrate(&state0, &config, &drive, t_end, 1e-10).unwrap();
    let a0 = state0.alpha1.norm();
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let bound = a0 * (-config.fundamental.gamma_total * t).exp() * (1.0 + 1e-8);
        assert!(state.alpha1.norm() <= bound);
        assert_eq!(state.alpha_s.norm(), 0.0);
    }
}

#[test]
fn integrate_fully_kicked_state_decays_to_zero() {
    let config = ref1();
    let drive = pump_drive(0.0, config.nu).unwrap();
    let state0 = FieldState::new(
        Complex64::new(3e3, -1e3),
        Complex64::new(2e3, 5e2),
        Complex64::new(-1e3, 1e3),
    );
    let trajectory = integrate(&state0, &config, &drive, 5e-6, 1e-9).unwrap();
    assert!(trajectory.final_state().norm_inf() < 1e-6 * state0.norm_inf());
}

#[test]
fn integrate_below_threshold_lands_on_trivial_branch() {
    let config = ref1();
    let drive = drive_at(&config, 0.5);
    let state = integrate(&kicked(&config, &drive), &config, &drive, 5e-6, 1e-10)
        .unwrap()
        .final_state();
    let cubic = thresholds::below_threshold_alpha1(&config, drive.power).unwrap();
    assert_relative_eq!(state.alpha1.re, cubic, max_relative = 1e-7);
    assert!(state.alpha_s.norm() < 1e-6 * cubic);
    assert!(state.alpha_i.norm() < 1e-6 * cubic);
}

#[test]
fn integrate_above_threshold_reaches_clamped_flux() {
    let config = ref1();
    let drive = drive_at(&config, 2.0);
    let state = integrate(&kicked(&config, &drive), &config, &drive, 2e-5, 1e-10)
        .unwrap()
        .final_state();
    assert_relative_eq!(sh_output_flux(&state, &config), 1e14, max_relative = 1e-6);
}

#[test]
fn integrate_validates_inputs() {
    let config = ref1();
    let drive = pump_drive(0.0, config.nu).unwrap();
    assert!(integrate(&FieldState::ZERO, &config, &drive, -1.0, 1e-9).is_err());
    assert!(integrate(&FieldState::ZERO, &config, &drive, 1e-6, 1e-2).is_err());
    assert!(integrate(&FieldState::ZERO, &config, &drive, 1e-6, 1e-13).is_err());
}

#[test]
fn integrate_step_underflow_carries_partial_trajectory() {
    // An absurd horizon makes the underflow floor larger than any step the
    // dynamics allows, so the run must give up and hand back its progress.
    let config = ref1();
    let drive = drive_at(&config, 0.5);
    let err = integrate(&kicked(&config, &drive), &config, &drive, 1e20, 1e-9).unwrap_err();
    match err {
        Error::NonConvergence { partial, .. } => {
            let partial = partial.expect("partial trajectory attached");
            assert!(!partial.states.is_empty());
        }
        other => panic!("expected NonConvergence, got {other}"),
    }
}

#[test]
fn find_steady_state_zero_drive_is_exactly_zero() {
    let config = ref1();
    let drive = pump_drive(0.0, config.nu).unwrap();
    let report = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
    assert_eq!(report.state, FieldState::ZERO);
    assert_eq!(report.branch, Branch::Trivial);
    assert!(report.stable);
}

#[test]
fn find_steady_state_below_threshold_matches_cubic() {
    let config = ref1();
    let drive = drive_at(&config, 0.5);
    let report = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
    assert_eq!(report.branch, Branch::Trivial);
    assert!(report.stable);
    let cubic = thresholds::below_threshold_alpha1(&config, drive.power).unwrap();
    assert_relative_eq!(report.state.alpha1.re, cubic, max_relative = 1e-10);
    assert!(report.state.alpha1.im.abs() < 1e-8 * cubic);
}

#[test]
fn find_steady_state_above_threshold_reference_values() {
    let config = ref1();
    let drive = drive_at(&config, 2.0);
    let report = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
    assert_eq!(report.branch, Branch::Ndopo);
    assert!(report.stable);
    assert_relative_eq!(report.state.alpha1.norm_sqr(), 2e7, max_relative = 1e-8);
    assert_relative_eq!(report.state.alpha_s.norm_sqr(), 5e6, max_relative = 1e-8);
    assert_relative_eq!(report.state.alpha_i.norm_sqr(), 5e6, max_relative = 1e-8);
    assert_relative_eq!(report.fluxes.sh_flux, 1e14, max_relative = 1e-8);
    assert!(report.conservation_residual < 1e-9);
    let neutral = report.neutral_phase_eigenvalue.expect("neutral phase mode");
    assert!(neutral.abs() < 1e-6 * config.fundamental.gamma_total);
}

#[test]
fn analytic_branch_is_fixed_point_for_all_pump_levels() {
    let config = ref1();
    for k in 0..=50 {
        let n = 10.0 * k as f64 / 50.0;
        let drive = drive_at(&config, n);
        let report = steady_state_analytic(&config, &drive).unwrap();
        let bound = 1e-10 * config.fundamental.gamma_total * report.state.alpha1.norm().max(1.0);
        assert!(
            report.residual <= bound,
            "residual {} at N = {n}",
            report.residual
        );
    }
}

#[test]
fn analytic_branches_agree_at_threshold() {
    let config = ref1();
    let drive = drive_at(&config, 1.0);
    let above = steady_state_analytic(&config, &drive).unwrap();
    let cubic = thresholds::below_threshold_alpha1(&config, drive.power).unwrap();
    assert_relative_eq!(above.state.alpha1.re, cubic, max_relative = 1e-10);
    assert_relative_eq!(above.state.alpha1.norm_sqr(), 1e7, max_relative = 1e-10);
    assert!(above.state.pair_product().norm() < branch_dead_band(&config));
}

#[test]
fn analytic_above_threshold_reference_values() {
    let config = ref1();
    let drive = drive_at(&config, 2.0);
    let report = steady_state_analytic(&config, &drive).unwrap();
    assert_relative_eq!(report.state.alpha1.re, 4472.135955, max_relative = 1e-9);
    assert_relative_eq!(report.state.pair_product().re, -5e6, max_relative = 1e-9);
    assert!(report.state.pair_product().im.abs() < 1e-3);
    assert_relative_eq!(report.state.alpha_s.norm(), 2236.0679, max_relative = 1e-7);
    // Perfect impedance match: the reflected fundamental vanishes.
    assert!(report.fluxes.fundamental_out_flux < 1e-12 * report.fluxes.input_flux);
    assert_relative_eq!(report.fluxes.sh_flux, 1e14, max_relative = 1e-10);
}

#[test]
fn analytic_rejects_detuned_configs() {
    let mut config = ref1();
    config.idler.detuning = 1e6;
    let drive = pump_drive(1e-5, config.nu).unwrap();
    assert!(matches!(
        steady_state_analytic(&config, &drive),
        Err(Error::UnsupportedRegime(_))
    ));
}

#[test]
fn sh_flux_trivial_branch_is_shg_only() {
    let config = ref1();
    let state = FieldState::new(Complex64::new(3e3, 1e3), Complex64::ZERO, Complex64::ZERO);
    assert_relative_eq!(
        sh_output_flux(&state, &config),
        config.mu1 * state.alpha1.norm_sqr().powi(2),
        max_relative = 1e-12
    );
}

#[test]
fn sh_flux_destructive_cancellation() {
    let config = ref1();
    // √μ₁α₁² = −2√μ₂ α_sα_i makes the harmonic field vanish.
    let state = FieldState::new(
        Complex64::new(2e3, 0.0),
        Complex64::new(0.0, 2e3 / 2f64.sqrt()),
        Complex64::new(0.0, 2e3 / 2f64.sqrt()),
    );
    let flux = sh_output_flux(&state, &config);
    assert!(
        flux < 1e-18 * state.alpha1.norm_sqr().powi(2),
        "flux {flux}"
    );
}

#[test]
fn jacobian_zero_state_gives_mode_eigenvalues() {
    let mut config = ref1();
    config.fundamental.detuning = 3e6;
    config.signal.detuning = -2e6;
    let eigs = eigenvalues(&FieldState::ZERO, &config);
    let expected = [
        Complex64::new(-1e7, 3e6),
        Complex64::new(-1e7, -3e6),
        Complex64::new(-1e7, 2e6),
        Complex64::new(-1e7, -2e6),
        Complex64::new(-1e7, 0.0),
        Complex64::new(-1e7, 0.0),
    ];
    for want in expected {
        assert!(
            eigs.iter()
                .any(|got| (got - want).norm() < 1e-3 * want.norm()),
            "missing eigenvalue {want}"
        );
    }
}

#[test]
fn jacobian_signal_idler_stability_flips_at_threshold() {
    let config = ref1();
    let sub_block_max_re = |n: f64| {
        let drive = drive_at(&config, n);
        let state = FieldState::new(
            trivial_branch_alpha1(&config, &drive),
            Complex64::ZERO,
            Complex64::ZERO,
        );
        let jac = jacobian(&state, &config);
        let block = jac.fixed_view::<4, 4>(2, 2).into_owned();
        block
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(sub_block_max_re(0.5) < 0.0);
    assert!(sub_block_max_re(2.0) > 0.0);
}

#[test]
fn jacobian_matches_central_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let gamma1: f64 = 10f64.powf(rng.random_range(6.0..9.0));
        let config = CavityConfig::new(
            ModeParams::new(
                gamma1,
                gamma1 * rng.random_range(0.3..1.0),
                gamma1 * rng.random_range(-1.0..1.0),
            )
            .unwrap(),
            ModeParams::simple(
                10f64.powf(rng.random_range(6.0..9.0)),
                gamma1 * rng.random_range(-1.0..1.0),
            )
            .unwrap(),
            ModeParams::simple(
                10f64.powf(rng.random_range(6.0..9.0)),
                gamma1 * rng.random_range(-1.0..1.0),
            )
            .unwrap(),
            10f64.powf(rng.random_range(-1.0..1.0)),
            10f64.powf(rng.random_range(-1.0..1.0)),
            2.818e14,
        )
        .unwrap();
        let drive = pump_drive(10f64.powf(rng.random_range(-6.0..-3.0)), config.nu).unwrap();
        let scale = 10f64.powf(rng.random_range(1.0..4.0));
        let mut components = [0.0; 6];
        for c in components.iter_mut() {
            *c = scale * rng.random_range(-1.0..1.0);
        }
        let state = FieldState::from_array(components);

        let analytic = jacobian(&state, &config);
        let mut fd = Mat6::zeros();
        let base = state.to_array();
        for col in 0..6 {
            let h = 6e-6 * (base[col].abs() + 0.01 * (1.0 + state.norm_inf()));
            let mut plus = base;
            let mut minus = base;
            plus[col] += h;
            minus[col] -= h;
            let fp = rhs(&FieldState::from_array(plus), &config, &drive).to_array();
            let fm = rhs(&FieldState::from_array(minus), &config, &drive).to_array();
            for row in 0..6 {
                fd[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let magnitude = analytic.iter().fold(0f64, |m, x| m.max(x.abs()));
        let gap = (analytic - fd).iter().fold(0f64, |m, x| m.max(x.abs()));
        assert!(gap <= 1e-6 * magnitude, "gap {gap} vs scale {magnitude}");
    }
}

#[test]
fn growth_rate_zero_at_threshold_condition() {
    let config = ref1();
    // √(μ₁μ₂)|α₁|² = γ̄ with γ_s = γ_i is the exact threshold.
    let alpha1 = Complex64::new((config.gamma_bar() / config.mu_cross()).sqrt(), 0.0);
    let growth = trivial_branch_growth_rate(&config, alpha1);
    assert!(growth.abs() < 1e-9 * config.gamma_bar(), "growth {growth}");
}

#[test]
fn growth_rate_matches_effective_decay_rule_for_symmetric_detuning() {
    let mut config = ref1();
    config.signal.detuning = 0.5e7;
    config.idler.detuning = 0.5e7;
    // Zero growth exactly at √(μ₁μ₂)|α₁|² = |γ̄ + iΔ|.
    let target = Complex64::new(config.gamma_bar(), 0.5e7).norm();
    let at = |amp_sq: f64| trivial_branch_growth_rate(&config, Complex64::new(amp_sq.sqrt(), 0.0));
    assert!(at(target / config.mu_cross()).abs() < 1e-6 * config.gamma_bar());
    assert!(at(1.01 * target / config.mu_cross()) > 0.0);
    assert!(at(0.99 * target / config.mu_cross()) < 0.0);
}

#[test]
fn growth_rate_ignores_antisymmetric_detuning_split() {
    let alpha1 = Complex64::new(4000.0, 500.0);
    let mut reference = None;
    for split in [0.0, 1e6, 5e6, 2e7] {
        let mut config = ref1();
        config.signal.detuning = split;
        config.idler.detuning = -split;
        let growth = trivial_branch_growth_rate(&config, alpha1);
        let reference = *reference.get_or_insert(growth);
        assert_relative_eq!(growth, reference, max_relative = 1e-12);

        // Dense eigensolve of the signal/idler block agrees.
        let state = FieldState::new(alpha1, Complex64::ZERO, Complex64::ZERO);
        let block = jacobian(&state, &config)
            .fixed_view::<4, 4>(2, 2)
            .into_owned();
        let dense = block
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(growth, dense, max_relative = 1e-9);
    }
}

#[test]
fn conservation_audit_below_threshold() {
    let config = ref1();
    for n in [0.2, 0.5, 0.9] {
        let drive = drive_at(&config, n);
        let report = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
        assert!(conservation_audit(&report, &config, &drive).unwrap() < 1e-10);
    }
}

#[test]
fn conservation_audit_hand_bookkeeping_at_n2() {
    let config = ref1();
    let drive = drive_at(&config, 2.0);
    let report = steady_state_analytic(&config, &drive).unwrap();
    let f = &report.fluxes;
    // 4e14 photons/s in = 2·(1e14 at 2ν) + 1e14 signal + 1e14 idler.
    assert_relative_eq!(f.input_flux, 4e14, max_relative = 1e-9);
    assert_relative_eq!(2.0 * f.sh_flux, 2e14, max_relative = 1e-9);
    assert_relative_eq!(f.signal_flux, 1e14, max_relative = 1e-9);
    assert_relative_eq!(f.idler_flux, 1e14, max_relative = 1e-9);
    assert!(conservation_audit(&report, &config, &drive).unwrap() < 1e-10);
}

#[test]
fn conservation_audit_refuses_non_steady_state() {
    let config = ref1();
    let drive = drive_at(&config, 0.5);
    let report = assemble_report(kicked(&config, &drive), &config, &drive);
    assert!(matches!(
        conservation_audit(&report, &config, &drive),
        Err(Error::Domain(_))
    ));
}

#[test]
fn balanced_photon_rates_with_unequal_losses() {
    let mut config = ref1();
    config.signal = ModeParams::simple(0.7e7, 0.0).unwrap();
    config.idler = ModeParams::simple(2.3e7, 0.0).unwrap();
    let drive = drive_at(&config, 3.0);
    let report = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
    assert_eq!(report.branch, Branch::Ndopo);
    let s_rate = config.signal.gamma_total * report.state.alpha_s.norm_sqr();
    let i_rate = config.idler.gamma_total * report.state.alpha_i.norm_sqr();
    assert_relative_eq!(s_rate, i_rate, max_relative = 1e-8);
}

#[test]
fn above_threshold_amplitude_linear_in_pump_amplitude() {
    let config = ref1();
    let slope = (2.0 * config.fundamental.gamma_coupling).sqrt()
        / (config.fundamental.gamma_total + config.coupling_ratio() * config.gamma_bar());
    for n in [1.5, 2.0, 3.0, 5.0] {
        let drive = drive_at(&config, n);
        let report = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
        assert_relative_eq!(
            report.state.alpha1.norm(),
            slope * drive.amplitude,
            max_relative = 1e-6
        );
    }
}

#[test]
fn fluxes_invariant_under_phase_gauge_rotation() {
    let config = ref1();
    let drive = drive_at(&config, 2.0);
    let base = steady_state_analytic(&config, &drive).unwrap();
    for phi in [0.3, 1.2, -2.5] {
        let rot = Complex64::from_polar(1.0, phi);
        let rotated = FieldState::new(
            base.state.alpha1,
            base.state.alpha_s * rot,
            base.state.alpha_i / rot,
        );
        let deriv = rhs(&rotated, &config, &drive);
        assert!(
            deriv.norm_inf() < 1e-8 * config.fundamental.gamma_total * base.state.alpha1.norm()
        );
        let f = output_fluxes(&rotated, &config, &drive);
        assert_relative_eq!(f.sh_flux, base.fluxes.sh_flux, max_relative = 1e-12);
        assert_relative_eq!(f.signal_flux, base.fluxes.signal_flux, max_relative = 1e-12);
        assert_relative_eq!(f.idler_flux, base.fluxes.idler_flux, max_relative = 1e-12);
    }
}

#[test]
fn clamped_flux_independent_of_pump_above_threshold() {
    let config = ref1();
    for n in [1.2, 2.0, 5.0] {
        let drive = drive_at(&config, n);
        let newton = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
        assert_relative_eq!(newton.fluxes.sh_flux, 1e14, max_relative = 1e-6);
        let analytic = steady_state_analytic(&config, &drive).unwrap();
        assert_relative_eq!(analytic.fluxes.sh_flux, 1e14, max_relative = 1e-10);
    }
}

#[test]
fn near_threshold_classification_is_never_a_confident_ndopo_guess() {
    let config = ref1();
    let drive = drive_at(&config, 1.0 + 5e-6);
    match find_steady_state(&config, &drive, 1e-10, 1e-3) {
        Ok(report) => {
            let pair = report.state.pair_product().norm();
            assert!(
                report.branch == Branch::Trivial || pair >= 10.0 * branch_dead_band(&config),
                "ambiguous pair magnitude {pair} classified as ndopo"
            );
        }
        Err(Error::AmbiguousBranch { .. }) | Err(Error::NonConvergence { .. }) => {}
        Err(other) => panic!("unexpected error {other}"),
    }
}
