//! Steady-state location: time-marching onto the attractor followed by
//! Newton refinement, with the neutral NDOPO phase direction deflated.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{non_convergence, Error};
use crate::model::{CavityConfig, PumpDrive};

use super::integrator::march;
use super::{
    assemble_report, branch_dead_band, drive_term, jacobian, rhs, Branch, FieldState,
    SteadyStateReport,
};

type Vec6 = SVector<f64, 6>;
type Mat7 = SMatrix<f64, 7, 7>;
type Vec7 = SVector<f64, 7>;

/// Fundamental amplitude of the trivial branch (α_s = α_i = 0) at any
/// detuning: α₁ = √(2γ₁ᶜ)A₁ / (γ₁ + iΔ₁ + μ₁|α₁|²), with |α₁|² the unique
/// root of the monotone real cubic y((γ₁+μ₁y)² + Δ₁²) = 2γ₁ᶜA₁².
pub fn trivial_branch_alpha1(config: &CavityConfig, drive: &PumpDrive) -> Complex64 {
    let d = drive_term(config, drive);
    if d == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let gamma1 = config.fundamental.gamma_total;
    let delta1 = config.fundamental.detuning;
    let mu1 = config.mu1;
    let d_sq = d * d;

    let f = |y: f64| {
        let g = gamma1 + mu1 * y;
        y * (g * g + delta1 * delta1) - d_sq
    };
    // y·γ₁² and μ₁²y³ each bound the left side from below, so the root is
    // below both d²/γ₁² and (d²/μ₁²)^(1/3).
    let mut hi = (d_sq / (gamma1 * gamma1)).min((d_sq / (mu1 * mu1)).cbrt()) * (1.0 + 1e-12);
    let mut lo = 0.0;
    debug_assert!(f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = 0.5 * (lo + hi);
    d / Complex64::new(gamma1 + mu1 * y, delta1)
}

/// Neutral phase direction of the NDOPO branch at `state`: the tangent of
/// the gauge family (e^{iφ}α_s, e^{−iφ}α_i) at φ = 0.
fn phase_direction(state: &FieldState) -> Vec6 {
    Vec6::from_column_slice(&[
        0.0,
        0.0,
        -state.alpha_s.im,
        state.alpha_s.re,
        state.alpha_i.im,
        -state.alpha_i.re,
    ])
}

/// One Newton step. On the NDOPO branch the free phase makes the Jacobian
/// singular, so the step is computed from the bordered system
/// [[J, v], [vᵀ, 0]]·[δ, λ] = [−F, 0], which constrains δ ⊥ v.
fn newton_step(
    state: &FieldState,
    config: &CavityConfig,
    deriv: &FieldState,
    deflate: bool,
) -> Option<Vec6> {
    let jac = jacobian(state, config);
    let f = Vec6::from_column_slice(&deriv.to_array());
    if deflate {
        let v = phase_direction(state).normalize();
        let mut m = Mat7::zeros();
        m.fixed_view_mut::<6, 6>(0, 0).copy_from(&jac);
        for k in 0..6 {
            m[(k, 6)] = v[k];
            m[(6, k)] = v[k];
        }
        let mut b = Vec7::zeros();
        for k in 0..6 {
            b[k] = -f[k];
        }
        let sol = m.lu().solve(&b)?;
        Some(Vec6::from_fn(|k, _| sol[k]))
    } else {
        jac.lu().solve(&(-f))
    }
}

fn apply_step(state: &FieldState, delta: &Vec6, damping: f64) -> FieldState {
    let arr = state.to_array();
    FieldState::from_array(std::array::from_fn(|k| arr[k] + damping * delta[k]))
}

struct NewtonOutcome {
    state: FieldState,
    residual: f64,
}

/// Newton iteration with residual-based damping. Converges quadratically
/// once inside the basin, so the final residual typically lands near the
/// floating-point floor, far below `tol`.
fn newton_refine(
    start: FieldState,
    config: &CavityConfig,
    drive: &PumpDrive,
    tol: f64,
) -> Option<NewtonOutcome> {
    let dead_band = branch_dead_band(config);
    let gamma1 = config.fundamental.gamma_total;
    let mut state = start;
    let mut res_prev = f64::INFINITY;
    let mut best: Option<NewtonOutcome> = None;

    for _ in 0..60 {
        let deriv = rhs(&state, config, drive);
        let res = deriv.norm_inf();
        if !res.is_finite() {
            break;
        }
        if best.as_ref().is_none_or(|b| res < b.residual) {
            best = Some(NewtonOutcome {
                state,
                residual: res,
            });
        }
        let floor = 64.0 * f64::EPSILON * gamma1 * (1.0 + state.norm_inf());
        if res <= floor || res >= 0.9 * res_prev {
            break;
        }
        res_prev = res;

        let deflate = state.pair_product().norm() > dead_band;
        let delta = newton_step(&state, config, &deriv, deflate)?;
        let mut damping = 1.0;
        let mut next = apply_step(&state, &delta, damping);
        for _ in 0..8 {
            if rhs(&next, config, drive).norm_inf() < res {
                break;
            }
            damping *= 0.5;
            next = apply_step(&state, &delta, damping);
        }
        state = next;
    }

    let target = tol * gamma1 * 1f64.max(best.as_ref()?.state.alpha1.norm());
    best.filter(|b| b.residual <= target)
}

/// Locate the steady state reached from the trivial branch after a small
/// deterministic signal/idler seed (`kick`, relative to the threshold pair
/// amplitude √(γ̄/√(μ₁μ₂))): time-march to near-stationarity, then Newton.
///
/// Converges onto the attracting branch; transient visits to the unstable
/// trivial state above threshold are detected through the eigenvalues and
/// marched through. The converged residual satisfies
/// max|dα/dt| ≤ tol·γ₁·max(1, |α₁|).
pub fn find_steady_state(
    config: &CavityConfig,
    drive: &PumpDrive,
    tol: f64,
    kick: f64,
) -> Result<SteadyStateReport, Error> {
    if !(kick > 0.0) || !kick.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kick must be > 0, got {kick}"
        )));
    }
    if !(tol > 0.0) || tol > 1e-3 {
        return Err(Error::InvalidParameter(format!(
            "steady-state tolerance must lie in (0, 1e-3], got {tol}"
        )));
    }
    if drive.amplitude == 0.0 {
        return Ok(assemble_report(FieldState::ZERO, config, drive));
    }

    // The parametric gain acts on the θ_s+θ_i = π pair quadrature: in the
    // (δα_s, δα_i*) pair coordinates the growing direction is (1, −1), and
    // a real equal seed (k, k) is exactly orthogonal to it. Seeding both
    // modes at phase π/3 overlaps the growing and decaying quadratures
    // while keeping θ_s−θ_i = 0.
    let pair_scale = (config.gamma_bar() / config.mu_cross()).sqrt();
    let seed = Complex64::from_polar(kick * pair_scale, std::f64::consts::FRAC_PI_3);
    let mut state = FieldState::new(trivial_branch_alpha1(config, drive), seed, seed);

    let min_rate = config
        .fundamental
        .gamma_total
        .min(config.signal.gamma_total)
        .min(config.idler.gamma_total);
    let chunk = 6.0 / min_rate;
    let margin = 1e-9 * config.fundamental.gamma_total;

    let mut prev = state;
    for step in 0..600 {
        state = march(&state, config, drive, chunk, 1e-9)?;
        let change = state.map2(prev, |a, b| a - b).norm_inf() / (1.0 + state.norm_inf());
        prev = state;
        if change > 1e-5 && step < 599 {
            continue;
        }
        if let Some(found) = newton_refine(state, config, drive, tol) {
            let report = assemble_report(found.state, config, drive);
            // A Newton landing on an unstable state (the trivial saddle
            // above threshold) is not the attractor; keep marching.
            if report.max_re_eigenvalue > margin && step < 599 {
                continue;
            }
            classify_guard(&report, config)?;
            return Ok(report);
        }
    }

    Err(non_convergence(format!(
        "steady state did not converge for power {:.6e} W",
        drive.power
    )))
}

/// Reject classifications inside the ambiguity zone just above the
/// dead-band, where trivial and NDOPO states cannot be told apart.
fn classify_guard(report: &SteadyStateReport, config: &CavityConfig) -> Result<(), Error> {
    let pair = report.state.pair_product().norm();
    let dead_band = branch_dead_band(config);
    if report.branch == Branch::Ndopo && pair < 10.0 * dead_band {
        return Err(Error::AmbiguousBranch {
            pair_magnitude: pair,
            dead_band,
        });
    }
    Ok(())
}
