//! Adaptive embedded Runge-Kutta integration of the coupled-mode equations.
//!
//! Dormand-Prince 5(4) with FSAL and standard step-size control. The system
//! is six real dimensions and only mildly stiff (rates within a few
//! decades), so an explicit pair is adequate and keeps runs deterministic.

use crate::error::Error;
use crate::model::{CavityConfig, PumpDrive};

use super::{rhs, FieldState};

/// Step bookkeeping of one integration run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Time series produced by [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times (s), strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// States at the sample times.
    pub states: Vec<FieldState>,
    pub step_stats: StepStats,
    /// Step size in use when the run ended (s).
    pub final_step: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> FieldState {
        *self
            .states
            .last()
            .expect("trajectory holds at least the initial state")
    }
}

// Dormand-Prince 5(4) tableau. The equations of motion are autonomous, so
// the stage times c = (0, 1/5, 3/10, 4/5, 8/9, 1, 1) never enter.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights are row 7 of A (FSAL); E is the difference to the
// embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

struct Dopri5<'a> {
    config: &'a CavityConfig,
    drive: &'a PumpDrive,
    tol: f64,
}

impl Dopri5<'_> {
    /// One trial step of size `h`; returns (5th-order state, scaled error
    /// norm, derivative at the new state for FSAL reuse).
    fn try_step(&self, y: &FieldState, f0: &FieldState, h: f64) -> (FieldState, f64, FieldState) {
        let mut k = [[0.0; 6]; 7];
        k[0] = f0.to_array();
        let y0 = y.to_array();

        for stage in 1..7 {
            let mut arg = y0;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for (argc, kc) in arg.iter_mut().zip(kj) {
                        *argc += h * a * kc;
                    }
                }
            }
            k[stage] = rhs(&FieldState::from_array(arg), self.config, self.drive).to_array();
        }

        // Stage 7 argument *is* the fifth-order solution (FSAL).
        let mut y_new = y0;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                for (yc, kc) in y_new.iter_mut().zip(kj) {
                    *yc += h * a * kc;
                }
            }
        }

        let y_next = FieldState::from_array(y_new);
        // Error relative to the larger of the two endpoint norms, with an
        // absolute floor of one photon-amplitude unit.
        let scale = self.tol * (1.0 + FieldState::from_array(y0).norm_inf().max(y_next.norm_inf()));
        let mut err_sq = 0.0;
        for c in 0..6 {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[c];
            }
            let scaled = h * e / scale;
            err_sq += scaled * scaled;
        }
        let err = (err_sq / 6.0).sqrt();
        (y_next, err, FieldState::from_array(k[6]))
    }

    fn initial_step(&self, y: &FieldState, f0: &FieldState, t_end: f64) -> f64 {
        let d0 = y.norm_inf() + 1.0;
        let d1 = f0.norm_inf();
        let h = if d1 > 0.0 {
            0.01 * d0 / d1
        } else {
            1e-6 * t_end
        };
        h.min(t_end)
    }
}

struct RunOutcome {
    state: FieldState,
    stats: StepStats,
    final_step: f64,
}

/// Core integration loop shared by [`integrate`] and the steady-state
/// marcher. `record` receives every accepted (t, state) sample.
fn run(
    state0: &FieldState,
    config: &CavityConfig,
    drive: &PumpDrive,
    t_end: f64,
    tol: f64,
    mut record: impl FnMut(f64, &FieldState),
) -> Result<RunOutcome, (Error, StepStats)> {
    let solver = Dopri5 { config, drive, tol };
    let mut y = *state0;
    let mut f = rhs(&y, config, drive);
    let mut t = 0.0;
    let mut h = solver.initial_step(&y, &f, t_end);
    let mut stats = StepStats::default();
    let h_floor = 1e-14 * t_end;

    while t < t_end {
        h = h.min(t_end - t);
        let (y_new, err, f_new) = solver.try_step(&y, &f, h);
        let healthy = err.is_finite() && y_new.is_finite();
        if healthy && err <= 1.0 {
            t += h;
            y = y_new;
            f = f_new;
            stats.accepted += 1;
            record(t, &y);
        } else {
            stats.rejected += 1;
        }
        let grow = if !healthy {
            MIN_SCALE
        } else if err > 0.0 {
            (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
        } else {
            MAX_SCALE
        };
        h *= grow;
        if h < h_floor && t < t_end {
            return Err((
                crate::error::non_convergence(format!(
                    "step size underflow at t = {t:.6e} s (h = {h:.3e} s)"
                )),
                stats,
            ));
        }
        if stats.accepted + stats.rejected > 50_000_000 {
            return Err((
                crate::error::non_convergence("step budget exhausted".to_string()),
                stats,
            ));
        }
    }

    Ok(RunOutcome {
        state: y,
        stats,
        final_step: h,
    })
}

/// Integrate the equations of motion from `state0` over `[0, t_end]`,
/// recording every accepted step.
///
/// `tol` is the per-step relative error target and must lie in
/// [1e-12, 1e-3]. On step-size underflow the error carries the partial
/// trajectory accumulated so far.
pub fn integrate(
    state0: &FieldState,
    config: &CavityConfig,
    drive: &PumpDrive,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory, Error> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_end must be > 0, got {t_end}"
        )));
    }
    if !(1e-12..=1e-3).contains(&tol) {
        return Err(Error::InvalidParameter(format!(
            "integration tolerance must lie in [1e-12, 1e-3], got {tol}"
        )));
    }

    let mut times = vec![0.0];
    let mut states = vec![*state0];
    match run(state0, config, drive, t_end, tol, |t, y| {
        times.push(t);
        states.push(*y);
    }) {
        Ok(out) => Ok(Trajectory {
            times,
            states,
            step_stats: out.stats,
            final_step: out.final_step,
        }),
        Err((mut err, stats)) => {
            if let Error::NonConvergence { partial, .. } = &mut err {
                *partial = Some(Box::new(Trajectory {
                    times,
                    states,
                    step_stats: stats,
                    final_step: 0.0,
                }));
            }
            Err(err)
        }
    }
}

/// Integrate without recording; used by the steady-state solver.
pub(crate) fn march(
    state0: &FieldState,
    config: &CavityConfig,
    drive: &PumpDrive,
    t_end: f64,
    tol: f64,
) -> Result<FieldState, Error> {
    run(state0, config, drive, t_end, tol, |_, _| {})
        .map(|out| out.state)
        .map_err(|(err, _)| err)
}
