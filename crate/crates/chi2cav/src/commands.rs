//! Command implementations behind the `chi2cav` binary: table assembly,
//! deterministic CSV/JSON emission, and exit-code conventions.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical non-convergence (partial results are still written, with the
//! affected rows marked).

use std::io::Write;

use serde::Serialize;

use crate::config::{OutputFormat, RunConfig, Spacing};
use crate::dynamics;
use crate::error::Error;
use crate::model::{cascade_lines, pump_drive, wavelength_nm, CavityConfig};
use crate::spectra::{self, SpectrumModel, SpectrumParams};
use crate::thresholds::{self, Regime, ThresholdMode};
use crate::verify;

/// One table cell. Numbers are emitted in scientific notation with 15
/// significant digits so emitted CSV reloads losslessly.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

pub fn format_number(x: f64) -> String {
    format!("{x:.14e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::json!(x),
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

/// A numeric table with optional footer line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub footer: Option<String>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        if let Some(footer) = &self.footer {
            out.push_str(footer);
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(Cell::json).collect())
            .collect();
        let value = serde_json::json!({
            "columns": self.columns,
            "rows": rows,
            "footer": self.footer,
        });
        serde_json::to_string_pretty(&value).expect("table serialization")
    }
}

/// Resolved command to execute.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Threshold {
        mode: ThresholdMode,
    },
    Steady {
        power: f64,
        analytic: bool,
    },
    ClampCurve {
        grid: Vec<f64>,
    },
    Spectrum {
        model: SpectrumModel,
        n_scaled: f64,
        omega_max_over_gamma1: f64,
        points: usize,
    },
    Cascade {
        delta: f64,
        order: u32,
    },
    Verify,
}

fn threshold_table(cavity: &CavityConfig, mode: ThresholdMode) -> Result<Table, Error> {
    let report = thresholds::threshold_report(cavity, mode)?;
    Ok(Table {
        columns: vec![
            "p1_thr_w",
            "p1_min_w",
            "eta",
            "clamped_p2_w",
            "efficiency_at_threshold",
            "mode",
        ],
        rows: vec![vec![
            Cell::Num(report.p1_thr),
            Cell::Num(report.p1_min),
            Cell::Num(report.eta),
            Cell::Num(report.clamped_p2),
            Cell::Num(report.efficiency_at_threshold),
            Cell::Text(report.mode.to_string()),
        ]],
        footer: None,
    })
}

fn steady_table(
    run: &RunConfig,
    cavity: &CavityConfig,
    power: f64,
    analytic: bool,
) -> Result<Table, Error> {
    let drive = pump_drive(power, cavity.nu)?;
    let report = if analytic {
        dynamics::steady_state_analytic(cavity, &drive)?
    } else {
        dynamics::find_steady_state(cavity, &drive, run.tol, run.kick)?
    };
    let p2 = thresholds::harmonic_photon_energy(cavity.nu) * report.fluxes.sh_flux;
    Ok(Table {
        columns: vec![
            "alpha1_re",
            "alpha1_im",
            "alpha_s_re",
            "alpha_s_im",
            "alpha_i_re",
            "alpha_i_im",
            "branch",
            "sh_flux",
            "p2_w",
            "fundamental_out_flux",
            "conservation_residual",
            "max_re_eigenvalue",
        ],
        rows: vec![vec![
            Cell::Num(report.state.alpha1.re),
            Cell::Num(report.state.alpha1.im),
            Cell::Num(report.state.alpha_s.re),
            Cell::Num(report.state.alpha_s.im),
            Cell::Num(report.state.alpha_i.re),
            Cell::Num(report.state.alpha_i.im),
            Cell::Text(report.branch.to_string()),
            Cell::Num(report.fluxes.sh_flux),
            Cell::Num(p2),
            Cell::Num(report.fluxes.fundamental_out_flux),
            Cell::Num(report.conservation_residual),
            Cell::Num(report.max_re_eigenvalue),
        ]],
        footer: None,
    })
}

fn clamp_curve_table(cavity: &CavityConfig, grid: &[f64]) -> Result<(Table, bool), Error> {
    let curve = thresholds::power_curve(cavity, grid)?;
    let any_failed = curve.iter().any(|p| p.regime == Regime::Failed);
    let rows = curve
        .iter()
        .map(|point| {
            vec![
                Cell::Num(point.p1),
                Cell::Num(point.p2),
                Cell::Num(point.efficiency),
                Cell::Text(point.regime.to_string()),
            ]
        })
        .collect();
    Ok((
        Table {
            columns: vec!["p1_w", "p2_w", "efficiency", "regime"],
            rows,
            footer: None,
        },
        any_failed,
    ))
}

fn spectrum_params_for(
    run: &RunConfig,
    cavity: &CavityConfig,
    n_scaled: f64,
) -> Result<SpectrumParams, Error> {
    if cavity.all_detunings_zero() {
        SpectrumParams::from_config(cavity, n_scaled)
    } else {
        // Detuned operating point: γ_nl from the converged numeric state at
        // N times the substituted-rule threshold.
        let power = n_scaled * thresholds::detuned_threshold_power(cavity);
        let drive = pump_drive(power, cavity.nu)?;
        let report = dynamics::find_steady_state(cavity, &drive, run.tol, run.kick)?;
        SpectrumParams::new(
            spectra::gamma_nl_of(cavity, &report.state),
            cavity.fundamental.gamma_total,
            cavity.fundamental.gamma_coupling,
            1.0,
            n_scaled,
            cavity.coupling_ratio(),
            cavity.gamma_bar(),
        )
    }
}

fn spectrum_table(
    run: &RunConfig,
    cavity: &CavityConfig,
    model: SpectrumModel,
    n_scaled: f64,
    omega_max_over_gamma1: f64,
    points: usize,
) -> Result<Table, Error> {
    if points < 2 {
        return Err(Error::Config(format!("points must be >= 2, got {points}")));
    }
    if !(omega_max_over_gamma1 > 0.0) {
        return Err(Error::Config(format!(
            "omega-max must be > 0, got {omega_max_over_gamma1}"
        )));
    }
    let params = spectrum_params_for(run, cavity, n_scaled)?;
    let gamma1 = cavity.fundamental.gamma_total;
    // The symmetric model sweeps the scaled frequency ω̂ = ω/(2γ₁); the
    // others sweep ω directly. Both grids cover ω ∈ [0, M·γ₁].
    let hat = model == SpectrumModel::CompetitionSymmetric;
    let top = if hat {
        omega_max_over_gamma1 / 2.0
    } else {
        omega_max_over_gamma1 * gamma1
    };
    let grid: Vec<f64> = (0..points)
        .map(|k| top * k as f64 / (points - 1) as f64)
        .collect();
    let sweep = spectra::spectrum_sweep(model, &params, &grid)?;

    let to_hz = |omega: f64| {
        let angular = if hat { omega * 2.0 * gamma1 } else { omega };
        angular / std::f64::consts::TAU
    };
    let rows = sweep
        .omegas
        .iter()
        .zip(sweep.values.iter().zip(&sweep.db))
        .map(|(&omega, (&v2, &db))| {
            vec![
                Cell::Num(omega),
                Cell::Num(to_hz(omega)),
                Cell::Num(v2),
                Cell::Num(db),
            ]
        })
        .collect();
    let footer = format!(
        "# minimum {} {} v2 {} v2_db {}",
        if hat { "omega_hat" } else { "omega_rad_s" },
        format_number(sweep.minimum.0),
        format_number(sweep.minimum.1),
        format_number(10.0 * sweep.minimum.1.log10()),
    );
    Ok(Table {
        columns: vec![
            if hat { "omega_hat" } else { "omega_rad_s" },
            "f_hz",
            "v2",
            "v2_db",
        ],
        rows,
        footer: Some(footer),
    })
}

fn cascade_table(cavity: &CavityConfig, delta: f64, order: u32) -> Result<Table, Error> {
    let layout = cascade_lines(cavity.nu, delta, order)?;
    let mut rows = Vec::new();
    let mut push_band = |band: &str, center: f64, lines: &[f64]| {
        for &frequency in lines {
            let k = if layout.delta > 0.0 {
                ((frequency - center) / layout.delta).round() as i64
            } else {
                0
            };
            rows.push(vec![
                Cell::Text(band.to_string()),
                Cell::Num(frequency),
                Cell::Num(wavelength_nm(frequency)),
                Cell::Text(k.to_string()),
            ]);
        }
    };
    push_band("ir", cavity.nu, &layout.infrared_lines);
    push_band("vis", 2.0 * cavity.nu, &layout.visible_lines);
    Ok(Table {
        columns: vec!["band", "frequency_hz", "wavelength_nm", "order_k"],
        rows,
        footer: None,
    })
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    report: &'a verify::VerifyReport,
}

fn verify_human(report: &verify::VerifyReport) -> String {
    let mut out = String::new();
    for check in &report.checks {
        let tag = match check.status {
            verify::CheckStatus::Pass => "PASS",
            verify::CheckStatus::Fail => "FAIL",
            verify::CheckStatus::DocumentedDiscrepancy => "DOC ",
        };
        out.push_str(&format!(
            "[{tag}] {:<48} measured={} expected={} tolerance={}\n",
            check.name,
            format_number(check.measured),
            format_number(check.expected),
            format_number(check.tolerance),
        ));
    }
    out.push_str(&format!(
        "overall: {}\n",
        if report.overall { "PASS" } else { "FAIL" }
    ));
    out
}

fn write_output_file(run: &RunConfig, table: &Table) -> Result<(), Error> {
    if let Some(section) = &run.output {
        let text = match section.format {
            OutputFormat::Csv => table.to_csv(),
            OutputFormat::Json => table.to_json(),
        };
        std::fs::write(&section.path, text)?;
    }
    Ok(())
}

/// Execute a resolved command, writing tables to `out`. Returns the process
/// exit code.
pub fn run_command(command: &Command, run: &RunConfig, out: &mut impl Write) -> Result<i32, Error> {
    let cavity = run.cavity()?;
    match command {
        Command::Threshold { mode } => {
            let table = threshold_table(&cavity, *mode)?;
            out.write_all(table.to_csv().as_bytes())?;
            write_output_file(run, &table)?;
            Ok(0)
        }
        Command::Steady { power, analytic } => {
            let table = steady_table(run, &cavity, *power, *analytic)?;
            out.write_all(table.to_csv().as_bytes())?;
            write_output_file(run, &table)?;
            Ok(0)
        }
        Command::ClampCurve { grid } => {
            let (table, any_failed) = clamp_curve_table(&cavity, grid)?;
            out.write_all(table.to_csv().as_bytes())?;
            write_output_file(run, &table)?;
            Ok(if any_failed { 3 } else { 0 })
        }
        Command::Spectrum {
            model,
            n_scaled,
            omega_max_over_gamma1,
            points,
        } => {
            let table = spectrum_table(
                run,
                &cavity,
                *model,
                *n_scaled,
                *omega_max_over_gamma1,
                *points,
            )?;
            out.write_all(table.to_csv().as_bytes())?;
            write_output_file(run, &table)?;
            Ok(0)
        }
        Command::Cascade { delta, order } => {
            let table = cascade_table(&cavity, *delta, *order)?;
            out.write_all(table.to_csv().as_bytes())?;
            write_output_file(run, &table)?;
            Ok(0)
        }
        Command::Verify => {
            let report = verify::run_verify(&cavity);
            out.write_all(verify_human(&report).as_bytes())?;
            let json = serde_json::to_string_pretty(&VerifyDocument { report: &report })
                .expect("report serialization");
            if let Some(section) = &run.output {
                std::fs::write(&section.path, &json)?;
            } else {
                out.write_all(json.as_bytes())?;
                out.write_all(b"\n")?;
            }
            Ok(if report.overall { 0 } else { 1 })
        }
    }
}

/// Build a pump-power grid from sweep parameters.
pub fn build_grid(
    start: f64,
    stop: f64,
    steps: usize,
    spacing: Spacing,
) -> Result<Vec<f64>, Error> {
    if steps < 1 {
        return Err(Error::Config("sweep needs at least one step".into()));
    }
    if !(start >= 0.0) || !(stop >= start) {
        return Err(Error::Config(format!(
            "sweep range must satisfy 0 <= start <= stop, got [{start}, {stop}]"
        )));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    match spacing {
        Spacing::Linear => Ok((0..steps)
            .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
            .collect()),
        Spacing::Log => {
            if !(start > 0.0) {
                return Err(Error::Config("log spacing requires start > 0".into()));
            }
            let ratio = (stop / start).ln();
            Ok((0..steps)
                .map(|k| start * (ratio * k as f64 / (steps - 1) as f64).exp())
                .collect())
        }
    }
}

/// Map an error to the process exit code.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::NonConvergence { .. } | Error::AmbiguousBranch { .. } => 3,
        _ => 2,
    }
}
