//! `chi2cav` — command-line front end for the competing-χ⁽²⁾ cavity toolkit.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use chi2cav::commands::{build_grid, exit_code_for, run_command, Command};
use chi2cav::config::{load_config, RunConfig, Spacing};
use chi2cav::error::Error;
use chi2cav::spectra::SpectrumModel;
use chi2cav::thresholds::ThresholdMode;

#[derive(Parser)]
#[command(
    name = "chi2cav",
    about = "Simulator for an optical cavity with competing chi^(2) nonlinearities \
             (intracavity SHG competing with nondegenerate OPO)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Threshold power, clamp level and conversion efficiency
    Threshold {
        /// JSON run configuration
        #[arg(long)]
        config: PathBuf,
        /// Use the effective-decay-rate substitution for detuned modes
        #[arg(long)]
        detuned: bool,
        /// Locate the threshold by bisecting the exact stability criterion
        #[arg(long)]
        numeric: bool,
    },
    /// Steady state at one pump power
    Steady {
        #[arg(long)]
        config: PathBuf,
        /// Pump power in watts (falls back to pump_power in the config)
        #[arg(long)]
        power: Option<f64>,
        /// Use the zero-detuning closed form instead of the numeric solver
        #[arg(long)]
        analytic: bool,
    },
    /// Second-harmonic power versus pump power
    ClampCurve {
        #[arg(long)]
        config: PathBuf,
        /// First pump power in watts (falls back to the sweep section)
        #[arg(long)]
        pmin: Option<f64>,
        /// Last pump power in watts
        #[arg(long)]
        pmax: Option<f64>,
        /// Number of grid points
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Squeezing spectrum sweep with located minimum
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Model tag: eq4 (no competition), eq5 (competition, general) or
        /// eq6 (competition, symmetric optimum)
        #[arg(long)]
        model: Option<String>,
        /// Scaled pump power N
        #[arg(long)]
        n: Option<f64>,
        /// Upper edge of the frequency grid in units of gamma1
        #[arg(long)]
        omega_max: Option<f64>,
        /// Number of grid points
        #[arg(long)]
        points: Option<usize>,
    },
    /// Optical frequencies generated by the SHG/SFG/DFG cascade
    Cascade {
        #[arg(long)]
        config: PathBuf,
        /// Signal/idler offset from degeneracy in Hz
        #[arg(long)]
        delta: f64,
        /// Highest cascade order to list (falls back to cascade_order)
        #[arg(long)]
        order: Option<u32>,
    },
    /// Run the self-verification battery
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("CHI2CAV_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        Error::Config(format!(
            "CHI2CAV_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot configure thread pool: {e}")))
}

fn resolve(cli: CliCommand) -> Result<(RunConfig, Command), Error> {
    let (path, command) = match cli {
        CliCommand::Threshold {
            config,
            detuned,
            numeric,
        } => {
            let mode = if numeric {
                ThresholdMode::NumericBifurcation
            } else if detuned {
                ThresholdMode::EffectiveDecaySubstitution
            } else {
                ThresholdMode::ZeroDetuning
            };
            (config, Command::Threshold { mode })
        }
        CliCommand::Steady {
            config,
            power,
            analytic,
        } => {
            let run = load_config(&config)?;
            let power = power.or(run.pump_power).ok_or_else(|| {
                Error::Config("pump power required: pass --power or set pump_power".into())
            })?;
            return Ok((run, Command::Steady { power, analytic }));
        }
        CliCommand::ClampCurve {
            config,
            pmin,
            pmax,
            steps,
        } => {
            let run = load_config(&config)?;
            let sweep = run.sweep.clone();
            let start = pmin.or(sweep.as_ref().map(|s| s.start)).ok_or_else(|| {
                Error::Config("sweep start required: pass --pmin or set sweep.start".into())
            })?;
            let stop = pmax.or(sweep.as_ref().map(|s| s.stop)).ok_or_else(|| {
                Error::Config("sweep stop required: pass --pmax or set sweep.stop".into())
            })?;
            let steps = steps.or(sweep.as_ref().map(|s| s.steps)).unwrap_or(50);
            let spacing = sweep.as_ref().map(|s| s.spacing).unwrap_or(Spacing::Linear);
            let grid = build_grid(start, stop, steps, spacing)?;
            return Ok((run, Command::ClampCurve { grid }));
        }
        CliCommand::Spectrum {
            config,
            model,
            n,
            omega_max,
            points,
        } => {
            let run = load_config(&config)?;
            let section = run.spectrum.clone();
            let model = match model.or(section.as_ref().map(|s| s.model.clone())) {
                Some(tag) => SpectrumModel::from_tag(&tag)?,
                None => SpectrumModel::CompetitionSymmetric,
            };
            let n_scaled = n.or(section.as_ref().map(|s| s.n_scaled)).unwrap_or(2.0);
            let omega_max_over_gamma1 = omega_max
                .or(section.as_ref().map(|s| s.omega_max_over_gamma1))
                .unwrap_or(20.0);
            let points = points.or(section.as_ref().map(|s| s.points)).unwrap_or(201);
            return Ok((
                run,
                Command::Spectrum {
                    model,
                    n_scaled,
                    omega_max_over_gamma1,
                    points,
                },
            ));
        }
        CliCommand::Cascade {
            config,
            delta,
            order,
        } => {
            let run = load_config(&config)?;
            let order = order.unwrap_or(run.cascade_order);
            return Ok((run, Command::Cascade { delta, order }));
        }
        CliCommand::Verify { config } => (config, Command::Verify),
    };
    let run = load_config(&path)?;
    Ok((run, command))
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    match resolve(cli.command).and_then(|(run, command)| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run_command(&command, &run, &mut lock)
    }) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn main() {
    std::process::exit(real_main());
}
