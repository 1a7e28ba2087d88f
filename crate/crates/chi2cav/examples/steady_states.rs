//! Steady states below and above the competition threshold: branch
//! structure, power clamping, impedance matching and the photon-number
//! audit.
//!
//! ```bash
//! cargo run --example steady_states
//! ```

use chi2cav::dynamics::find_steady_state;
use chi2cav::model::{pump_drive, CavityConfig};
use chi2cav::thresholds::{harmonic_photon_energy, threshold_power};

fn main() {
    let config = CavityConfig::symmetric(1e7, 1.0, 2.818e14).unwrap();
    let p_thr = threshold_power(&config);
    let h2nu = harmonic_photon_energy(config.nu);

    println!("threshold power {p_thr:.4e} W\n");
    println!(
        "{:>5} {:>8} {:>12} {:>12} {:>12} {:>12} {:>11} {:>9}",
        "N", "branch", "|a1|^2", "|as|^2", "P2 (W)", "P1_refl (W)", "conserv.", "stable"
    );

    for n in [0.25, 0.5, 0.9, 1.2, 2.0, 3.5, 5.0] {
        let drive = pump_drive(n * p_thr, config.nu).unwrap();
        let report = find_steady_state(&config, &drive, 1e-10, 1e-3).unwrap();
        let h_nu = h2nu / 2.0;
        println!(
            "{n:>5.2} {:>8} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>11.2e} {:>9}",
            report.branch.to_string(),
            report.state.alpha1.norm_sqr(),
            report.state.alpha_s.norm_sqr(),
            h2nu * report.fluxes.sh_flux,
            h_nu * report.fluxes.fundamental_out_flux,
            report.conservation_residual,
            report.stable,
        );
    }

    println!();
    println!("Above threshold the harmonic output pins at the clamp while the");
    println!("signal/idler pair absorbs the excess pump. For this η = 1 cavity the");
    println!("reflected fundamental vanishes at and above threshold (impedance");
    println!("matched); the photon audit closes at every converged point.");
}
