//! Optical frequencies generated by the cascade of χ⁽²⁾ processes between
//! the pump, signal and idler: combs around the fundamental and the
//! harmonic.
//!
//! ```bash
//! cargo run --example cascade_lines
//! ```

use chi2cav::model::{cascade_lines, constants::SPEED_OF_LIGHT, wavelength_nm};

fn main() {
    // A 1064 nm pump with the signal/idler pair pulled 31 nm from
    // degeneracy; Δ is half the signal-idler frequency splitting.
    let nu = SPEED_OF_LIGHT / 1064e-9;
    let delta = (SPEED_OF_LIGHT / 1033e-9 - SPEED_OF_LIGHT / 1095e-9) / 2.0;

    for order in [1, 2] {
        let layout = cascade_lines(nu, delta, order).unwrap();
        println!("cascade order {order}:");
        println!("  infrared comb (around the fundamental):");
        for &f in &layout.infrared_lines {
            println!("    {:>12.4e} Hz  =  {:8.2} nm", f, wavelength_nm(f));
        }
        println!("  visible comb (around the harmonic):");
        for &f in &layout.visible_lines {
            println!("    {:>12.4e} Hz  =  {:8.2} nm", f, wavelength_nm(f));
        }
        println!();
    }

    println!("Order 1 holds the signal/idler (ν ± Δ) plus the sum-frequency and");
    println!("second-harmonic products of the pair around 2ν (2ν ± Δ, 2ν ± 2Δ);");
    println!("order 2 adds the difference-frequency products ν ± 2Δ in the");
    println!("infrared. Line positions only; the model assigns no amplitudes.");
}
