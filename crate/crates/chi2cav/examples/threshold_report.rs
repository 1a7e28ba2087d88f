//! Threshold powers, the clamp level and conversion efficiency.
//!
//! ```bash
//! cargo run --example threshold_report
//! ```

use chi2cav::model::CavityConfig;
use chi2cav::thresholds::{threshold_report, ThresholdMode};

fn main() {
    // Symmetric optimum: γ_s = γ_i = γ₁ = γ₁ᶜ = 10⁷ s⁻¹, μ₁ = μ₂ = 1 s⁻¹,
    // 1064 nm pump (ν ≈ 2.818e14 Hz). Here the competition threshold equals
    // the minimum threshold and the conversion efficiency at threshold is
    // the full escape efficiency.
    let config = CavityConfig::symmetric(1e7, 1.0, 2.818e14).unwrap();
    let report = threshold_report(&config, ThresholdMode::ZeroDetuning).unwrap();
    println!("symmetric optimum cavity:");
    println!("  threshold power    {:.6e} W", report.p1_thr);
    println!("  minimum threshold  {:.6e} W", report.p1_min);
    println!("  clamp level        {:.6e} W", report.clamped_p2);
    println!("  escape efficiency  {:.3}", report.eta);
    println!("  ε at threshold     {:.6}", report.efficiency_at_threshold);

    // Reducing the output coupling halves the escape efficiency: the
    // minimum threshold doubles and the peak conversion efficiency drops
    // to η.
    let mut undercoupled = config;
    undercoupled.fundamental.gamma_coupling = 0.5e7;
    let report = threshold_report(&undercoupled, ThresholdMode::ZeroDetuning).unwrap();
    println!("\nη = 0.5 cavity:");
    println!("  minimum threshold  {:.6e} W", report.p1_min);
    println!("  ε at threshold     {:.6}", report.efficiency_at_threshold);

    // Lossier signal/idler modes (dispersive mismatch) push the threshold
    // above the minimum; conversion efficiency at threshold falls.
    let mut mismatched = config;
    mismatched.signal.gamma_total = 4e7;
    mismatched.signal.gamma_coupling = 4e7;
    mismatched.idler.gamma_total = 4e7;
    mismatched.idler.gamma_coupling = 4e7;
    let report = threshold_report(&mismatched, ThresholdMode::ZeroDetuning).unwrap();
    println!("\nγ_s = γ_i = 4γ₁ cavity:");
    println!(
        "  threshold power    {:.6e} W  ({:.1}× the minimum)",
        report.p1_thr,
        report.p1_thr / report.p1_min
    );
    println!("  clamp level        {:.6e} W", report.clamped_p2);
    println!("  ε at threshold     {:.6}", report.efficiency_at_threshold);
}
