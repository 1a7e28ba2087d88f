//! Simulator and analysis toolkit for an optical cavity with competing χ⁽²⁾
//! nonlinearities: intracavity second-harmonic generation (SHG) competing
//! with nondegenerate optical parametric oscillation (NDOPO).
//!
//! A cavity resonant at the fundamental frequency ν doubles the pump into a
//! non-resonant second harmonic at 2ν. Once the intracavity harmonic is
//! strong enough it pumps a signal/idler pair at ν ± Δ, and the two χ⁽²⁾
//! processes compete. The toolkit integrates the three coupled-mode
//! equations, locates oscillation thresholds and steady-state branches, and
//! evaluates the classical signatures (second-harmonic power clamping,
//! generation of new optical frequencies) and the quantum signature
//! (degradation of the second-harmonic amplitude squeezing spectrum) as
//! numeric tables.
//!
//! Modules:
//! - [`model`] — configuration types, unit conversions between optical power
//!   and photon flux, derived scale quantities, cascade-line bookkeeping.
//! - [`dynamics`] — equations of motion, adaptive integration, steady-state
//!   solving with stability classification, photon-conservation audit.
//! - [`thresholds`] — analytic threshold/clamping/efficiency formulas and
//!   power-sweep curves.
//! - [`spectra`] — second-harmonic amplitude-quadrature squeezing spectra
//!   with and without competition.
//! - [`config`], [`commands`], [`verify`] — config loading, the `chi2cav`
//!   command-line interface, and the built-in self-verification suite.
//!
//! Run `cargo run --example squeezing_spectra` (or any example under
//! `examples/`) for a guided tour of each capability.

// Parameter validation uses negated comparisons (`!(x > 0.0)`) so NaN is
// rejected along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod spectra;
pub mod thresholds;
pub mod verify;

pub use dynamics::{FieldState, SteadyStateReport};
pub use error::Error;
pub use model::{CavityConfig, DerivedScales, ModeParams, PumpDrive};
