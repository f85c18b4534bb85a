//! Least-squares engine and the fit/extraction procedures built on it.

pub mod coherence;
pub mod cpr;
pub mod nlls;
pub mod peaks;
pub mod processing;
pub mod readout;
pub mod resonator;
pub mod synth;

pub use coherence::{fit_decaying_oscillation, fit_t1};
pub use cpr::fit_cpr;
pub use nlls::{least_squares, nlls_fit, Bounds, FitOptions, FitResult};
pub use peaks::{extract_j, fit_double_gaussian, fit_single_gaussian, PeakDecision, PeakKind, Trace};
pub use processing::{background_divide, flux_axis_map, median_subtract, Axis};
pub use readout::{g_factor_and_dispersion, snr_and_fidelity, ReadoutQuality};
pub use resonator::fit_resonator;
