use num_complex::Complex64;

use super::nlls::{least_squares, Bounds, FitOptions, FitResult};
use crate::error::{Error, Result};

/// `S21(f) = 1 - (1 + i alpha) / (1 + Q_c/Q_i + 2 i Q_c (f - f_r0)/f_r0)`;
/// `p = [f_r0, Q_c, Q_i, alpha]`.
pub fn resonator_s21(f: f64, p: &[f64]) -> Complex64 {
    let (f0, qc, qi, alpha) = (p[0], p[1], p[2], p[3]);
    let den = Complex64::new(1.0 + qc / qi, 2.0 * qc * (f - f0) / f0);
    Complex64::new(1.0, 0.0) - Complex64::new(1.0, alpha) / den
}

fn initial_guess(f: &[f64], s21: &[Complex64]) -> [f64; 4] {
    let depth: Vec<f64> = s21.iter().map(|s| (Complex64::new(1.0, 0.0) - s).norm_sqr()).collect();
    let (imax, dmax) = depth
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &d)| if d > b.1 { (i, d) } else { b });
    let f0 = f[imax];
    let ratio = (1.0 / dmax.sqrt() - 1.0).max(1e-6);
    let mut lo = imax;
    while lo > 0 && depth[lo - 1] >= 0.5 * dmax {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < f.len() && depth[hi + 1] >= 0.5 * dmax {
        hi += 1;
    }
    let spacing = (f[f.len() - 1] - f[0]).abs() / (f.len() - 1) as f64;
    let fwhm = (f[hi] - f[lo]).abs().max(spacing);
    let q_loaded = f0 / fwhm;
    let q_c = q_loaded * (1.0 + ratio);
    [f0, q_c, q_c / ratio, 0.0]
}

/// Fits background-normalized complex transmission; real and imaginary
/// residuals are stacked.
pub fn fit_resonator(f: &[f64], s21: &[Complex64]) -> Result<FitResult> {
    if f.len() != s21.len() {
        return Err(Error::Invalid(format!("{} frequencies but {} S21 values", f.len(), s21.len())));
    }
    if f.len() < 8 {
        return Err(Error::Invalid("resonator fit needs at least 8 points".into()));
    }
    if f.iter().any(|v| !(v.is_finite() && *v > 0.0)) || s21.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(Error::Invalid("resonator trace has non-finite or non-positive entries".into()));
    }
    let init = initial_guess(f, s21);
    let bounds = Bounds {
        lower: vec![f64::MIN_POSITIVE, 1e-3, 1e-3, f64::NEG_INFINITY],
        upper: vec![f64::INFINITY; 4],
    };
    least_squares(
        |p| {
            let mut r = Vec::with_capacity(2 * f.len());
            for (&fi, s) in f.iter().zip(s21) {
                let d = resonator_s21(fi, p) - s;
                r.push(d.re);
                r.push(d.im);
            }
            r
        },
        &["f_r0", "Q_c", "Q_i", "alpha"],
        &init,
        Some(&bounds),
        &FitOptions::default(),
    )
}
