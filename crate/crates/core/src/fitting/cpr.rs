//! Fits of qubit frequency against a flux-control parameter.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::nlls::{check_trace, nlls_fit, Bounds, FitResult};
use crate::error::{Error, Result};

/// `2 E sin(x + S sin x) + C` with `x = 2 pi (c - c0) / period`;
/// `p = [E, C, c0, period, S]` (`S` may be omitted for the plain sinusoid).
pub fn cpr_model(c: f64, p: &[f64]) -> f64 {
    let x = TAU * (c - p[2]) / p[3];
    let s = p.get(4).copied().unwrap_or(0.0);
    2.0 * p[0] * (x + s * x.sin()).sin() + p[1]
}

/// Linear least squares of `y ~ basis * coef`; returns `(coef, rss)`.
pub(crate) fn linear_fit(basis: &DMatrix<f64>, y: &[f64]) -> Option<(DVector<f64>, f64)> {
    let yv = DVector::from_column_slice(y);
    let coef = (basis.tr_mul(basis)).cholesky()?.solve(&basis.tr_mul(&yv));
    let rss = (basis * &coef - yv).norm_squared();
    Some((coef, rss))
}

/// Log-spaced candidate periods between `lo` and `hi`.
pub(crate) fn period_candidates(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (0..n).map(|i| lo * (r * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Sinusoid seed `[E, C, c0, period]` from a scan over periods.
fn sinusoid_seed(c: &[f64], y: &[f64]) -> Option<[f64; 4]> {
    let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let spacing = span / (c.len() - 1) as f64;
    let mut best: Option<(f64, f64, DVector<f64>)> = None;
    for period in period_candidates(4.0 * spacing, 1.5 * span, 600) {
        let basis = DMatrix::from_fn(c.len(), 3, |i, j| {
            let x = TAU * c[i] / period;
            match j {
                0 => x.sin(),
                1 => x.cos(),
                _ => 1.0,
            }
        });
        if let Some((coef, rss)) = linear_fit(&basis, y) {
            if best.as_ref().is_none_or(|b| rss < b.1) {
                best = Some((period, rss, coef));
            }
        }
    }
    let (period, _, coef) = best?;
    // u sin x + v cos x = R sin(x + psi)
    let (u, v) = (coef[0], coef[1]);
    let amp = u.hypot(v);
    let psi = v.atan2(u);
    let c0 = (-psi * period / TAU).rem_euclid(period);
    Some([amp / 2.0, coef[2], c0, period])
}

/// Fits `2 E sin(...) + C` to `(control, frequency)` data. The fitted `E`
/// equals one quarter of the peak-to-peak dispersion. Parameter names:
/// `E_sigma, C, control_zero, control_period` and `S` when `skewed`.
pub fn fit_cpr(c: &[f64], y: &[f64], skewed: bool) -> Result<FitResult> {
    check_trace(c, y)?;
    if c.len() < 8 {
        return Err(Error::Invalid("CPR fit needs at least 8 points".into()));
    }
    let seed = sinusoid_seed(c, y).ok_or_else(|| Error::DegenerateFit("no sinusoidal seed".into()))?;
    let names = ["E_sigma", "C", "control_zero", "control_period"];
    let lower = vec![0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::MIN_POSITIVE];
    let upper = vec![f64::INFINITY; 4];
    let plain = nlls_fit(cpr_model, c, y, &names, &seed, Some(&Bounds { lower: lower.clone(), upper: upper.clone() }))?;
    if !skewed {
        return Ok(plain);
    }
    let mut init = plain.params.clone();
    init.push(0.0);
    let mut lower = lower;
    let mut upper = upper;
    lower.push(-0.95);
    upper.push(0.95);
    nlls_fit(
        cpr_model,
        c,
        y,
        &["E_sigma", "C", "control_zero", "control_period", "S"],
        &init,
        Some(&Bounds { lower, upper }),
    )
}
