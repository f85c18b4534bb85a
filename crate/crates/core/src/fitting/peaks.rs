//! Gaussian peak models and the single/double peak decision used to read a
//! coupling strength off two-tone spectroscopy traces.
//!
//! Trace abscissae are drive frequencies in GHz; peak widths share that unit.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::nlls::{check_trace, nlls_fit, Bounds, FitResult};
use crate::error::{Error, Result};

/// Minimum number of samples for any peak fit.
pub const MIN_POINTS: usize = 10;
/// Relative chi-square improvement that counts as a second peak.
pub const DOUBLE_PEAK_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct Trace<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
}

impl<'a> Trace<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        Self { x, y }
    }

    fn check(&self) -> Result<()> {
        check_trace(self.x, self.y)?;
        if self.x.len() < MIN_POINTS {
            return Err(Error::Invalid(format!(
                "peak fits need >= {MIN_POINTS} points, got {}",
                self.x.len()
            )));
        }
        Ok(())
    }

    fn span(&self) -> (f64, f64) {
        let lo = self.x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Unit-area Gaussian.
pub fn gaussian(x: f64, centre: f64, sigma: f64) -> f64 {
    let z = (x - centre) / sigma;
    (-0.5 * z * z).exp() / (TAU * sigma * sigma).sqrt()
}

/// `A g(x; f_a, sigma) + B x + C`; `p = [A, f_a, sigma, B, C]`.
pub fn single_gaussian_model(x: f64, p: &[f64]) -> f64 {
    p[0] * gaussian(x, p[1], p[2]) + p[3] * x + p[4]
}

/// `A_a g(x; f_a, sigma) + A_b g(x; f_b, sigma) + B x + C`.
pub fn double_gaussian_model(x: f64, f_a: f64, sigma: f64, p: &[f64]) -> f64 {
    p[0] * gaussian(x, f_a, sigma) + p[1] * gaussian(x, p[2], sigma) + p[3] * x + p[4]
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn endpoint_line(t: &Trace) -> (f64, f64) {
    let n = t.x.len();
    let (x0, x1) = (t.x[0], t.x[n - 1]);
    let slope = if x1 != x0 { (t.y[n - 1] - t.y[0]) / (x1 - x0) } else { 0.0 };
    (slope, t.y[0] - slope * x0)
}

/// Index of the largest deviation from the median, plus that deviation.
fn extremum(y: &[f64]) -> (usize, f64) {
    let m = median(y);
    y.iter()
        .map(|v| v - m)
        .enumerate()
        .fold((0, 0.0), |best, (i, d)| if d.abs() > best.1.abs() { (i, d) } else { best })
}

/// Width from the half-maximum crossings around `peak`; never below the
/// local sample spacing.
fn half_width_sigma(t: &Trace, dev: &[f64], peak: usize) -> f64 {
    let half = 0.5 * dev[peak].abs();
    let same = |i: usize| dev[i].signum() == dev[peak].signum() && dev[i].abs() >= half;
    let mut lo = peak;
    while lo > 0 && same(lo - 1) {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < dev.len() && same(hi + 1) {
        hi += 1;
    }
    let spacing = {
        let a = peak.saturating_sub(1);
        let b = (peak + 1).min(t.x.len() - 1);
        ((t.x[b] - t.x[a]).abs() / (b - a).max(1) as f64).max(f64::MIN_POSITIVE)
    };
    ((t.x[hi] - t.x[lo]).abs() / 2.3548).max(spacing)
}

pub fn single_gaussian_init(t: &Trace) -> [f64; 5] {
    let (b, c) = endpoint_line(t);
    let base = median(t.y);
    let dev: Vec<f64> = t.y.iter().map(|v| v - base).collect();
    let (peak, height) = extremum(t.y);
    let sigma = half_width_sigma(t, &dev, peak);
    let area = height * sigma * TAU.sqrt();
    [area, t.x[peak], sigma, b, c]
}

fn sigma_bounds(t: &Trace) -> (f64, f64) {
    let (lo, hi) = t.span();
    let width = (hi - lo).max(f64::MIN_POSITIVE);
    (width * 1e-6, width)
}

pub fn fit_single_gaussian(t: &Trace) -> Result<FitResult> {
    t.check()?;
    let init = single_gaussian_init(t);
    let (lo, hi) = t.span();
    let (smin, smax) = sigma_bounds(t);
    let bounds = Bounds {
        lower: vec![f64::NEG_INFINITY, lo, smin, f64::NEG_INFINITY, f64::NEG_INFINITY],
        upper: vec![f64::INFINITY, hi, smax, f64::INFINITY, f64::INFINITY],
    };
    nlls_fit(single_gaussian_model, t.x, t.y, &["A", "f_a", "sigma", "B", "C"], &init, Some(&bounds))
}

/// Double-Gaussian fit with the first centre and the shared width frozen.
/// Parameters: `A_a, A_b, f_b, B, C`.
pub fn fit_double_gaussian(t: &Trace, fixed_f_a: f64, fixed_sigma: f64) -> Result<FitResult> {
    fit_double_gaussian_constrained(t, fixed_f_a, fixed_sigma, None)
}

/// As [`fit_double_gaussian`]; `a_b` pins the second amplitude when given,
/// in which case `f_b` is reported as `f_a` with zero error.
pub fn fit_double_gaussian_constrained(
    t: &Trace,
    f_a: f64,
    sigma: f64,
    a_b: Option<f64>,
) -> Result<FitResult> {
    t.check()?;
    if !(sigma > 0.0 && sigma.is_finite() && f_a.is_finite()) {
        return Err(Error::Invalid(format!("fixed peak needs finite f_a and sigma > 0, got {f_a}, {sigma}")));
    }
    let names = ["A_a", "A_b", "f_b", "B", "C"];
    let (b0, c0) = endpoint_line(t);

    if let Some(a_b) = a_b {
        let init = [single_amplitude(t, f_a, sigma, b0, c0), b0, c0];
        let model = |x: f64, p: &[f64]| double_gaussian_model(x, f_a, sigma, &[p[0], a_b, f_a, p[1], p[2]]);
        let fit = nlls_fit(model, t.x, t.y, &["A_a", "B", "C"], &init, None)?;
        return Ok(FitResult {
            names: names.iter().map(|s| s.to_string()).collect(),
            params: vec![fit.params[0], a_b, f_a, fit.params[1], fit.params[2]],
            sigmas: vec![fit.sigmas[0], 0.0, 0.0, fit.sigmas[1], fit.sigmas[2]],
            ..fit
        });
    }

    let (lo, hi) = t.span();
    let bounds = Bounds {
        lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY, lo, f64::NEG_INFINITY, f64::NEG_INFINITY],
        upper: vec![f64::INFINITY, f64::INFINITY, hi, f64::INFINITY, f64::INFINITY],
    };
    let a_a = single_amplitude(t, f_a, sigma, b0, c0);
    // residual of the one-peak seed; its largest excursion seeds f_b
    let resid: Vec<f64> = t
        .x
        .iter()
        .zip(t.y)
        .map(|(&x, &y)| y - (a_a * gaussian(x, f_a, sigma) + b0 * x + c0))
        .collect();
    let (peak, height) = extremum(&resid);
    let mut seeds = vec![t.x[peak].clamp(lo, hi)];
    for s in [f_a + 3.0 * sigma, f_a - 3.0 * sigma] {
        seeds.push(s.clamp(lo, hi));
    }
    let a_b0 = height * sigma * TAU.sqrt();

    let mut best: Option<FitResult> = None;
    let mut first_err = None;
    for f_b in seeds {
        let init = [a_a, a_b0, f_b, b0, c0];
        let model = |x: f64, p: &[f64]| double_gaussian_model(x, f_a, sigma, p);
        match nlls_fit(model, t.x, t.y, &names, &init, Some(&bounds)) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.rss < b.rss) {
                    best = Some(fit);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::DegenerateFit("no double-peak seed converged".into())))
}

/// Least-squares amplitude of a fixed Gaussian on top of a fixed line.
fn single_amplitude(t: &Trace, f_a: f64, sigma: f64, b: f64, c: f64) -> f64 {
    let (num, den) = t.x.iter().zip(t.y).fold((0.0, 0.0), |(n, d), (&x, &y)| {
        let g = gaussian(x, f_a, sigma);
        (n + g * (y - b * x - c), d + g * g)
    });
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakKind {
    Single,
    Double,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakDecision {
    pub kind: PeakKind,
    /// `(f_a - f_b) / 2` in MHz; zero for a single peak.
    pub j_mhz: f64,
    /// One-sigma error of `f_b`, MHz; zero for a single peak.
    pub j_sigma: f64,
    /// `(chi2_single - chi2_double) / chi2_double`.
    pub chi_ratio: f64,
    pub f_a: f64,
    pub sigma: f64,
    pub f_b: f64,
    pub chi2_single: f64,
    pub chi2_double: f64,
}

fn step<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Extraction { step: name, source: Box::new(e) })
}

/// Single/double peak decision from an undriven and a driven trace.
///
/// 1. single Gaussian on the undriven trace;
/// 2. its centre and width are frozen;
/// 3. double Gaussian on the driven trace gives `chi2_double`;
/// 4. single Gaussian on the driven trace gives `chi2_single`;
/// 5. two peaks if the relative improvement reaches [`DOUBLE_PEAK_THRESHOLD`].
pub fn extract_j(undriven: &Trace, driven: &Trace) -> Result<PeakDecision> {
    let reference = step("single_undriven", fit_single_gaussian(undriven))?;
    let (f_a, sigma) = (reference.p("f_a"), reference.p("sigma"));
    let double = step("double_driven", fit_double_gaussian(driven, f_a, sigma))?;
    let single = step("single_driven", fit_single_gaussian(driven))?;
    let chi_ratio = (single.rss - double.rss) / double.rss;
    let f_b = double.p("f_b");
    let (kind, j_mhz, j_sigma) = if chi_ratio >= DOUBLE_PEAK_THRESHOLD {
        (PeakKind::Double, (f_a - f_b) / 2.0 * 1e3, double.s("f_b") * 1e3)
    } else {
        (PeakKind::Single, 0.0, 0.0)
    };
    Ok(PeakDecision {
        kind,
        j_mhz,
        j_sigma,
        chi_ratio,
        f_a,
        sigma,
        f_b,
        chi2_single: single.rss,
        chi2_double: double.rss,
    })
}
