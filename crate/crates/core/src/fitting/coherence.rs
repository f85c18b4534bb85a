//! Energy-relaxation and Ramsey-type decay fits.

use std::f64::consts::TAU;

use nalgebra::DMatrix;

use super::cpr::{linear_fit, period_candidates};
use super::nlls::{check_trace, nlls_fit, Bounds, FitResult};
use crate::error::{Error, Result};

/// `a exp(-t / T1) + c`; `p = [a, T1, c]`.
pub fn t1_model(t: f64, p: &[f64]) -> f64 {
    p[0] * (-t / p[1]).exp() + p[2]
}

pub fn fit_t1(t: &[f64], y: &[f64]) -> Result<FitResult> {
    check_trace(t, y)?;
    if t.len() < 5 {
        return Err(Error::Invalid("T1 fit needs at least 5 points".into()));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) || t[0] < 0.0 {
        return Err(Error::Invalid("delays must be non-negative and increasing".into()));
    }
    let n = t.len();
    let tail = (n / 10).max(1);
    let c = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let a = y[0] - c;
    let span = t[n - 1] - t[0];
    let target = a.abs() / std::f64::consts::E;
    let t1 = t
        .iter()
        .zip(y)
        .find(|(_, &v)| (v - c).abs() <= target)
        .map(|(&ti, _)| ti - t[0])
        .filter(|v| *v > 0.0)
        .unwrap_or(span / 2.0);
    let bounds = Bounds {
        lower: vec![f64::NEG_INFINITY, span * 1e-9, f64::NEG_INFINITY],
        upper: vec![f64::INFINITY; 3],
    };
    nlls_fit(t1_model, t, y, &["a", "T1", "c"], &[a, t1, c], Some(&bounds))
}

/// `a cos(2 pi t / period - phi) exp(-(t / T2)^(d + 1)) + c + e t`;
/// `p = [a, period, phi, T2, c, e]`.
pub fn decaying_oscillation_model(t: f64, p: &[f64], d: u8) -> f64 {
    let env = (-(t / p[3]).powi(d as i32 + 1)).exp();
    p[0] * (TAU * t / p[1] - p[2]).cos() * env + p[4] + p[5] * t
}

/// Gaussian envelope (`d = 1`) by default.
pub const DEFAULT_ENVELOPE_EXPONENT: u8 = 1;

pub fn fit_decaying_oscillation(t: &[f64], y: &[f64], d: u8) -> Result<FitResult> {
    check_trace(t, y)?;
    if d > 2 {
        return Err(Error::Invalid(format!("envelope exponent must be 0, 1 or 2, got {d}")));
    }
    if t.len() < 12 {
        return Err(Error::Invalid("oscillation fit needs at least 12 points".into()));
    }
    let n = t.len();
    let span = t[n - 1] - t[0];
    if !(span > 0.0) {
        return Err(Error::Invalid("delays must span a positive interval".into()));
    }
    let spacing = span / (n - 1) as f64;

    // joint scan over period and envelope time; amplitude, phase and the
    // sloped background then follow from a linear fit
    let mut best: Option<([f64; 6], f64)> = None;
    for t2 in [span / 8.0, span / 4.0, span / 2.0, span] {
        for period in period_candidates(4.0 * spacing, span / 1.5, 400) {
            let basis = DMatrix::from_fn(n, 4, |i, j| {
                let env = (-(t[i] / t2).powi(d as i32 + 1)).exp();
                let x = TAU * t[i] / period;
                match j {
                    0 => x.cos() * env,
                    1 => x.sin() * env,
                    2 => 1.0,
                    _ => t[i],
                }
            });
            if let Some((coef, rss)) = linear_fit(&basis, y) {
                if best.as_ref().is_none_or(|b| rss < b.1) {
                    let a = coef[0].hypot(coef[1]);
                    let phi = coef[1].atan2(coef[0]);
                    best = Some(([a, period, phi, t2, coef[2], coef[3]], rss));
                }
            }
        }
    }
    let (init, _) = best.ok_or_else(|| Error::DegenerateFit("no oscillation seed".into()))?;
    let bounds = Bounds {
        lower: vec![0.0, spacing, f64::NEG_INFINITY, spacing * 1e-3, f64::NEG_INFINITY, f64::NEG_INFINITY],
        upper: vec![f64::INFINITY; 6],
    };
    let mut fit = nlls_fit(
        |ti, p| decaying_oscillation_model(ti, p, d),
        t,
        y,
        &["a", "period", "phi", "T2", "c", "e"],
        &init,
        Some(&bounds),
    )?;
    // report the phase in (-pi, pi]
    let phi = &mut fit.params[2];
    *phi -= TAU * ((*phi + std::f64::consts::PI) / TAU).ceil() - TAU;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::synth;

    #[test]
    fn t1_noiseless_values() {
        for t1 in [3.3, 11.8] {
            let (t, y) = synth::t1_trace(1.0, t1, 0.0, 5.0 * t1, 60, 0.0, 0);
            let fit = fit_t1(&t, &y).unwrap();
            assert!((fit.p("T1") - t1).abs() < 1e-6 * t1, "{:?}", fit.params);
        }
    }

    #[test]
    fn t1_generic_round_trip() {
        let (t, y) = synth::t1_trace(-0.43, 7.1, 0.62, 30.0, 80, 0.0, 0);
        let fit = fit_t1(&t, &y).unwrap();
        for (got, want) in fit.params.iter().zip([-0.43, 7.1, 0.62]) {
            assert!((got - want).abs() <= 1e-6 * want.abs());
        }
    }

    #[test]
    fn t1_constant_is_unidentifiable() {
        let t: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y = vec![0.3; 30];
        match fit_t1(&t, &y) {
            Err(Error::DegenerateFit(_)) => {}
            Ok(f) => assert!(!f.converged, "{f:?}"),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn ramsey_noiseless_recovery() {
        let truth = [0.4, 4.0, 0.3, 7.6, 0.5, 0.002];
        let (t, y) = synth::ramsey_trace(truth, 1, 20.0, 401, 0.0, 0);
        let fit = fit_decaying_oscillation(&t, &y, 1).unwrap();
        for (got, want) in fit.params.iter().zip(truth) {
            assert!((got - want).abs() <= 1e-6 * want.abs(), "{:?}", fit.params);
        }
    }

    #[test]
    fn ramsey_origin_value() {
        let p = [0.4, 4.0, 0.0, 7.6, 0.5, 0.0];
        assert!((decaying_oscillation_model(0.0, &p, 1) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn gaussian_envelope_beats_exponential() {
        let (t, y) = synth::ramsey_trace([0.4, 4.0, 0.3, 7.6, 0.5, 0.0], 1, 20.0, 401, 0.01, 4);
        let g = fit_decaying_oscillation(&t, &y, 1).unwrap();
        let e = fit_decaying_oscillation(&t, &y, 0).unwrap();
        assert!(g.rss < e.rss);
    }

    #[test]
    fn rejects_bad_exponent() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(fit_decaying_oscillation(&t, &t, 3).is_err());
    }
}
