//! Spin g-factor from the flux dispersion, and single-shot readout quality.

use serde::{Deserialize, Serialize};

use super::nlls::{nlls_fit, Bounds};
use super::peaks::{gaussian, median};
use crate::error::{Error, Result};
use crate::model::{BOHR_MAGNETON, PLANCK};

/// `g = h (f_max + f_min) / (2 mu_B b)` and `df = (f_max - f_min) / 2`;
/// frequencies in GHz, field in tesla, `df` in GHz.
pub fn g_factor_and_dispersion(f_max: f64, f_min: f64, b: f64) -> Result<(f64, f64)> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("field magnitude must be > 0, got {b}")));
    }
    if !(f_max >= f_min && f_min >= 0.0 && f_max.is_finite()) {
        return Err(Error::Domain(format!("need f_max >= f_min >= 0, got {f_max}, {f_min}")));
    }
    let g = PLANCK * (f_max + f_min) * 1e9 / (2.0 * BOHR_MAGNETON * b);
    Ok((g, (f_max - f_min) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutQuality {
    pub snr: f64,
    pub fidelity: f64,
    pub threshold: f64,
    pub mu_down: f64,
    pub mu_up: f64,
    pub sigma: f64,
    /// False when the histograms could not be separated into two clusters.
    pub reliable: bool,
}

struct Histogram {
    centres: Vec<f64>,
    counts: Vec<f64>,
    width: f64,
}

fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0.0; bins];
    for &s in samples {
        let i = (((s - lo) / width) as usize).min(bins - 1);
        counts[i] += 1.0;
    }
    let centres = (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    Histogram { centres, counts, width }
}

fn robust_sigma(samples: &[f64]) -> f64 {
    let m = median(samples);
    let dev: Vec<f64> = samples.iter().map(|v| (v - m).abs()).collect();
    1.4826 * median(&dev)
}

/// Shared-width two-component fit to one histogram; `None` unless both
/// components carry weight and are resolved.
fn two_cluster_fit(h: &Histogram, n: usize, mu_d: f64, mu_u: f64, sigma: f64) -> Option<(f64, f64, f64)> {
    let scale = n as f64 * h.width;
    let init = [0.9 * scale, 0.1 * scale, mu_d, mu_u, sigma];
    let bounds = Bounds {
        lower: vec![0.0, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, h.width * 1e-3],
        upper: vec![f64::INFINITY; 5],
    };
    let model = |x: f64, p: &[f64]| p[0] * gaussian(x, p[2], p[4]) + p[1] * gaussian(x, p[3], p[4]);
    let fit = nlls_fit(model, &h.centres, &h.counts, &["n_d", "n_u", "mu_d", "mu_u", "sigma"], &init, Some(&bounds)).ok()?;
    let (nd, nu) = (fit.p("n_d"), fit.p("n_u"));
    let minor = nd.min(nu) / (nd + nu);
    let sep = (fit.p("mu_u") - fit.p("mu_d")).abs();
    let resolved = fit.converged
        && minor >= 0.02
        && sep > 2.0 * fit.p("sigma")
        && fit.s("mu_u") < 0.25 * sep
        && fit.s("mu_d") < 0.25 * sep;
    resolved.then(|| (fit.p("mu_d"), fit.p("mu_u"), fit.p("sigma")))
}

fn single_cluster_fit(h: &Histogram, n: usize, mu: f64, sigma: f64) -> (f64, f64) {
    let init = [n as f64 * h.width, mu, sigma];
    let bounds = Bounds {
        lower: vec![0.0, f64::NEG_INFINITY, h.width * 1e-3],
        upper: vec![f64::INFINITY; 3],
    };
    nlls_fit(|x, p| p[0] * gaussian(x, p[1], p[2]), &h.centres, &h.counts, &["n", "mu", "sigma"], &init, Some(&bounds))
        .map(|f| (f.p("mu"), f.p("sigma")))
        .unwrap_or((mu, sigma))
}

/// `1 - P(up|down)/2 - P(down|up)/2`, classifying as "up" above `threshold`
/// when the up cluster lies higher.
pub fn fidelity_at(down: &[f64], up: &[f64], threshold: f64, up_is_high: bool) -> f64 {
    let is_up = |x: f64| if up_is_high { x > threshold } else { x <= threshold };
    let p_ud = down.iter().filter(|&&x| is_up(x)).count() as f64 / down.len() as f64;
    let p_du = up.iter().filter(|&&x| !is_up(x)).count() as f64 / up.len() as f64;
    1.0 - 0.5 * p_ud - 0.5 * p_du
}

/// Threshold maximizing the fidelity over the sorted union of samples;
/// ties go to the lower threshold.
fn best_threshold(down: &[f64], up: &[f64], up_is_high: bool) -> (f64, f64) {
    let mut all: Vec<(f64, bool)> = down
        .iter()
        .map(|&x| (x, false))
        .chain(up.iter().map(|&x| (x, true)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nd, nu) = (down.len() as f64, up.len() as f64);
    // samples <= threshold so far
    let (mut below_d, mut below_u) = (0.0, 0.0);
    let mut best = (f64::NEG_INFINITY, all[0].0);
    let mut i = 0;
    while i < all.len() {
        let t = all[i].0;
        while i < all.len() && all[i].0 == t {
            if all[i].1 {
                below_u += 1.0;
            } else {
                below_d += 1.0;
            }
            i += 1;
        }
        let f = if up_is_high {
            1.0 - 0.5 * (nd - below_d) / nd - 0.5 * below_u / nu
        } else {
            1.0 - 0.5 * below_d / nd - 0.5 * (nu - below_u) / nu
        };
        if f > best.0 {
            best = (f, t);
        }
    }
    (best.1, best.0)
}

pub fn snr_and_fidelity(hist_down: &[f64], hist_up: &[f64], threshold: Option<f64>) -> Result<ReadoutQuality> {
    if hist_down.is_empty() || hist_up.is_empty() {
        return Err(Error::Invalid("both sample sets must be non-empty".into()));
    }
    if hist_down.iter().chain(hist_up).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite readout sample".into()));
    }
    let (md, mu) = (median(hist_down), median(hist_up));
    let up_is_high = mu >= md;
    let lo = hist_down.iter().chain(hist_up).cloned().fold(f64::INFINITY, f64::min);
    let hi = hist_down.iter().chain(hist_up).cloned().fold(f64::NEG_INFINITY, f64::max);
    let bins = ((hist_down.len() as f64).sqrt() as usize).clamp(20, 200);
    let sigma0 = robust_sigma(hist_down).max((hi - lo) / bins as f64);
    let h_down = histogram(hist_down, lo, hi, bins);

    let (mu_down, mu_up, sigma, reliable) = match two_cluster_fit(&h_down, hist_down.len(), md, mu, sigma0) {
        Some((a, b, s)) => (a, b, s, true),
        None => {
            let h_up = histogram(hist_up, lo, hi, bins);
            let (a, s) = single_cluster_fit(&h_down, hist_down.len(), md, sigma0);
            let (b, _) = single_cluster_fit(&h_up, hist_up.len(), mu, robust_sigma(hist_up).max(h_up.width));
            (a, b, s, (b - a).abs() > 2.0 * s)
        }
    };
    let snr = (mu_up - mu_down).abs() / (2.0 * sigma);
    let (threshold, fidelity) = match threshold {
        Some(t) => (t, fidelity_at(hist_down, hist_up, t, up_is_high)),
        None => best_threshold(hist_down, hist_up, up_is_high),
    };
    Ok(ReadoutQuality { snr, fidelity, threshold, mu_down, mu_up, sigma, reliable })
}
