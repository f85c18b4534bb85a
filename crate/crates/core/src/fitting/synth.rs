//! Seeded synthetic traces for tests, the acceptance suite and the CLI's
//! `fit` command when no measured trace is supplied.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::coherence::{decaying_oscillation_model, t1_model};
use super::cpr::cpr_model;
use super::peaks::gaussian;
use super::resonator::resonator_s21;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn noise(n: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; n];
    }
    let d = Normal::new(0.0, sigma).expect("noise sigma must be finite and >= 0");
    (0..n).map(|_| d.sample(rng)).collect()
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Undriven and driven spectroscopy traces on a common 1 MHz grid.
///
/// The undriven trace has one peak of unit height at `f_a` (GHz) with width
/// `sigma` (GHz); the driven trace moves `second_fraction` of its area to
/// `f_b = f_a - 2 J`. Returns `(x, undriven, driven)`.
pub fn peak_pair(
    f_a: f64,
    sigma: f64,
    j_mhz: f64,
    second_fraction: f64,
    noise_sigma: f64,
    seed: u64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let f_b = f_a - 2.0 * j_mhz * 1e-3;
    let lo = f_a.min(f_b) - 0.2;
    let hi = f_a.max(f_b) + 0.2;
    let n = ((hi - lo) / 1e-3).round() as usize + 1;
    let x = linspace(lo, hi, n);
    let area = sigma * std::f64::consts::TAU.sqrt();
    let mut r = rng(seed);
    let nu = noise(n, noise_sigma, &mut r);
    let nd = noise(n, noise_sigma, &mut r);
    let undriven = x.iter().zip(&nu).map(|(&f, e)| area * gaussian(f, f_a, sigma) + e).collect();
    let driven = x
        .iter()
        .zip(&nd)
        .map(|(&f, e)| {
            area * ((1.0 - second_fraction) * gaussian(f, f_a, sigma) + second_fraction * gaussian(f, f_b, sigma)) + e
        })
        .collect();
    (x, undriven, driven)
}

/// Resonator transmission around `f_r0` with independent Gaussian noise on
/// each quadrature.
pub fn resonator_trace(
    f_r0: f64,
    q_c: f64,
    q_i: f64,
    alpha: f64,
    half_span: f64,
    n: usize,
    noise_sigma: f64,
    seed: u64,
) -> (Vec<f64>, Vec<Complex64>) {
    let f = linspace(f_r0 - half_span, f_r0 + half_span, n);
    let mut r = rng(seed);
    let re = noise(n, noise_sigma, &mut r);
    let im = noise(n, noise_sigma, &mut r);
    let s = f
        .iter()
        .enumerate()
        .map(|(i, &fi)| resonator_s21(fi, &[f_r0, q_c, q_i, alpha]) + Complex64::new(re[i], im[i]))
        .collect();
    (f, s)
}

pub fn t1_trace(a: f64, t1: f64, c: f64, t_max: f64, n: usize, noise_sigma: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let t = linspace(0.0, t_max, n);
    let e = noise(n, noise_sigma, &mut rng(seed));
    let y = t.iter().zip(&e).map(|(&ti, ei)| t1_model(ti, &[a, t1, c]) + ei).collect();
    (t, y)
}

/// `p = [a, period, phi, t2, c, e]`.
pub fn ramsey_trace(p: [f64; 6], d: u8, t_max: f64, n: usize, noise_sigma: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let t = linspace(0.0, t_max, n);
    let e = noise(n, noise_sigma, &mut rng(seed));
    let y = t
        .iter()
        .zip(&e)
        .map(|(&ti, ei)| decaying_oscillation_model(ti, &p, d) + ei)
        .collect();
    (t, y)
}

/// `p = [E, C, c0, period, S]`.
pub fn cpr_trace(p: [f64; 5], c_lo: f64, c_hi: f64, n: usize, noise_sigma: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let c = linspace(c_lo, c_hi, n);
    let e = noise(n, noise_sigma, &mut rng(seed));
    let y = c.iter().zip(&e).map(|(&ci, ei)| cpr_model(ci, &p) + ei).collect();
    (c, y)
}

/// Readout samples for the two initializations: `(down, up)` with
/// `flip` the fraction of each set landing in the other cluster.
pub fn readout_histograms(
    mu_down: f64,
    mu_up: f64,
    sigma: f64,
    n: usize,
    flip: f64,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let d = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
    let n_flip = (flip * n as f64).round() as usize;
    let mut draw = |centre: f64, other: f64| -> Vec<f64> {
        (0..n)
            .map(|i| if i < n_flip { other } else { centre } + d.sample(&mut r))
            .collect()
    };
    let down = draw(mu_down, mu_up);
    let up = draw(mu_up, mu_down);
    (down, up)
}
