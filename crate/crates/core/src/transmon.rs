//! Transmon spectrum of the coupling island, one diagonalization per spin branch.
//!
//! The Hamiltonian `4 E_c n^2 + V(phi)` is assembled in the charge basis
//! `n in [-n_max, n_max]`; each `e^{ik phi}` term of the potential becomes the
//! k-th off-diagonal band.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeviceParams, FluxPoint, SpinConfig};

/// Highest harmonic kept when expanding a skewed spin term.
pub const SKEW_HARMONICS: usize = 8;
const SKEW_QUADRATURE: usize = 201;
/// Largest tolerated change of any reported level when the cutoff grows by 1.5x.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeBasisConfig {
    pub n_max: usize,
    pub n_levels: usize,
}

impl Default for ChargeBasisConfig {
    fn default() -> Self {
        Self { n_max: 40, n_levels: 4 }
    }
}

impl ChargeBasisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 10 {
            return Err(Error::Invalid(format!("n_max must be >= 10, got {}", self.n_max)));
        }
        if self.n_levels < 2 || self.n_levels > 2 * self.n_max + 1 {
            return Err(Error::Invalid(format!(
                "n_levels must lie in [2, {}], got {}",
                2 * self.n_max + 1,
                self.n_levels
            )));
        }
        Ok(())
    }
}

/// Level frequencies per spin branch, each referenced to that branch's ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpectrum {
    /// Indexed by [`SpinConfig::index`].
    pub branches: [Vec<f64>; 4],
}

impl TransmonSpectrum {
    pub fn levels(&self, c: SpinConfig) -> &[f64] {
        &self.branches[c.index()]
    }

    pub fn f01(&self, c: SpinConfig) -> f64 {
        self.branches[c.index()][1]
    }

    pub fn anharmonicity(&self, c: SpinConfig) -> Option<f64> {
        let l = &self.branches[c.index()];
        (l.len() > 2).then(|| (l[2] - l[1]) - l[1])
    }
}

/// Fourier coefficients `c_k`, `k in [-K, K]`, of the branch potential
/// `V(phi) = sum_k c_k e^{ik phi}`. Index `k + K`.
pub fn potential_harmonics(params: &DeviceParams, spins: SpinConfig, fluxes: FluxPoint) -> Vec<Complex64> {
    let kmax = SKEW_HARMONICS;
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * kmax + 1];
    let (p1, p2) = fluxes.phases();
    let (s1, s2) = spins.signs();

    c[kmax + 1] += -params.ej_c / 2.0;
    c[kmax - 1] += -params.ej_c / 2.0;

    // g(phi_i - phi) = sum_k g_k e^{ik phi_i} e^{-ik phi}
    for (phase, ej_i, ej_s, skew, s) in [
        (p1, params.ej_i_1, params.ej_s_1, params.skew_1, s1),
        (p2, params.ej_i_2, params.ej_s_2, params.skew_2, s2),
    ] {
        let g = junction_harmonics(ej_i, s * ej_s, skew);
        for (idx, gk) in g.iter().enumerate() {
            let k = idx as isize - kmax as isize;
            let rot = Complex64::from_polar(1.0, k as f64 * phase);
            c[(kmax as isize - k) as usize] += gk * rot;
        }
    }
    c
}

/// Harmonics of `-E^I cos x + a * shape(x)` with `shape = sin(x + S sin x)`.
fn junction_harmonics(ej_i: f64, a: f64, skew: f64) -> Vec<Complex64> {
    let kmax = SKEW_HARMONICS;
    let mut g = vec![Complex64::new(0.0, 0.0); 2 * kmax + 1];
    g[kmax + 1] += -ej_i / 2.0;
    g[kmax - 1] += -ej_i / 2.0;
    if a == 0.0 {
        return g;
    }
    if skew == 0.0 {
        g[kmax + 1] += Complex64::new(0.0, -a / 2.0);
        g[kmax - 1] += Complex64::new(0.0, a / 2.0);
        return g;
    }
    let n = SKEW_QUADRATURE;
    let samples: Vec<f64> = (0..n)
        .map(|j| {
            let x = TAU * j as f64 / n as f64;
            (x + skew * x.sin()).sin()
        })
        .collect();
    for (idx, gk) in g.iter_mut().enumerate() {
        let k = idx as f64 - kmax as f64;
        let sum: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(j, &v)| v * Complex64::from_polar(1.0, -k * TAU * j as f64 / n as f64))
            .sum();
        *gk += a * sum / n as f64;
    }
    g
}

/// Charge-basis Hamiltonian (GHz) of one branch. Row/column `i` is charge `i - n_max`.
pub fn charge_hamiltonian(
    params: &DeviceParams,
    spins: SpinConfig,
    fluxes: FluxPoint,
    n_max: usize,
) -> DMatrix<Complex64> {
    let dim = 2 * n_max + 1;
    let c = potential_harmonics(params, spins, fluxes);
    let kmax = SKEW_HARMONICS as isize;
    DMatrix::from_fn(dim, dim, |m, n| {
        let k = m as isize - n as isize;
        let mut v = if k.abs() <= kmax {
            // <m| e^{ik phi} |n> = delta_{m, n+k}; upper triangle mirrors the lower
            if k >= 0 {
                c[(k + kmax) as usize]
            } else {
                c[(-k + kmax) as usize].conj()
            }
        } else {
            Complex64::new(0.0, 0.0)
        };
        if m == n {
            let q = m as f64 - n_max as f64;
            v += 4.0 * params.e_c * q * q;
        }
        v
    })
}

/// Lowest `n_levels` eigenvalues (absolute, GHz) of one branch.
fn branch_levels(
    params: &DeviceParams,
    spins: SpinConfig,
    fluxes: FluxPoint,
    n_max: usize,
    n_levels: usize,
) -> Vec<f64> {
    let h = charge_hamiltonian(params, spins, fluxes, n_max);
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e.truncate(n_levels);
    e
}

fn relative(levels: &[f64]) -> Vec<f64> {
    levels.iter().map(|e| e - levels[0]).collect()
}

pub fn transmon_spectrum(
    params: &DeviceParams,
    fluxes: FluxPoint,
    cfg: ChargeBasisConfig,
) -> Result<TransmonSpectrum> {
    cfg.validate()?;
    params.validate()?;
    if params.skew_1.abs() > 0.5 || params.skew_2.abs() > 0.5 {
        return Err(Error::Domain(
            "skewness beyond 0.5 is not resolved by the harmonic expansion".into(),
        ));
    }
    let bigger = cfg.n_max + cfg.n_max.div_ceil(2);
    let mut branches: [Vec<f64>; 4] = Default::default();
    for c in SpinConfig::ALL {
        let base = relative(&branch_levels(params, c, fluxes, cfg.n_max, cfg.n_levels));
        let check = relative(&branch_levels(params, c, fluxes, bigger, cfg.n_levels));
        let shift = base
            .iter()
            .zip(&check)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !(shift < CONVERGENCE_TOL) {
            return Err(Error::Convergence { shift, suggested: 2 * cfg.n_max });
        }
        branches[c.index()] = base;
    }
    Ok(TransmonSpectrum { branches })
}

/// Spectra along a list of flux points, evaluated in parallel, in input order.
pub fn transmon_sweep(
    params: &DeviceParams,
    points: &[FluxPoint],
    cfg: ChargeBasisConfig,
) -> Vec<Result<TransmonSpectrum>> {
    points
        .par_iter()
        .map(|&f| transmon_spectrum(params, f, cfg))
        .collect()
}

/// Search interval for [`ejc_from_ft`], GHz.
pub const EJC_BRACKET: (f64, f64) = (0.1, 200.0);
const MONOTONE_PROBES: usize = 24;

/// Coupling-junction energy giving a transmon frequency `ft_target` (GHz)
/// with the ASQs as described by `params` (normally both closed, i.e. all
/// ASQ energies zero). `params.ej_c` is ignored.
pub fn ejc_from_ft(ft_target: f64, params: &DeviceParams, cfg: ChargeBasisConfig) -> Result<f64> {
    let f01 = |ejc: f64| -> Result<f64> {
        let p = DeviceParams { ej_c: ejc, ..*params };
        Ok(transmon_spectrum(&p, FluxPoint::default(), cfg)?.f01(SpinConfig::DOWN_DOWN))
    };
    let (lo, hi) = EJC_BRACKET;
    // geometric probes: f01 grows like sqrt(E_J)
    let ratio = (hi / lo).powf(1.0 / (MONOTONE_PROBES - 1) as f64);
    let mut probes = Vec::with_capacity(MONOTONE_PROBES);
    for i in 0..MONOTONE_PROBES {
        let x = if i + 1 == MONOTONE_PROBES { hi } else { lo * ratio.powi(i as i32) };
        probes.push((x, f01(x)?));
    }
    if probes.windows(2).any(|w| w[1].1 <= w[0].1) {
        return Err(Error::Domain("f01(E_JC) is not monotone on the search interval".into()));
    }
    let (f_lo, f_hi) = (probes[0].1, probes[MONOTONE_PROBES - 1].1);
    if !(f_lo..=f_hi).contains(&ft_target) {
        return Err(Error::Range { target: ft_target, lo: f_lo, hi: f_hi });
    }
    let idx = probes.partition_point(|p| p.1 < ft_target).max(1);
    let (mut a, mut b) = (probes[idx - 1].0, probes[idx].0);
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let f = f01(mid)?;
        if (f - ft_target).abs() < 1e-7 || b - a < 1e-12 {
            break;
        }
        if f < ft_target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(mid)
}
