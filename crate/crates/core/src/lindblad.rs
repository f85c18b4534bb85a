//! Driven-dissipative steady state of the two coupled spins and the
//! dispersive readout built on top of it.
//!
//! Basis order is `{dd, du, ud, uu}` (qubit 1 first) with
//! `sz |down> = +|down>`. Frequencies in the drive configuration are plain
//! MHz; the Hamiltonian is returned in angular MHz (rad/us) so that rates in
//! 1/us enter the Liouvillian without further conversion.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SpinConfig;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Tolerances applied by [`ValidityReport::passes`].
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative singular-value threshold below which the constrained system is rank deficient.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Drive amplitude `Omega_p1 / 2pi`, MHz.
    pub omega_p1: f64,
    pub omega_p2: f64,
    /// Detuning `f_1 - f_p1`, MHz.
    pub delta_1: f64,
    pub delta_2: f64,
    /// Longitudinal coupling, MHz.
    pub j: f64,
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_p1", self.omega_p1), ("omega_p2", self.omega_p2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("delta_1", self.delta_1), ("delta_2", self.delta_2), ("j", self.j)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        Self {
            omega_p1: self.omega_p2,
            omega_p2: self.omega_p1,
            delta_1: self.delta_2,
            delta_2: self.delta_1,
            j: self.j,
        }
    }
}

/// Lifetimes in microseconds. `f64::INFINITY` switches a channel off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayRates {
    pub t1_1: f64,
    pub t1_2: f64,
    pub t2_1: f64,
    pub t2_2: f64,
}

impl DecayRates {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t1_1", self.t1_1),
            ("t1_2", self.t1_2),
            ("t2_1", self.t2_1),
            ("t2_2", self.t2_2),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        Self { t1_1: self.t1_2, t1_2: self.t1_1, t2_1: self.t2_2, t2_2: self.t2_1 }
    }

    /// Every lifetime divided by `k` (rates multiplied by `k`).
    pub fn scaled(&self, k: f64) -> Self {
        Self { t1_1: self.t1_1 / k, t1_2: self.t1_2 / k, t2_1: self.t2_1 / k, t2_2: self.t2_2 / k }
    }
}

fn sigma_z() -> Matrix2<C> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

fn sigma_x() -> Matrix2<C> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

/// `|down><up|`: relaxes towards `down`.
fn sigma_minus() -> Matrix2<C> {
    Matrix2::new(ZERO, ONE, ZERO, ZERO)
}

fn kron2(a: &Matrix2<C>, b: &Matrix2<C>) -> Matrix4<C> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

fn on_qubit_1(op: &Matrix2<C>) -> Matrix4<C> {
    kron2(op, &Matrix2::identity())
}

fn on_qubit_2(op: &Matrix2<C>) -> Matrix4<C> {
    kron2(&Matrix2::identity(), op)
}

/// Rotating-frame Hamiltonian in rad/us:
/// `pi (D1 sz1 + D2 sz2 + W1 sx1 + W2 sx2) + pi J sz1 sz2`.
pub fn rotating_hamiltonian(cfg: &DriveConfig) -> Matrix4<C> {
    let sz1 = on_qubit_1(&sigma_z());
    let sz2 = on_qubit_2(&sigma_z());
    let sx1 = on_qubit_1(&sigma_x());
    let sx2 = on_qubit_2(&sigma_x());
    let zz = sz1 * sz2;
    (sz1 * C::from(cfg.delta_1)
        + sz2 * C::from(cfg.delta_2)
        + sx1 * C::from(cfg.omega_p1)
        + sx2 * C::from(cfg.omega_p2)
        + zz * C::from(cfg.j))
        * C::from(PI)
}

fn collapse_operators(rates: &DecayRates) -> Vec<Matrix4<C>> {
    let mut ops = Vec::with_capacity(4);
    let mut push = |rate: f64, op: Matrix4<C>| {
        if rate > 0.0 {
            ops.push(op * C::from(rate.sqrt()));
        }
    };
    push(1.0 / rates.t1_1, on_qubit_1(&sigma_minus()));
    push(0.5 / rates.t2_1, on_qubit_1(&sigma_z()));
    push(1.0 / rates.t1_2, on_qubit_2(&sigma_minus()));
    push(0.5 / rates.t2_2, on_qubit_2(&sigma_z()));
    ops
}

fn kron4(a: &Matrix4<C>, b: &Matrix4<C>) -> DMatrix<C> {
    DMatrix::from_fn(16, 16, |i, j| a[(i / 4, j / 4)] * b[(i % 4, j % 4)])
}

/// Liouvillian acting on column-stacked `vec(rho)`, using
/// `vec(A rho B) = (B^T kron A) vec(rho)`.
pub fn liouvillian(h: &Matrix4<C>, rates: &DecayRates) -> DMatrix<C> {
    let id = Matrix4::<C>::identity();
    let i = C::new(0.0, 1.0);
    let mut l = (kron4(&id, h) - kron4(&h.transpose(), &id)) * -i;
    for c in collapse_operators(rates) {
        let cdc = c.adjoint() * c;
        l += kron4(&c.conjugate(), &c);
        l -= kron4(&id, &cdc) * C::from(0.5);
        l -= kron4(&cdc.transpose(), &id) * C::from(0.5);
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub trace_error: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub residual: f64,
}

impl ValidityReport {
    pub fn passes(&self) -> bool {
        self.trace_error <= TRACE_TOL
            && self.hermiticity <= HERMITIAN_TOL
            && self.min_eigenvalue >= -PSD_TOL
            && self.residual <= RESIDUAL_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub rho: Matrix4<C>,
    /// Diagonal of `rho`, indexed by [`SpinConfig::index`].
    pub populations: [f64; 4],
    pub report: ValidityReport,
}

impl SteadyStateSolution {
    pub fn population(&self, c: SpinConfig) -> f64 {
        self.populations[c.index()]
    }
}

fn vec_rho(rho: &Matrix4<C>) -> DVector<C> {
    DVector::from_iterator(16, rho.iter().copied())
}

/// Steady state of `L[rho] = 0` with `tr rho = 1`.
pub fn steady_state(h: &Matrix4<C>, rates: &DecayRates) -> Result<SteadyStateSolution> {
    rates.validate()?;
    let l = liouvillian(h, rates);
    let mut a = l.clone();
    // the trace constraint replaces the (redundant) equation for rho_00
    for col in 0..16 {
        a[(0, col)] = if col % 5 == 0 { ONE } else { ZERO };
    }
    let sv = a.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > RANK_TOL * smax) {
        return Err(Error::Degenerate(smin / smax));
    }
    let mut b = DVector::<C>::zeros(16);
    b[0] = ONE;
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::Degenerate(0.0))?;
    let rho = Matrix4::from_iterator(x.iter().copied());
    let report = validity(&l, &rho);
    let populations = [0, 1, 2, 3].map(|k| rho[(k, k)].re);
    Ok(SteadyStateSolution { rho, populations, report })
}

fn validity(l: &DMatrix<C>, rho: &Matrix4<C>) -> ValidityReport {
    let trace_error = (rho.trace() - ONE).norm();
    let hermiticity = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sym = (rho + rho.adjoint()) * C::from(0.5);
    let min_eigenvalue = sym.symmetric_eigenvalues().min();
    let residual = (l * vec_rho(rho)).norm();
    ValidityReport { trace_error, hermiticity, min_eigenvalue, residual }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMode {
    LorentzianSum,
    /// Dispersive shifts much larger than the linewidth: only `P_dd` is seen.
    LargeShiftLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutModel {
    /// Bare resonator frequency, GHz.
    pub f_res: f64,
    /// Dispersive shift per spin configuration (MHz), indexed by [`SpinConfig::index`].
    pub chi: [f64; 4],
    /// Resonator linewidth, MHz.
    pub kappa: f64,
    pub mode: ReadoutMode,
}

impl ReadoutModel {
    pub fn large_shift() -> Self {
        Self { f_res: 0.0, chi: [0.0; 4], kappa: 1.0, mode: ReadoutMode::LargeShiftLimit }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be > 0, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Readout value at one probe frequency (GHz).
pub fn readout_value(populations: &[f64; 4], model: &ReadoutModel, f_probe: f64) -> f64 {
    match model.mode {
        ReadoutMode::LargeShiftLimit => populations[SpinConfig::DOWN_DOWN.index()],
        ReadoutMode::LorentzianSum => {
            let hw = 0.5 * model.kappa;
            populations
                .iter()
                .zip(&model.chi)
                .map(|(p, chi)| {
                    let d = (f_probe - model.f_res) * 1e3 - chi;
                    p * hw * hw / (d * d + hw * hw)
                })
                .sum()
        }
    }
}

pub fn readout_signal(
    sol: &SteadyStateSolution,
    model: &ReadoutModel,
    f_probe_grid: &[f64],
) -> Result<Vec<f64>> {
    model.validate()?;
    if f_probe_grid.is_empty() {
        return Err(Error::Invalid("probe grid is empty".into()));
    }
    Ok(f_probe_grid
        .iter()
        .map(|&f| readout_value(&sol.populations, model, f))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivenQubit {
    One,
    Two,
}

/// Which qubit is probed by the swept tone; the other one receives the pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectroscopySetup {
    pub probed: DrivenQubit,
    /// Transition frequency of the probed qubit, GHz.
    pub f_qubit: f64,
    /// Pump amplitude at 0 dB, MHz.
    pub omega_ref: f64,
    /// Readout probe frequency, GHz (unused in the large-shift limit).
    pub f_probe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectroscopyMap {
    pub power_db: Vec<f64>,
    pub fd_ghz: Vec<f64>,
    /// Row-major `[power][fd]`, median of each row subtracted; `None` where
    /// the steady state was degenerate.
    pub signal: Vec<Vec<Option<f64>>>,
    /// Values before median subtraction.
    pub raw: Vec<Vec<Option<f64>>>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Drive configuration for one map cell: the probed qubit's detuning follows
/// `f_d`, the other qubit's pump amplitude is `omega_ref * 10^(P/20)`.
pub fn map_cell_config(base: &DriveConfig, setup: &SpectroscopySetup, fd: f64, power_db: f64) -> DriveConfig {
    let mut cfg = *base;
    let detuning = (setup.f_qubit - fd) * 1e3;
    let pump = setup.omega_ref * 10f64.powf(power_db / 20.0);
    match setup.probed {
        DrivenQubit::One => {
            cfg.delta_1 = detuning;
            cfg.omega_p2 = pump;
        }
        DrivenQubit::Two => {
            cfg.delta_2 = detuning;
            cfg.omega_p1 = pump;
        }
    }
    cfg
}

pub fn spectroscopy_map(
    base: &DriveConfig,
    rates: &DecayRates,
    model: &ReadoutModel,
    setup: &SpectroscopySetup,
    fd_grid: &[f64],
    power_grid_db: &[f64],
) -> Result<SpectroscopyMap> {
    if fd_grid.is_empty() || power_grid_db.is_empty() {
        return Err(Error::Invalid("map grids must be non-empty".into()));
    }
    base.validate()?;
    rates.validate()?;
    model.validate()?;
    let cells: Vec<(f64, f64)> = power_grid_db
        .iter()
        .flat_map(|&p| fd_grid.iter().map(move |&f| (p, f)))
        .collect();
    let values: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(p, fd)| {
            let cfg = map_cell_config(base, setup, fd, p);
            steady_state(&rotating_hamiltonian(&cfg), rates)
                .ok()
                .map(|sol| readout_value(&sol.populations, model, setup.f_probe))
        })
        .collect();
    let raw: Vec<Vec<Option<f64>>> = values.chunks(fd_grid.len()).map(<[_]>::to_vec).collect();
    let signal = raw
        .iter()
        .map(|row| {
            let m = median(row.iter().flatten().copied().collect());
            row.iter().map(|v| v.zip(m).map(|(v, m)| v - m)).collect()
        })
        .collect();
    Ok(SpectroscopyMap {
        power_db: power_grid_db.to_vec(),
        fd_ghz: fd_grid.to_vec(),
        signal,
        raw,
    })
}
