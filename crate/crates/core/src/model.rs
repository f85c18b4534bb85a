//! Physical constants, device parameters, flux/phase conversion,
//! current-phase relations and inductance arithmetic.
//!
//! Units throughout: energies are stored as frequencies `E/h` in GHz, fluxes
//! in units of the flux quantum, currents in nA and inductances in nH.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Planck constant (J s), exact SI value.
pub const PLANCK: f64 = 6.62607015e-34;
/// Elementary charge (C), exact SI value.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Superconducting flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);
/// Bohr magneton (J/T).
pub const BOHR_MAGNETON: f64 = 9.2740100783e-24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub h: f64,
    pub phi0: f64,
    pub mu_b: f64,
}

impl PhysicalConstants {
    pub const SI: Self = Self {
        h: PLANCK,
        phi0: FLUX_QUANTUM,
        mu_b: BOHR_MAGNETON,
    };

    /// `L[nH] * (E_J/h)[GHz]` for a single junction, `(phi0/2pi)^2 / h`.
    /// About 163.46.
    pub fn inductance_energy_product(&self) -> f64 {
        let reduced = self.phi0 / TAU;
        // H * Hz -> nH * GHz is a factor 1e9 * 1e-9
        reduced * reduced / self.h
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// Circuit energies of the double-loop SQUID and its transmon island.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    /// Spin-independent Josephson energy of ASQ1, GHz.
    pub ej_i_1: f64,
    pub ej_i_2: f64,
    /// Spin-dependent Josephson energy of ASQ1, GHz.
    pub ej_s_1: f64,
    pub ej_s_2: f64,
    /// Coupling-junction Josephson energy, GHz.
    pub ej_c: f64,
    /// Transmon charging energy, GHz.
    #[serde(default)]
    pub e_c: f64,
    #[serde(default)]
    pub skew_1: f64,
    #[serde(default)]
    pub skew_2: f64,
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let energies = [
            ("ej_i_1", self.ej_i_1),
            ("ej_i_2", self.ej_i_2),
            ("ej_s_1", self.ej_s_1),
            ("ej_s_2", self.ej_s_2),
            ("ej_c", self.ej_c),
            ("e_c", self.e_c),
        ];
        for (name, v) in energies {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, s) in [("skew_1", self.skew_1), ("skew_2", self.skew_2)] {
            if !s.is_finite() || s.abs() >= 1.0 {
                return Err(Error::Domain(format!("{name} must satisfy |S| < 1, got {s}")));
            }
        }
        Ok(())
    }

    /// The same device with the roles of ASQ1 and ASQ2 exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            ej_i_1: self.ej_i_2,
            ej_i_2: self.ej_i_1,
            ej_s_1: self.ej_s_2,
            ej_s_2: self.ej_s_1,
            skew_1: self.skew_2,
            skew_2: self.skew_1,
            ..*self
        }
    }
}

/// External fluxes through the two loops, in units of the flux quantum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FluxPoint {
    pub flux_1: f64,
    pub flux_2: f64,
}

impl FluxPoint {
    pub fn new(flux_1: f64, flux_2: f64) -> Self {
        Self { flux_1, flux_2 }
    }

    pub fn phases(&self) -> (f64, f64) {
        (reduced_phase(self.flux_1), reduced_phase(self.flux_2))
    }
}

/// Eigenvalue of `sigma^z = |down><down| - |up><up|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Down => 1.0,
            Spin::Up => -1.0,
        }
    }

    fn label(self) -> char {
        match self {
            Spin::Down => 'd',
            Spin::Up => 'u',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinConfig {
    pub s1: Spin,
    pub s2: Spin,
}

impl SpinConfig {
    pub const DOWN_DOWN: Self = Self::new(Spin::Down, Spin::Down);
    pub const DOWN_UP: Self = Self::new(Spin::Down, Spin::Up);
    pub const UP_DOWN: Self = Self::new(Spin::Up, Spin::Down);
    pub const UP_UP: Self = Self::new(Spin::Up, Spin::Up);

    /// Product-basis order used everywhere: dd, du, ud, uu.
    pub const ALL: [Self; 4] = [Self::DOWN_DOWN, Self::DOWN_UP, Self::UP_DOWN, Self::UP_UP];

    pub const fn new(s1: Spin, s2: Spin) -> Self {
        Self { s1, s2 }
    }

    /// Position in [`SpinConfig::ALL`].
    pub fn index(self) -> usize {
        let a = matches!(self.s1, Spin::Up) as usize;
        let b = matches!(self.s2, Spin::Up) as usize;
        2 * a + b
    }

    pub fn signs(self) -> (f64, f64) {
        (self.s1.sign(), self.s2.sign())
    }

    /// Two-letter label such as `"du"` (ASQ1 down, ASQ2 up).
    pub fn label(self) -> String {
        [self.s1.label(), self.s2.label()].iter().collect()
    }

    pub fn swapped(self) -> Self {
        Self::new(self.s2, self.s1)
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Qubit frequency as a function of flux.
#[derive(Debug, Clone, PartialEq)]
pub enum CurrentPhaseRelation {
    /// `amplitude * sin(2 pi x) + offset`
    Sinusoidal { amplitude: f64, offset: f64 },
    /// `amplitude * sin(2 pi x + skew * sin(2 pi x)) + offset`
    Skewed { amplitude: f64, skew: f64, offset: f64 },
    Tabulated(TabulatedCpr),
}

/// Measured `(flux, frequency)` samples with a not-a-knot spline through
/// them, periodically extended when they cover at least one flux quantum.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCpr {
    spline: CubicSpline,
}

impl TabulatedCpr {
    pub fn new(flux: Vec<f64>, freq_ghz: Vec<f64>) -> Result<Self> {
        Ok(Self {
            spline: CubicSpline::not_a_knot(flux, freq_ghz)?,
        })
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        self.spline.knots()
    }

    pub fn is_periodic(&self) -> bool {
        self.spline.hi() - self.spline.lo() >= 1.0
    }

    fn reduce(&self, flux: f64) -> Result<f64> {
        let (lo, hi) = (self.spline.lo(), self.spline.hi());
        if !flux.is_finite() {
            return Err(Error::OutOfRange { flux, lo, hi });
        }
        if (lo..=hi).contains(&flux) {
            return Ok(flux);
        }
        if self.is_periodic() {
            return Ok(lo + (flux - lo).rem_euclid(1.0));
        }
        Err(Error::OutOfRange { flux, lo, hi })
    }
}

impl CurrentPhaseRelation {
    pub fn sinusoidal(amplitude: f64, offset: f64) -> Self {
        Self::Sinusoidal { amplitude, offset }
    }

    pub fn skewed(amplitude: f64, skew: f64, offset: f64) -> Result<Self> {
        if skew.abs() >= 1.0 {
            return Err(Error::Domain(format!("skewness must satisfy |S| < 1, got {skew}")));
        }
        Ok(Self::Skewed { amplitude, skew, offset })
    }

    /// CPR of an ASQ with spin-dependent energy `ej_s` (GHz): amplitude `2 ej_s`.
    pub fn from_spin_energy(ej_s: f64, skew: f64) -> Result<Self> {
        if skew == 0.0 {
            Ok(Self::sinusoidal(2.0 * ej_s, 0.0))
        } else {
            Self::skewed(2.0 * ej_s, skew, 0.0)
        }
    }

    /// Frequency in GHz at `flux` (units of the flux quantum).
    pub fn eval(&self, flux: f64) -> Result<f64> {
        match self {
            Self::Sinusoidal { amplitude, offset } => Ok(amplitude * (TAU * flux).sin() + offset),
            Self::Skewed { amplitude, skew, offset } => {
                Ok(amplitude * skewed_sine(TAU * flux, *skew) + offset)
            }
            Self::Tabulated(t) => Ok(t.spline.value(t.reduce(flux)?)),
        }
    }

    /// Slope in GHz per flux quantum.
    pub fn derivative(&self, flux: f64) -> Result<f64> {
        match self {
            Self::Sinusoidal { amplitude, .. } => Ok(amplitude * TAU * (TAU * flux).cos()),
            Self::Skewed { amplitude, skew, .. } => {
                Ok(amplitude * TAU * skewed_sine_derivative(TAU * flux, *skew))
            }
            Self::Tabulated(t) => Ok(t.spline.derivative(t.reduce(flux)?)),
        }
    }
}

/// `sin(x + s sin x)`
pub fn skewed_sine(x: f64, s: f64) -> f64 {
    (x + s * x.sin()).sin()
}

/// d/dx of [`skewed_sine`].
pub fn skewed_sine_derivative(x: f64, s: f64) -> f64 {
    (x + s * x.sin()).cos() * (1.0 + s * x.cos())
}

/// `2 pi * flux`.
pub fn reduced_phase(flux: f64) -> f64 {
    TAU * flux
}

pub fn cpr_eval(cpr: &CurrentPhaseRelation, flux: f64) -> Result<f64> {
    cpr.eval(flux)
}

pub fn cpr_derivative(cpr: &CurrentPhaseRelation, flux: f64) -> Result<f64> {
    cpr.derivative(flux)
}

/// Spin-dependent current difference `I = h df/dPhi` in nA.
pub fn spin_current(cpr: &CurrentPhaseRelation, flux: f64) -> Result<f64> {
    let slope = cpr.derivative(flux)?; // GHz per flux quantum
    let c = PhysicalConstants::SI;
    // (h / phi0) [C] * slope [1e9 / s] -> A; A -> nA
    Ok(c.h / c.phi0 * slope * 1e9 * 1e9)
}

/// Josephson inductance (nH) of a junction with energy `ej` (GHz).
pub fn inductance_from_energy(ej: f64) -> Result<f64> {
    if !(ej > 0.0) || !ej.is_finite() {
        return Err(Error::Domain(format!("Josephson energy must be > 0, got {ej}")));
    }
    Ok(PhysicalConstants::SI.inductance_energy_product() / ej)
}

/// Josephson energy (GHz) of a junction with inductance `l` (nH).
pub fn energy_from_inductance(l: f64) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Domain(format!("inductance must be > 0, got {l}")));
    }
    Ok(PhysicalConstants::SI.inductance_energy_product() / l)
}

/// Spin-independent inductance of the two ASQ branches in parallel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsqInductance {
    Finite(f64),
    /// The reciprocal sum vanishes: no spin-independent current path.
    Divergent,
    /// The reciprocal sum is negative; the value is reported but lies outside
    /// the regime of the mutual-inductance formula.
    NonPositive(f64),
}

impl AsqInductance {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(l) => Some(l),
            _ => None,
        }
    }

    /// `+inf` for divergent, the signed value otherwise.
    pub fn as_f64(self) -> f64 {
        match self {
            Self::Finite(l) | Self::NonPositive(l) => l,
            Self::Divergent => f64::INFINITY,
        }
    }
}

/// Reciprocal sums closer to zero than this (1/nH) count as divergent.
const RECIPROCAL_ZERO: f64 = 1e-14;

pub fn l_asq(params: &DeviceParams, fluxes: FluxPoint) -> AsqInductance {
    let (p1, p2) = fluxes.phases();
    let k = PhysicalConstants::SI.inductance_energy_product();
    // 1/L^I_i = E^I_i / k; a closed junction contributes nothing
    let inv = (params.ej_i_1 * p1.cos() + params.ej_i_2 * p2.cos()) / k;
    if inv.abs() <= RECIPROCAL_ZERO {
        AsqInductance::Divergent
    } else if inv > 0.0 {
        AsqInductance::Finite(1.0 / inv)
    } else {
        AsqInductance::NonPositive(1.0 / inv)
    }
}
