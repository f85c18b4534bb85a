//! Longitudinal coupling strength between the two ASQs.
//!
//! Three routes are provided:
//!
//! * [`j_analytic`]: lowest order in `E^sigma / E_JC` of the double-SQUID
//!   potential, through the complex phasor `E~ = E^I_1 e^{i phi1} + E^I_2 e^{i phi2} + E_JC`.
//! * [`j_numeric`]: minimize the circuit potential over the island phase for
//!   every spin configuration and combine the four branch energies.
//! * [`j_current_product`]: the mutual-inductance estimate `M I1 I2 / 2h`.
//!
//! The first two report J such that `E_uu` carries `+hJ/2`
//! ([`SignConvention::Eigenenergy`]). The current product is derived from an
//! interaction term `-hJ/2 sz1 sz2` and carries the opposite sign
//! ([`SignConvention::Interaction`]); use [`CouplingResult::in_convention`]
//! before comparing results from different methods.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimize::periodic_minimum;
use crate::model::{
    energy_from_inductance, inductance_from_energy, l_asq, skewed_sine, spin_current,
    AsqInductance, CurrentPhaseRelation, DeviceParams, FluxPoint, SpinConfig, PLANCK,
};

/// Grid points of the coarse phase scan.
pub const PHASE_GRID: usize = 720;
/// Bracket width at which golden-section refinement stops (rad).
pub const PHASE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMethod {
    Analytic,
    Numeric,
    CurrentProduct,
}

impl CouplingMethod {
    pub const ALL: [Self; 3] = [Self::Analytic, Self::Numeric, Self::CurrentProduct];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Numeric => "numeric",
            Self::CurrentProduct => "current_product",
        }
    }

    pub fn convention(self) -> SignConvention {
        match self {
            Self::Analytic | Self::Numeric => SignConvention::Eigenenergy,
            Self::CurrentProduct => SignConvention::Interaction,
        }
    }
}

impl fmt::Display for CouplingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(Self::Analytic),
            "numeric" => Ok(Self::Numeric),
            "current_product" | "current-product" => Ok(Self::CurrentProduct),
            other => Err(Error::Invalid(format!("unknown coupling method '{other}'"))),
        }
    }
}

/// Which sign J is reported in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `J = (E_uu - E_ud - E_du + E_dd) / 2h`.
    Eigenenergy,
    /// `H contains -hJ/2 sz1 sz2`; equals minus the eigenenergy value.
    Interaction,
}

impl SignConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Eigenenergy => "eigenenergy",
            Self::Interaction => "interaction",
        }
    }
}

/// Minimized circuit energy and minimizing island phase per spin branch,
/// indexed in [`SpinConfig::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEnergies {
    pub energy: [f64; 4],
    pub phase_min: [f64; 4],
}

impl BranchEnergies {
    pub fn energy(&self, c: SpinConfig) -> f64 {
        self.energy[c.index()]
    }

    pub fn phase_min(&self, c: SpinConfig) -> f64 {
        self.phase_min[c.index()]
    }

    /// Combination `(E_uu - E_ud - E_du + E_dd) / 2` in GHz.
    pub fn ising_combination(&self) -> f64 {
        0.5 * (self.energy(SpinConfig::UP_UP) - self.energy(SpinConfig::UP_DOWN)
            - self.energy(SpinConfig::DOWN_UP)
            + self.energy(SpinConfig::DOWN_DOWN))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostics {
    Branches(BranchEnergies),
    Phasor { magnitude: f64, argument: f64 },
    CurrentProduct {
        mutual_nh: f64,
        l_asq_nh: f64,
        i1_na: f64,
        i2_na: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult {
    /// Coupling strength in MHz, signed per `convention`.
    pub j: f64,
    pub method: CouplingMethod,
    pub convention: SignConvention,
    pub diagnostics: Option<Diagnostics>,
}

impl CouplingResult {
    pub fn in_convention(&self, target: SignConvention) -> f64 {
        if target == self.convention {
            self.j
        } else {
            -self.j
        }
    }

    pub fn eigenenergy_j(&self) -> f64 {
        self.in_convention(SignConvention::Eigenenergy)
    }
}

fn spin_shape(x: f64, skew: f64) -> f64 {
    if skew == 0.0 {
        x.sin()
    } else {
        skewed_sine(x, skew)
    }
}

/// Circuit potential (GHz) of one spin branch at island phase `phase`:
/// `H_1(phi1 - phase) + H_2(phi2 - phase) - E_JC cos(phase)` with
/// `H_i(x) = -E^I_i cos x + s_i E^sigma_i sin(x [+ S_i sin x])`.
pub fn total_potential(
    params: &DeviceParams,
    spins: SpinConfig,
    fluxes: FluxPoint,
    phase: f64,
) -> f64 {
    let (p1, p2) = fluxes.phases();
    let (s1, s2) = spins.signs();
    let x1 = p1 - phase;
    let x2 = p2 - phase;
    -params.ej_i_1 * x1.cos() + s1 * params.ej_s_1 * spin_shape(x1, params.skew_1)
        - params.ej_i_2 * x2.cos()
        + s2 * params.ej_s_2 * spin_shape(x2, params.skew_2)
        - params.ej_c * phase.cos()
}

pub fn branch_energies(params: &DeviceParams, fluxes: FluxPoint) -> BranchEnergies {
    let mut energy = [0.0; 4];
    let mut phase_min = [0.0; 4];
    for c in SpinConfig::ALL {
        let (phi, e) = periodic_minimum(
            |phase| total_potential(params, c, fluxes, phase),
            PHASE_GRID,
            PHASE_TOL,
        );
        energy[c.index()] = e;
        phase_min[c.index()] = phi;
    }
    BranchEnergies { energy, phase_min }
}

pub fn j_numeric(params: &DeviceParams, fluxes: FluxPoint) -> CouplingResult {
    let branches = branch_energies(params, fluxes);
    CouplingResult {
        j: branches.ising_combination() * 1e3,
        method: CouplingMethod::Numeric,
        convention: SignConvention::Eigenenergy,
        diagnostics: Some(Diagnostics::Branches(branches)),
    }
}

pub fn j_analytic(params: &DeviceParams, fluxes: FluxPoint) -> Result<CouplingResult> {
    let (p1, p2) = fluxes.phases();
    let e_tilde = Complex64::from_polar(params.ej_i_1, p1)
        + Complex64::from_polar(params.ej_i_2, p2)
        + params.ej_c;
    let magnitude = e_tilde.norm();
    if magnitude < 1e-12 {
        return Err(Error::Singularity(magnitude));
    }
    let arg = e_tilde.arg();
    let j = -2.0 * params.ej_s_1 * params.ej_s_2 / magnitude * (arg - p1).cos() * (arg - p2).cos();
    Ok(CouplingResult {
        j: j * 1e3,
        method: CouplingMethod::Analytic,
        convention: SignConvention::Eigenenergy,
        diagnostics: Some(Diagnostics::Phasor { magnitude, argument: arg }),
    })
}

/// `J = M I1 I2 / 2h` with `M = L_JC || L_ASQ` (`M = L_JC` when `L_ASQ`
/// diverges). Inductances in nH, currents in nA, result in MHz.
pub fn j_current_product(
    l_jc: f64,
    l_asq: AsqInductance,
    i1: f64,
    i2: f64,
) -> Result<CouplingResult> {
    if !(l_jc > 0.0) || !l_jc.is_finite() {
        return Err(Error::Domain(format!("L_JC must be > 0, got {l_jc}")));
    }
    // 1/M = 1/L_JC + 1/L_ASQ; a negative L_ASQ is admissible as long as the
    // parallel combination stays positive
    let inv_mutual = 1.0 / l_jc
        + match l_asq {
            AsqInductance::Finite(l) | AsqInductance::NonPositive(l) => 1.0 / l,
            AsqInductance::Divergent => 0.0,
        };
    if !(inv_mutual > 0.0) || !inv_mutual.is_finite() {
        return Err(Error::Domain(format!(
            "L_JC || L_ASQ is not positive (L_JC = {l_jc} nH, L_ASQ = {} nH)",
            l_asq.as_f64()
        )));
    }
    let mutual = 1.0 / inv_mutual;
    let j_hz = mutual * 1e-9 * (i1 * 1e-9) * (i2 * 1e-9) / (2.0 * PLANCK);
    Ok(CouplingResult {
        j: j_hz * 1e-6,
        method: CouplingMethod::CurrentProduct,
        convention: SignConvention::Interaction,
        diagnostics: Some(Diagnostics::CurrentProduct {
            mutual_nh: mutual,
            l_asq_nh: l_asq.as_f64(),
            i1_na: i1,
            i2_na: i2,
        }),
    })
}

/// Per-qubit CPRs implied by the spin-dependent energies, assuming the
/// phase drop across each ASQ equals its reduced flux.
pub fn model_cprs(params: &DeviceParams) -> Result<(CurrentPhaseRelation, CurrentPhaseRelation)> {
    Ok((
        CurrentPhaseRelation::from_spin_energy(params.ej_s_1, params.skew_1)?,
        CurrentPhaseRelation::from_spin_energy(params.ej_s_2, params.skew_2)?,
    ))
}

/// [`j_current_product`] with `L_JC`, `L_ASQ` taken from `params` and the
/// spin currents from the given CPRs.
pub fn j_current_product_from_cprs(
    params: &DeviceParams,
    fluxes: FluxPoint,
    cpr1: &CurrentPhaseRelation,
    cpr2: &CurrentPhaseRelation,
) -> Result<CouplingResult> {
    let l_jc = inductance_from_energy(params.ej_c)?;
    let i1 = spin_current(cpr1, fluxes.flux_1)?;
    let i2 = spin_current(cpr2, fluxes.flux_2)?;
    j_current_product(l_jc, l_asq(params, fluxes), i1, i2)
}

/// Current-product estimate with the sinusoidal (or skewed) CPRs of `params`.
pub fn j_current_product_model(params: &DeviceParams, fluxes: FluxPoint) -> Result<CouplingResult> {
    let (c1, c2) = model_cprs(params)?;
    j_current_product_from_cprs(params, fluxes, &c1, &c2)
}

/// Which ASQ a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    One,
    Two,
}

/// Qubit frequency (GHz) from the full circuit: `(E_down - E_up)/h` of the
/// chosen ASQ, averaged over the other ASQ's spin. Follows the same sign
/// as the sinusoidal CPR `2 E^sigma sin(phi)` in the stiff limit.
pub fn circuit_qubit_frequency(params: &DeviceParams, fluxes: FluxPoint, qubit: Qubit) -> f64 {
    let b = branch_energies(params, fluxes);
    let e = |c: SpinConfig| b.energy(c);
    match qubit {
        Qubit::One => {
            0.5 * (e(SpinConfig::DOWN_DOWN) + e(SpinConfig::DOWN_UP)
                - e(SpinConfig::UP_DOWN)
                - e(SpinConfig::UP_UP))
        }
        Qubit::Two => {
            0.5 * (e(SpinConfig::DOWN_DOWN) + e(SpinConfig::UP_DOWN)
                - e(SpinConfig::DOWN_UP)
                - e(SpinConfig::UP_UP))
        }
    }
}

/// Spin current (nA) from the circuit-level qubit frequency, differentiated
/// by a central difference in the qubit's own flux.
pub fn circuit_spin_current(params: &DeviceParams, fluxes: FluxPoint, qubit: Qubit) -> f64 {
    const STEP: f64 = 1e-4;
    let shifted = |d: f64| match qubit {
        Qubit::One => FluxPoint::new(fluxes.flux_1 + d, fluxes.flux_2),
        Qubit::Two => FluxPoint::new(fluxes.flux_1, fluxes.flux_2 + d),
    };
    let slope = (circuit_qubit_frequency(params, shifted(STEP), qubit)
        - circuit_qubit_frequency(params, shifted(-STEP), qubit))
        / (2.0 * STEP);
    crate::model::PhysicalConstants::SI.h / crate::model::FLUX_QUANTUM * slope * 1e18
}

pub fn evaluate(
    method: CouplingMethod,
    params: &DeviceParams,
    fluxes: FluxPoint,
) -> Result<CouplingResult> {
    match method {
        CouplingMethod::Analytic => j_analytic(params, fluxes),
        CouplingMethod::Numeric => Ok(j_numeric(params, fluxes)),
        CouplingMethod::CurrentProduct => j_current_product_model(params, fluxes),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub fluxes: FluxPoint,
    pub method: CouplingMethod,
    pub result: Result<CouplingResult>,
}

/// Evaluates every requested method at every `flux1` grid point. Rows come
/// out in grid order, methods in the order given. Per-point failures are
/// kept as row-level errors.
pub fn j_flux_sweep(
    params: &DeviceParams,
    flux1_grid: &[f64],
    flux2: f64,
    methods: &[CouplingMethod],
) -> Result<Vec<SweepRow>> {
    if flux1_grid.is_empty() {
        return Err(Error::Invalid("flux sweep needs a non-empty grid".into()));
    }
    if methods.is_empty() {
        return Err(Error::Invalid("flux sweep needs at least one method".into()));
    }
    params.validate()?;
    let rows = flux1_grid
        .par_iter()
        .map(|&f1| {
            let fluxes = FluxPoint::new(f1, flux2);
            methods
                .iter()
                .map(|&m| SweepRow {
                    fluxes,
                    method: m,
                    result: evaluate(m, params, fluxes),
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    Ok(rows.into_iter().flatten().collect())
}

/// How the spin currents are obtained along an `L_JC` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentMode {
    /// Frozen at the reference point for the whole sweep.
    Fixed,
    /// Recomputed at each `L_JC` from the circuit-level qubit frequencies.
    PerPoint,
}

impl FromStr for CurrentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed" => Ok(Self::Fixed),
            "per_point" | "per-point" => Ok(Self::PerPoint),
            other => Err(Error::Invalid(format!("unknown current mode '{other}'"))),
        }
    }
}

/// Optional fixed inputs for an `L_JC` sweep, overriding the values the
/// device model would give.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LjcOverrides {
    pub i1_na: Option<f64>,
    pub i2_na: Option<f64>,
    pub l_asq_nh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LjcRow {
    pub l_jc_nh: f64,
    pub ej_c_ghz: f64,
    pub numeric: CouplingResult,
    pub current_product: Result<CouplingResult>,
    /// `current_product` multiplied by the sweep's scale factor.
    pub scaled_mhz: Option<f64>,
    pub i1_na: f64,
    pub i2_na: f64,
    pub l_asq: AsqInductance,
}

pub fn j_vs_ljc(
    params: &DeviceParams,
    fluxes: FluxPoint,
    ljc_grid: &[f64],
    mode: CurrentMode,
    overrides: LjcOverrides,
    scale: f64,
) -> Result<Vec<LjcRow>> {
    if ljc_grid.is_empty() {
        return Err(Error::Invalid("L_JC sweep needs a non-empty grid".into()));
    }
    if let Some(bad) = ljc_grid.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::Domain(format!("L_JC grid values must be > 0, got {bad}")));
    }
    params.validate()?;
    let l_asq_value = match overrides.l_asq_nh {
        Some(l) if l > 0.0 => AsqInductance::Finite(l),
        Some(l) => return Err(Error::Domain(format!("L_ASQ override must be > 0, got {l}"))),
        None => l_asq(params, fluxes),
    };
    let (c1, c2) = model_cprs(params)?;
    let fixed_i1 = match overrides.i1_na {
        Some(i) => i,
        None => spin_current(&c1, fluxes.flux_1)?,
    };
    let fixed_i2 = match overrides.i2_na {
        Some(i) => i,
        None => spin_current(&c2, fluxes.flux_2)?,
    };

    ljc_grid
        .par_iter()
        .map(|&l_jc| {
            let ej_c = energy_from_inductance(l_jc)?;
            let p = DeviceParams { ej_c, ..*params };
            let numeric = j_numeric(&p, fluxes);
            let (i1, i2) = match mode {
                CurrentMode::Fixed => (fixed_i1, fixed_i2),
                CurrentMode::PerPoint => (
                    overrides.i1_na.unwrap_or_else(|| circuit_spin_current(&p, fluxes, Qubit::One)),
                    overrides.i2_na.unwrap_or_else(|| circuit_spin_current(&p, fluxes, Qubit::Two)),
                ),
            };
            let current_product = j_current_product(l_jc, l_asq_value, i1, i2);
            let scaled_mhz = current_product.as_ref().ok().map(|r| r.j * scale);
            Ok(LjcRow {
                l_jc_nh: l_jc,
                ej_c_ghz: ej_c,
                numeric,
                current_product,
                scaled_mhz,
                i1_na: i1,
                i2_na: i2,
                l_asq: l_asq_value,
            })
        })
        .collect()
}

/// Shortest angular distance between two phases.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
