//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any of them fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use asq_core::coupling::{j_analytic, j_current_product, j_current_product_model, j_numeric};
use asq_core::fitting::synth::{peak_pair, resonator_trace, rng};
use asq_core::fitting::{extract_j, fit_resonator, PeakKind, Trace};
use asq_core::lindblad::{
    rotating_hamiltonian, spectroscopy_map, steady_state, DecayRates, DriveConfig, DrivenQubit, ReadoutModel,
    SpectroscopySetup,
};
use asq_core::model::{
    energy_from_inductance, inductance_from_energy, l_asq, spin_current, AsqInductance, CurrentPhaseRelation,
    DeviceParams, FluxPoint, SpinConfig,
};
use asq_core::transmon::{ejc_from_ft, transmon_spectrum, ChargeBasisConfig};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn energies(ej_i: (f64, f64), ej_s: (f64, f64), ej_c: f64) -> DeviceParams {
    DeviceParams {
        ej_i_1: ej_i.0,
        ej_i_2: ej_i.1,
        ej_s_1: ej_s.0,
        ej_s_2: ej_s.1,
        ej_c,
        e_c: 0.2,
        skew_1: 0.0,
        skew_2: 0.0,
    }
}

fn low_coupling(ej_c: f64) -> DeviceParams {
    energies((0.2, 0.3), (0.82, 0.63), ej_c)
}

fn grid(n: usize) -> Vec<FluxPoint> {
    let x = |i: usize| i as f64 / (n - 1) as f64;
    (0..n).flat_map(|i| (0..n).map(move |k| FluxPoint::new(x(i), x(k)))).collect()
}

fn method_agreement() -> Outcome {
    let start = Instant::now();
    let p = low_coupling(10.0);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for f in grid(21) {
        let n = j_numeric(&p, f).j;
        let a = j_analytic(&p, f).expect("analytic J").j;
        worst = worst.max((a - n).abs());
        scale = scale.max(n.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 0.02 * scale && secs < 10.0,
        format!("max|analytic-numeric| = {worst:.3} MHz, 2% of max|numeric| = {:.3} MHz, {secs:.2} s", 0.02 * scale),
    )
}

fn stiff_limit() -> Outcome {
    let base = low_coupling(1.0);
    let l_min = [base.ej_i_1, base.ej_i_2, base.ej_s_1, base.ej_s_2]
        .iter()
        .map(|&e| inductance_from_energy(e).unwrap())
        .fold(f64::INFINITY, f64::min);
    let ej_c = energy_from_inductance(l_min / 50.0).unwrap();
    let p = DeviceParams { ej_c, ..base };
    let mut failures = 0;
    let mut worst = (0.0f64, FluxPoint::default());
    for f in grid(21) {
        let n = j_numeric(&p, f).j;
        let cp = j_current_product_model(&p, f).expect("current product").eigenenergy_j();
        let ratio = (cp - n).abs() / (0.05 * n.abs().max(1.0));
        if ratio > 1.0 {
            failures += 1;
        }
        if ratio > worst.0 {
            worst = (ratio, f);
        }
    }
    outcome(
        failures == 0,
        format!(
            "E_JC = {ej_c:.2} GHz, {failures}/441 points outside 5%; worst |diff| = {:.2} x bound at flux ({:.2}, {:.2})",
            worst.0, worst.1.flux_1, worst.1.flux_2
        ),
    )
}

fn deviation_regime() -> Outcome {
    let ej_c = energy_from_inductance(8.4).unwrap();
    let p = energies((2.30, 0.45), (0.82, 0.63), ej_c);
    let mut worst = (0.0f64, 0.0);
    for i in 0..=80 {
        let f = FluxPoint::new(0.8 + 0.005 * i as f64, 0.5);
        let n = j_numeric(&p, f).j;
        let Ok(cp) = j_current_product_model(&p, f) else { continue };
        let dev = (cp.eigenenergy_j() - n).abs() / n.abs().max(1.0);
        if dev > worst.0 {
            worst = (dev, f.flux_1);
        }
    }
    outcome(worst.0 > 0.2, format!("largest deviation {:.1}% at flux_1 = {:.3}", 100.0 * worst.0, worst.1))
}

fn l_asq_cross_check() -> Outcome {
    let a = l_asq(&energies((1.79, 0.53), (0.0, 0.0), 1.0), FluxPoint::new(1.1, 0.48));
    let b = l_asq(&energies((2.29, 0.45), (0.0, 0.0), 1.0), FluxPoint::new(-0.07, 0.51));
    let (AsqInductance::Finite(a), AsqInductance::Finite(b)) = (a, b) else {
        return outcome(false, format!("non-finite inductance: {a:?}, {b:?}"));
    };
    outcome(
        (a / 176.9 - 1.0).abs() <= 0.01 && (b / 102.0 - 1.0).abs() <= 0.02,
        format!("{a:.1} nH (176.9 +/- 1%), {b:.1} nH (102.0 +/- 2%)"),
    )
}

fn spin_current_cross_check() -> Outcome {
    let cpr = CurrentPhaseRelation::from_spin_energy(0.63, 0.0).unwrap();
    let i = spin_current(&cpr, 0.51).unwrap();
    outcome(
        (i / -2.52 - 1.0).abs() <= 0.01 && (i + 2.53).abs() < 0.005,
        format!("{i:.3} nA vs -2.52 nA"),
    )
}

fn coupling_magnitude() -> Outcome {
    let j = j_current_product(22.3, AsqInductance::Finite(176.9), 1.7, -5.6).unwrap().j;
    let scaled = 0.79 * j;
    let allowed = (3.2f64.powi(2) + (0.02 * j).powi(2)).sqrt();
    outcome(
        (j + 142.3).abs() < 0.05 && (scaled + 110.0).abs() <= allowed,
        format!("J = {j:.1} MHz, 0.79 J = {scaled:.1} MHz, allowed -110.0 +/- {allowed:.2} MHz"),
    )
}

fn uniform(t1: f64, t2: f64) -> DecayRates {
    DecayRates { t1_1: t1, t1_2: t1, t2_1: t2, t2_2: t2 }
}

fn lindblad_limits() -> Outcome {
    const J: f64 = 178.0;
    const OMEGA: f64 = 2.0;
    let start = Instant::now();
    let pops = |cfg: DriveConfig, rates: DecayRates| steady_state(&rotating_hamiltonian(&cfg), &rates).unwrap().populations;
    let dd = SpinConfig::DOWN_DOWN.index();
    let du = SpinConfig::DOWN_UP.index();
    let ud = SpinConfig::UP_DOWN.index();

    let single = pops(DriveConfig { omega_p2: OMEGA, delta_2: -J, j: J, ..Default::default() }, uniform(1000.0, 1.0));
    let single_err = (single[dd] - 0.5).abs().max((single[du] - 0.5).abs());

    let both = DriveConfig { omega_p1: OMEGA, omega_p2: OMEGA, delta_1: -J, delta_2: -J, j: J };
    let triple = pops(both, uniform(1000.0, 1.0));
    let triple_err = [dd, du, ud].iter().map(|&k| (triple[k] - 1.0 / 3.0).abs()).fold(0.0, f64::max);

    let ladder = pops(DriveConfig { delta_2: J, ..both }, uniform(20.0, 1.0));
    let quad_err = ladder.iter().map(|p| (p - 0.25).abs()).fold(0.0, f64::max);

    // peak heights from the map: probe on qubit 2 at its q1-down resonance,
    // pump on qubit 1 either off (-300 dB) or at the reference amplitude
    let f2 = 4.0;
    let setup = SpectroscopySetup { probed: DrivenQubit::Two, f_qubit: f2, omega_ref: OMEGA, f_probe: 0.0 };
    let base = DriveConfig { omega_p2: OMEGA, delta_1: -J, j: J, ..Default::default() };
    let map = spectroscopy_map(
        &base,
        &uniform(1000.0, 1.0),
        &ReadoutModel::large_shift(),
        &setup,
        &[f2 + J * 1e-3, f2 + 5.0],
        &[-300.0, 0.0],
    )
    .unwrap();
    let height = |row: usize| map.raw[row][1].unwrap() - map.raw[row][0].unwrap();
    let ratio = height(0) / height(1);
    let secs = start.elapsed().as_secs_f64();

    let pass = single_err <= 2e-2
        && triple_err <= 2e-2
        && quad_err <= 2e-2
        && (ratio / 2.94 - 1.0).abs() <= 0.1
        && secs < 5.0;
    outcome(
        pass,
        format!(
            "single {single_err:.1e}, triple {triple_err:.1e}, quadruple {quad_err:.1e} off; peak ratio {ratio:.3} vs 2.94; {secs:.2} s"
        ),
    )
}

fn steady_state_validity() -> Outcome {
    let mut r = rng(2024);
    let mut bad = Vec::new();
    for k in 0..200 {
        let cfg = DriveConfig {
            omega_p1: r.gen_range(0.0..20.0),
            omega_p2: r.gen_range(0.0..20.0),
            delta_1: r.gen_range(-400.0..400.0),
            delta_2: r.gen_range(-400.0..400.0),
            j: r.gen_range(-300.0..300.0),
        };
        let rates = DecayRates {
            t1_1: 10f64.powf(r.gen_range(-1.0..3.0)),
            t1_2: 10f64.powf(r.gen_range(-1.0..3.0)),
            t2_1: 10f64.powf(r.gen_range(-2.0..2.0)),
            t2_2: 10f64.powf(r.gen_range(-2.0..2.0)),
        };
        match steady_state(&rotating_hamiltonian(&cfg), &rates) {
            Ok(sol) if sol.report.passes() => {}
            other => bad.push((k, other.map(|s| s.report))),
        }
    }
    outcome(bad.is_empty(), format!("{} of 200 draws failed {:?}", bad.len(), bad.first()))
}

fn transmon_asymptotics() -> Outcome {
    let cfg = ChargeBasisConfig::default();
    let heavy = energies((0.0, 0.0), (0.0, 0.0), 20.0);
    let f01 = transmon_spectrum(&heavy, FluxPoint::default(), cfg).unwrap().f01(SpinConfig::DOWN_DOWN);
    let asymptote = (8.0 * 20.0 * 0.2f64).sqrt() - 0.2;
    let rel = (f01 / asymptote - 1.0).abs();

    let p = energies((2.30, 0.45), (0.82, 0.63), energy_from_inductance(8.4).unwrap());
    let f = FluxPoint::new(0.27, 0.5);
    let a = transmon_spectrum(&p, f, cfg).unwrap();
    let b = transmon_spectrum(&p, f, ChargeBasisConfig { n_max: 2 * cfg.n_max, ..cfg }).unwrap();
    let shift = SpinConfig::ALL
        .iter()
        .flat_map(|&c| a.levels(c).iter().zip(b.levels(c)).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);

    let closed = energies((0.0, 0.0), (0.0, 0.0), 1.0);
    let ejc = ejc_from_ft(4.5, &closed, cfg).unwrap();
    let back = transmon_spectrum(&DeviceParams { ej_c: ejc, ..closed }, FluxPoint::default(), cfg)
        .unwrap()
        .f01(SpinConfig::DOWN_DOWN);

    outcome(
        rel <= 0.01 && shift < 1e-6 && (back - 4.5).abs() <= 1e-4,
        format!(
            "f01 {f01:.4} vs {asymptote:.4} GHz ({:.2}%), cutoff doubling {shift:.1e} GHz, round trip {:.1e} GHz",
            100.0 * rel,
            (back - 4.5).abs()
        ),
    )
}

fn fit_recovery() -> Outcome {
    let mut resonator_worst = (0.0f64, 0.0f64);
    for seed in 0..20 {
        let (f, s21) = resonator_trace(4.2285, 1300.0, 35000.0, 0.1, 0.015, 801, 0.002, seed);
        let fit = fit_resonator(&f, &s21).unwrap();
        let q = (fit.p("Q_c") / 1300.0 - 1.0).abs().max((fit.p("Q_i") / 35000.0 - 1.0).abs());
        resonator_worst = (resonator_worst.0.max((fit.p("f_r0") - 4.2285).abs()), resonator_worst.1.max(q));
    }

    let mut within = 0;
    let mut doubles = 0;
    let mut singles = 0;
    let runs = 50;
    for j in [-178.0, -110.0] {
        for seed in 0..runs {
            let (x, u, d) = peak_pair(3.4, 0.01, j, 0.5, 0.05, 100 + seed);
            let dec = extract_j(&Trace::new(&x, &u), &Trace::new(&x, &d)).unwrap();
            if dec.kind == PeakKind::Double {
                doubles += 1;
                within += ((dec.j_mhz - j).abs() <= 3.0 * dec.j_sigma) as usize;
            }
            let same = extract_j(&Trace::new(&x, &u), &Trace::new(&x, &u)).unwrap();
            singles += (same.kind == PeakKind::Single) as usize;
        }
    }
    let total = 2 * runs as usize;
    let pass = resonator_worst.0 <= 100e-6
        && resonator_worst.1 <= 0.02
        && within == doubles
        && doubles * 100 >= 95 * total
        && singles == total;
    outcome(
        pass,
        format!(
            "resonator |df| <= {:.1} kHz, Q off <= {:.2}%; J within 3 sigma {within}/{doubles}, double {doubles}/{total}, single {singles}/{total}",
            resonator_worst.0 * 1e6,
            100.0 * resonator_worst.1
        ),
    )
}

const COMMANDS: &[&[&str]] = &[
    &["j-sweep", "--params", "p.json", "--flux1", "0:1:11", "--flux2", "0:0.5:3"],
    &["j-vs-ljc", "--params", "p.json", "--ljc", "2:40:7"],
    &["transmon-spectrum", "--params", "p.json", "--flux1", "0:1:5"],
    &["lindblad-map", "--fd", "3.7:4.3:41", "--power", "-20:0:3"],
    &["calibrate-ejc", "--params", "p.json", "--ft", "4.5"],
    &["fit", "--kind", "resonator", "--seed", "1"],
    &["fit", "--kind", "cpr", "--seed", "1"],
    &["fit", "--kind", "cpr-skewed", "--seed", "1"],
    &["fit", "--kind", "t1", "--seed", "1"],
    &["fit", "--kind", "ramsey", "--seed", "1"],
    &["fit", "--kind", "gaussian", "--seed", "1"],
    &["fit", "--kind", "peaks", "--seed", "1"],
];

fn primary_output(dir: &Path) -> Result<Vec<u8>, String> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".meta.json"))
        .collect();
    files.sort();
    match files.as_slice() {
        [one] => fs::read(one).map_err(|e| e.to_string()),
        other => Err(format!("expected one primary output, found {other:?}")),
    }
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("p.json"),
        r#"{"ej_i_1": 0.2, "ej_i_2": 0.3, "ej_s_1": 0.82, "ej_s_2": 0.63, "ej_c": 10.0, "e_c": 0.2}"#,
    )
    .unwrap();
    let mut failures = Vec::new();
    for (i, cmd) in COMMANDS.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = format!("run{i}_{run}");
            let status = Command::new(env!("CARGO_BIN_EXE_asq"))
                .current_dir(dir.path())
                .args(*cmd)
                .args(["--out", &out])
                .output()
                .expect("binary runs");
            if !status.status.success() {
                failures.push(format!("{}: {}", cmd[0], String::from_utf8_lossy(&status.stderr).trim()));
                break;
            }
            outputs.push(primary_output(&dir.path().join(&out)));
        }
        match outputs.as_slice() {
            [Ok(a), Ok(b)] if a == b => {}
            [_, _] => failures.push(format!("{cmd:?} differs between runs")),
            _ => {}
        }
    }
    outcome(failures.is_empty(), format!("{} commands, failures: {failures:?}", COMMANDS.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("method agreement", method_agreement),
        ("stiff-limit current product", stiff_limit),
        ("deviation regime", deviation_regime),
        ("L_ASQ cross-check", l_asq_cross_check),
        ("spin-current cross-check", spin_current_cross_check),
        ("coupling-magnitude cross-check", coupling_magnitude),
        ("steady-state population limits", lindblad_limits),
        ("steady-state validity", steady_state_validity),
        ("transmon asymptotics", transmon_asymptotics),
        ("fit recovery", fit_recovery),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.pass as usize;
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
