//! The `asq` command-line front end.
//!
//! Every command writes one primary artifact (CSV or JSON) into `--out` plus
//! a `<artifact>.meta.json` sidecar with the resolved configuration, column
//! units and the toolkit version. Nothing time- or host-dependent is
//! recorded, so identical configurations give byte-identical files.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coupling::{self, CouplingMethod, CurrentMode, LjcOverrides, SignConvention};
use crate::fitting::{self, synth, Trace};
use crate::io::{self, IoError, Table};
use crate::lindblad::{self, DecayRates, DriveConfig, DrivenQubit, ReadoutModel, SpectroscopySetup};
use crate::model::{DeviceParams, FluxPoint, SpinConfig};
use crate::transmon::{self, ChargeBasisConfig};
use crate::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "asq", version, about = "Coupled Andreev spin qubit toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON file whose keys mirror the long flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Coupling strength over a grid of loop fluxes.
    JSweep,
    /// Coupling strength against the coupling-junction inductance.
    JVsLjc,
    /// Transmon transition frequencies of the four spin branches.
    TransmonSpectrum,
    /// Steady-state two-tone spectroscopy map.
    LindbladMap,
    /// Fit a measured or synthetic trace.
    Fit,
    /// Coupling-junction energy reproducing a transmon frequency.
    CalibrateEjc,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::JSweep => "j-sweep",
            Self::JVsLjc => "j-vs-ljc",
            Self::TransmonSpectrum => "transmon-spectrum",
            Self::LindbladMap => "lindblad-map",
            Self::Fit => "fit",
            Self::CalibrateEjc => "calibrate-ejc",
        }
    }
}

/// All options, shared between the flags and the config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// Device-parameter JSON file.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flux grid of loop 1 in flux quanta, `start:stop:n` or one value.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub flux1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub flux2: Option<String>,
    /// Coupling-junction inductance grid, nH.
    #[arg(long, global = true)]
    pub ljc: Option<String>,
    /// Comma-separated coupling methods: analytic, numeric, current_product.
    #[arg(long, global = true)]
    pub methods: Option<String>,
    /// Pump power grid, dB relative to `--omega-ref`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub power: Option<String>,
    /// Drive-frequency grid of the probed qubit, GHz.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub fd: Option<String>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for synthetic test data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Factor applied to the current-product estimate.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub scale: Option<f64>,
    /// Spin-current mode of j-vs-ljc: fixed or per_point.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Fixed spin current of ASQ1, nA.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub i1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub i2: Option<f64>,
    /// Fixed spin-independent inductance, nH.
    #[arg(long, global = true)]
    pub l_asq: Option<f64>,
    /// Charge cutoff `n_max` of the transmon basis.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Transmon levels kept per branch.
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Target transmon frequency, GHz.
    #[arg(long, global = true)]
    pub ft: Option<f64>,
    /// Longitudinal coupling for lindblad-map, MHz.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub j: Option<f64>,
    /// Probe amplitude on the probed qubit, MHz.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Pump amplitude at 0 dB, MHz.
    #[arg(long, global = true)]
    pub omega_ref: Option<f64>,
    /// Pump detuning `f_1 - f_pump`, MHz (default: -J).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub pump_detuning: Option<f64>,
    /// Transition frequency of the probed qubit, GHz.
    #[arg(long, global = true)]
    pub f_qubit: Option<f64>,
    /// Relaxation time of both qubits, us.
    #[arg(long, global = true)]
    pub t1: Option<f64>,
    /// Dephasing time of both qubits, us.
    #[arg(long, global = true)]
    pub t2: Option<f64>,
    /// Fit kind: resonator, cpr, cpr-skewed, t1, ramsey, gaussian, peaks.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Trace to fit (CSV); synthesized from `--seed` when absent.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Driven trace for `--kind peaks`.
    #[arg(long, global = true)]
    pub data2: Option<PathBuf>,
    /// Envelope exponent of the Ramsey fit.
    #[arg(long, global = true)]
    pub envelope: Option<u8>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr, $($f:ident),*) => {
        Options { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Options {
    /// Field-wise `self` over `fallback`.
    pub fn or(self, fallback: Options) -> Options {
        merge_fields!(
            self, fallback, params, out, flux1, flux2, ljc, methods, power, fd, threads, seed, scale, mode, i1,
            i2, l_asq, n_max, levels, ft, j, omega, omega_ref, pump_detuning, f_qubit, t1, t2, kind, data, data2,
            envelope
        )
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(Error),
    Io(IoError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numeric(_) => EXIT_NUMERIC,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Numeric(e) => write!(f, "numerical error: {e}"),
            Self::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Numeric(e)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Reads the config file (if any) and merges it under the flags.
pub fn resolve(cli: &Cli) -> CliResult<Options> {
    let file = match &cli.config {
        None => Options::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            let mut o: Options =
                serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            // relative paths in the file are relative to the file
            let base = p.parent().unwrap_or(Path::new(""));
            for path in [&mut o.params, &mut o.data, &mut o.data2, &mut o.out].into_iter().flatten() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            o
        }
    };
    Ok(cli.options.clone().or(file))
}

/// Parses the command line, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("asq: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command and returns the paths it wrote.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let opts = resolve(cli)?;
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| IoError::File { path: out.display().to_string(), source: e })?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(config_err("--threads must be >= 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| config_err(e.to_string()))?;
    let artifact = pool.install(|| dispatch(cli.command, &opts))?;

    let primary = out.join(&artifact.file);
    std::fs::write(&primary, &artifact.body).map_err(|e| IoError::File { path: primary.display().to_string(), source: e })?;
    let mut sidecar = primary.clone().into_os_string();
    sidecar.push(".meta.json");
    let sidecar = PathBuf::from(sidecar);
    let meta = json!({
        "tool": "asq",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "config": opts,
        "params": artifact.params,
        "columns": artifact.units.iter().map(|(c, u)| json!({"name": c, "unit": u})).collect::<Vec<_>>(),
        "notes": artifact.notes,
    });
    io::write_json(&sidecar, &meta)?;
    Ok(vec![primary, sidecar])
}

struct Artifact {
    file: String,
    body: String,
    units: Vec<(String, String)>,
    params: Option<DeviceParams>,
    notes: Vec<String>,
}

fn dispatch(cmd: Command, o: &Options) -> CliResult<Artifact> {
    match cmd {
        Command::JSweep => j_sweep(o),
        Command::JVsLjc => j_vs_ljc(o),
        Command::TransmonSpectrum => transmon_spectrum(o),
        Command::LindbladMap => lindblad_map(o),
        Command::Fit => fit(o),
        Command::CalibrateEjc => calibrate_ejc(o),
    }
}

fn params(o: &Options) -> CliResult<DeviceParams> {
    let p = o.params.as_ref().ok_or_else(|| config_err("--params is required for this command"))?;
    if !p.exists() {
        return Err(config_err(format!("parameter file {} does not exist", p.display())));
    }
    io::load_params(p).map_err(|e| match e {
        IoError::Format { .. } => config_err(e.to_string()),
        other => CliError::Io(other),
    })
}

fn grid(s: Option<&String>, default: &str, flag: &str) -> CliResult<Vec<f64>> {
    io::parse_grid(s.map(String::as_str).unwrap_or(default)).map_err(|e| config_err(format!("--{flag}: {e}")))
}

fn positive(v: f64, flag: &str) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("--{flag} must be > 0, got {v}")))
    }
}

fn units<const N: usize>(cols: [(&str, &str); N]) -> Vec<(String, String)> {
    cols.iter().map(|(c, u)| (c.to_string(), u.to_string())).collect()
}

fn method_column(m: CouplingMethod) -> String {
    format!("j_{}_mhz", m.as_str())
}

fn convention_note(m: CouplingMethod) -> String {
    let c = m.convention();
    let meaning = match c {
        SignConvention::Eigenenergy => "E_dd + E_uu - E_du - E_ud = hJ",
        SignConvention::Interaction => "H = -(hJ/2) sz sz; negate to compare with the eigenenergy convention",
    };
    format!("{}: {} convention ({meaning})", method_column(m), c.as_str())
}

fn j_sweep(o: &Options) -> CliResult<Artifact> {
    let p = params(o)?;
    let f1 = grid(o.flux1.as_ref(), "0:1:101", "flux1")?;
    let f2 = grid(o.flux2.as_ref(), "0.5", "flux2")?;
    let methods: Vec<CouplingMethod> = o
        .methods
        .as_deref()
        .unwrap_or("analytic,numeric,current_product")
        .split(',')
        .map(|s| s.parse::<CouplingMethod>().map_err(|e| config_err(format!("--methods: {e}"))))
        .collect::<CliResult<_>>()?;
    if methods.is_empty() {
        return Err(config_err("--methods is empty"));
    }
    let points: Vec<FluxPoint> = f2.iter().flat_map(|&b| f1.iter().map(move |&a| FluxPoint::new(a, b))).collect();
    let values: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&fp| {
            methods
                .iter()
                .map(|&m| coupling::evaluate(m, &p, fp).map(|r| r.j).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    let mut cols = vec!["flux_1".to_string(), "flux_2".to_string()];
    cols.extend(methods.iter().map(|&m| method_column(m)));
    let mut t = Table::new(cols.clone());
    for (fp, v) in points.iter().zip(values) {
        let mut row = vec![fp.flux_1, fp.flux_2];
        row.extend(v);
        t.push(row);
    }
    let mut u = units([("flux_1", "Phi0"), ("flux_2", "Phi0")]);
    u.extend(methods.iter().map(|&m| (method_column(m), "MHz".to_string())));
    let mut notes: Vec<String> = methods.iter().map(|&m| convention_note(m)).collect();
    notes.push("NaN marks points where the method is undefined".into());
    Ok(Artifact { file: "j_sweep.csv".into(), body: t.to_csv_string(), units: u, params: Some(p), notes })
}

fn single(v: &[f64], flag: &str) -> CliResult<f64> {
    match v {
        [x] => Ok(*x),
        _ => Err(config_err(format!("--{flag} must be a single value for this command"))),
    }
}

fn j_vs_ljc(o: &Options) -> CliResult<Artifact> {
    let p = params(o)?;
    let ljc = grid(o.ljc.as_ref(), "1:60:60", "ljc")?;
    let fp = FluxPoint::new(
        single(&grid(o.flux1.as_ref(), "0.25", "flux1")?, "flux1")?,
        single(&grid(o.flux2.as_ref(), "0.5", "flux2")?, "flux2")?,
    );
    let mode: CurrentMode = o
        .mode
        .as_deref()
        .unwrap_or("per_point")
        .parse()
        .map_err(|e: Error| config_err(format!("--mode: {e}")))?;
    let scale = o.scale.unwrap_or(1.0);
    if !scale.is_finite() {
        return Err(config_err("--scale must be finite"));
    }
    let overrides = LjcOverrides { i1_na: o.i1, i2_na: o.i2, l_asq_nh: o.l_asq };
    let rows = coupling::j_vs_ljc(&p, fp, &ljc, mode, overrides, scale)?;
    let mut t = Table::new([
        "l_jc_nh",
        "ej_c_ghz",
        "i1_na",
        "i2_na",
        "l_asq_nh",
        "j_numeric_mhz",
        "j_current_product_mhz",
        "j_scaled_mhz",
    ]);
    for r in rows {
        let cp = r.current_product.as_ref().map(|c| c.j).unwrap_or(f64::NAN);
        t.push(vec![
            r.l_jc_nh,
            r.ej_c_ghz,
            r.i1_na,
            r.i2_na,
            r.l_asq.as_f64(),
            r.numeric.j,
            cp,
            r.scaled_mhz.unwrap_or(f64::NAN),
        ]);
    }
    let u = units([
        ("l_jc_nh", "nH"),
        ("ej_c_ghz", "GHz"),
        ("i1_na", "nA"),
        ("i2_na", "nA"),
        ("l_asq_nh", "nH"),
        ("j_numeric_mhz", "MHz"),
        ("j_current_product_mhz", "MHz"),
        ("j_scaled_mhz", "MHz"),
    ]);
    let notes = vec![
        convention_note(CouplingMethod::Numeric),
        convention_note(CouplingMethod::CurrentProduct),
        format!("j_scaled_mhz = {scale} * j_current_product_mhz"),
    ];
    Ok(Artifact { file: "j_vs_ljc.csv".into(), body: t.to_csv_string(), units: u, params: Some(p), notes })
}

fn charge_basis(o: &Options) -> CliResult<ChargeBasisConfig> {
    let d = ChargeBasisConfig::default();
    let cfg = ChargeBasisConfig { n_max: o.n_max.unwrap_or(d.n_max), n_levels: o.levels.unwrap_or(d.n_levels) };
    cfg.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(cfg)
}

fn transmon_spectrum(o: &Options) -> CliResult<Artifact> {
    let p = params(o)?;
    let cfg = charge_basis(o)?;
    let f1 = grid(o.flux1.as_ref(), "0:1:51", "flux1")?;
    let f2 = grid(o.flux2.as_ref(), "0.5", "flux2")?;
    let points: Vec<FluxPoint> = f2.iter().flat_map(|&b| f1.iter().map(move |&a| FluxPoint::new(a, b))).collect();
    let spectra = transmon::transmon_sweep(&p, &points, cfg);
    let labels = SpinConfig::ALL.map(|c| c.label());
    let mut cols = vec!["flux_1".to_string(), "flux_2".to_string()];
    cols.extend(labels.iter().map(|l| format!("f01_{l}_ghz")));
    cols.extend(labels.iter().map(|l| format!("alpha_{l}_ghz")));
    let mut t = Table::new(cols.clone());
    for (fp, s) in points.iter().zip(spectra) {
        let s = s?;
        let mut row = vec![fp.flux_1, fp.flux_2];
        row.extend(SpinConfig::ALL.map(|c| s.f01(c)));
        row.extend(SpinConfig::ALL.map(|c| s.anharmonicity(c).unwrap_or(f64::NAN)));
        t.push(row);
    }
    let u = cols
        .iter()
        .map(|c| (c.clone(), if c.starts_with("flux") { "Phi0" } else { "GHz" }.to_string()))
        .collect();
    let notes = vec![format!("charge basis n_max = {}, {} levels per branch", cfg.n_max, cfg.n_levels)];
    Ok(Artifact { file: "transmon_spectrum.csv".into(), body: t.to_csv_string(), units: u, params: Some(p), notes })
}

fn lindblad_map(o: &Options) -> CliResult<Artifact> {
    let j = o.j.unwrap_or(178.0);
    let omega = positive(o.omega.unwrap_or(2.0), "omega")?;
    let omega_ref = positive(o.omega_ref.unwrap_or(2.0), "omega-ref")?;
    let t1 = positive(o.t1.unwrap_or(10.0), "t1")?;
    let t2 = positive(o.t2.unwrap_or(0.1), "t2")?;
    let f_qubit = o.f_qubit.unwrap_or(4.0);
    let span = (3.0 * j.abs() * 1e-3).max(0.05);
    let default_fd = format!("{}:{}:241", f_qubit - span, f_qubit + span);
    let fd = grid(o.fd.as_ref(), &default_fd, "fd")?;
    let power = grid(o.power.as_ref(), "-40:20:13", "power")?;
    let base = DriveConfig {
        omega_p1: 0.0,
        omega_p2: omega,
        delta_1: o.pump_detuning.unwrap_or(-j),
        delta_2: 0.0,
        j,
    };
    let rates = DecayRates { t1_1: t1, t1_2: t1, t2_1: t2, t2_2: t2 };
    let setup = SpectroscopySetup { probed: DrivenQubit::Two, f_qubit, omega_ref, f_probe: 0.0 };
    let map = lindblad::spectroscopy_map(&base, &rates, &ReadoutModel::large_shift(), &setup, &fd, &power)?;
    let mut t = Table::new(["power_db", "fd_ghz", "signal", "p_dd"]);
    for (i, &pw) in map.power_db.iter().enumerate() {
        for (k, &f) in map.fd_ghz.iter().enumerate() {
            t.push(vec![pw, f, map.signal[i][k].unwrap_or(f64::NAN), map.raw[i][k].unwrap_or(f64::NAN)]);
        }
    }
    let u = units([("power_db", "dB"), ("fd_ghz", "GHz"), ("signal", "1"), ("p_dd", "1")]);
    let notes = vec![
        "qubit 2 is probed at fd; qubit 1 is pumped with omega_ref * 10^(power/20) MHz".into(),
        "readout in the large-shift limit: p_dd is the down-down population; signal is p_dd minus its row median".into(),
        format!("J = {j} MHz, probe {omega} MHz, T1 = {t1} us, T2 = {t2} us"),
    ];
    Ok(Artifact { file: "lindblad_map.csv".into(), body: t.to_csv_string(), units: u, params: None, notes })
}

fn xy(o: &Options, synth: impl FnOnce(u64) -> (Vec<f64>, Vec<f64>)) -> CliResult<(Vec<f64>, Vec<f64>)> {
    match &o.data {
        Some(p) => Ok(io::load_xy(p)?),
        None => Ok(synth(o.seed.unwrap_or(0))),
    }
}

fn fit(o: &Options) -> CliResult<Artifact> {
    let kind = o.kind.as_deref().ok_or_else(|| config_err("--kind is required for fit"))?;
    let seed = o.seed.unwrap_or(0);
    let source = match &o.data {
        Some(p) => format!("data from {}", p.display()),
        None => format!("synthetic data, seed {seed}"),
    };
    let (value, u): (serde_json::Value, Vec<(String, String)>) = match kind {
        "resonator" => {
            let (f, s) = match &o.data {
                Some(p) => io::load_complex(p)?,
                None => synth::resonator_trace(4.2285, 1300.0, 35000.0, 0.1, 0.015, 801, 0.002, seed),
            };
            let r = fitting::fit_resonator(&f, &s)?;
            (json!(r), units([("f_r0", "GHz"), ("Q_c", "1"), ("Q_i", "1"), ("alpha", "1")]))
        }
        "cpr" | "cpr-skewed" => {
            let (c, y) = xy(o, |s| synth::cpr_trace([0.82, 5.1, 0.4, 3.16, -0.39], -1.0, 4.0, 241, 0.01, s))?;
            let r = fitting::fit_cpr(&c, &y, kind == "cpr-skewed")?;
            (
                json!(r),
                units([
                    ("E_sigma", "GHz"),
                    ("C", "GHz"),
                    ("control_zero", "control"),
                    ("control_period", "control"),
                    ("S", "1"),
                ]),
            )
        }
        "t1" => {
            let (t, y) = xy(o, |s| synth::t1_trace(0.8, 3.3, 0.1, 20.0, 101, 0.01, s))?;
            let r = fitting::fit_t1(&t, &y)?;
            (json!(r), units([("a", "1"), ("T1", "time"), ("c", "1")]))
        }
        "ramsey" => {
            let d = o.envelope.unwrap_or(fitting::coherence::DEFAULT_ENVELOPE_EXPONENT);
            let (t, y) = xy(o, |s| synth::ramsey_trace([0.4, 4.0, 0.3, 7.6, 0.5, 0.002], 1, 20.0, 401, 0.01, s))?;
            let r = fitting::fit_decaying_oscillation(&t, &y, d)?;
            (
                json!(r),
                units([("a", "1"), ("period", "time"), ("phi", "rad"), ("T2", "time"), ("c", "1"), ("e", "1/time")]),
            )
        }
        "gaussian" => {
            let (x, y) = xy(o, |s| {
                let (x, u, _) = synth::peak_pair(3.4, 0.005, -178.0, 0.5, 0.02, s);
                (x, u)
            })?;
            let r = fitting::fit_single_gaussian(&Trace::new(&x, &y))?;
            (json!(r), units([("A", "signal*GHz"), ("f_a", "GHz"), ("sigma", "GHz"), ("B", "1/GHz"), ("C", "1")]))
        }
        "peaks" => {
            let (x, und, drv) = match (&o.data, &o.data2) {
                (Some(a), Some(b)) => {
                    let (x, u) = io::load_xy(a)?;
                    let (x2, d) = io::load_xy(b)?;
                    if x != x2 {
                        return Err(config_err("--data and --data2 must share the frequency axis"));
                    }
                    (x, u, d)
                }
                (None, None) => synth::peak_pair(3.4, 0.005, -178.0, 0.5, 0.02, seed),
                _ => return Err(config_err("--kind peaks needs both --data and --data2, or neither")),
            };
            let r = fitting::extract_j(&Trace::new(&x, &und), &Trace::new(&x, &drv))?;
            (
                json!(r),
                units([("j_mhz", "MHz"), ("j_sigma", "MHz"), ("f_a", "GHz"), ("f_b", "GHz"), ("sigma", "GHz")]),
            )
        }
        other => return Err(config_err(format!("unknown fit kind '{other}'"))),
    };
    let body = io::to_json_string(&value);
    Ok(Artifact {
        file: format!("fit_{}.json", kind.replace('-', "_")),
        body,
        units: u,
        params: None,
        notes: vec![source],
    })
}

fn calibrate_ejc(o: &Options) -> CliResult<Artifact> {
    let p = params(o)?;
    let ft = o.ft.ok_or_else(|| config_err("--ft is required for calibrate-ejc"))?;
    let cfg = charge_basis(o)?;
    // both ASQ loops closed
    let closed = DeviceParams { ej_i_1: 0.0, ej_i_2: 0.0, ej_s_1: 0.0, ej_s_2: 0.0, ..p };
    let ejc = transmon::ejc_from_ft(ft, &closed, cfg)?;
    let l_jc = crate::model::inductance_from_energy(ejc)?;
    let body = io::to_json_string(&json!({ "ft_ghz": ft, "ej_c_ghz": ejc, "l_jc_nh": l_jc }));
    Ok(Artifact {
        file: "calibrate_ejc.json".into(),
        body,
        units: units([("ft_ghz", "GHz"), ("ej_c_ghz", "GHz"), ("l_jc_nh", "nH")]),
        params: Some(p),
        notes: vec!["ASQ energies are set to zero (both loops closed) for the calibration".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let flags = Options { ljc: Some("1:2:2".into()), ..Default::default() };
        let file = Options { ljc: Some("5".into()), scale: Some(0.79), ..Default::default() };
        let m = flags.or(file);
        assert_eq!(m.ljc.as_deref(), Some("1:2:2"));
        assert_eq!(m.scale, Some(0.79));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<Options>(r#"{"ljc": "1:2:3", "bogus": 1}"#).is_err());
        let o: Options = serde_json::from_str(r#"{"ljc": "1:2:3", "omega-ref": 4.0}"#).unwrap();
        assert_eq!(o.omega_ref, Some(4.0));
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(config_err("x").exit_code(), 2);
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 3);
        let io = IoError::File { path: "p".into(), source: std::io::Error::other("x") };
        assert_eq!(CliError::from(io).exit_code(), 4);
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["asq", "j-sweep", "--flux1", "0:1:3", "--threads", "2"]).unwrap();
        assert_eq!(cli.command, Command::JSweep);
        assert_eq!(cli.options.threads, Some(2));
        let cli = Cli::try_parse_from(["asq", "lindblad-map", "--pump-detuning", "-178"]).unwrap();
        assert_eq!(cli.options.pump_detuning, Some(-178.0));
        assert!(Cli::try_parse_from(["asq", "nope"]).is_err());
    }
}
