//! The `blobkit` command line: config resolution, dispatch, JSON reports and exit codes.
//!
//! Exit codes: 0 pass, 1 tolerance breach (only with `selftest` or `--assert`) or numerical
//! failure, 2 schema or parse error, 3 I/O error.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::blobs::{
    ellipsoid_capacity, rs2_min_eigenvalue, uncertainty_psd, uncertainty_report, CovarianceMatrix, CovarianceRecord,
    QuantumBlob,
};
use crate::error::Error;
use crate::gabor::{covering_radius, Lattice, LatticeRecord, WHSystem};
use crate::gaussian_states::{from_blob, hamiltonian_xy_grid, to_blob, GaussianRecord, GaussianState};
use crate::linalg::{max_abs, Mat};
use crate::phasespace::io::{write_csv, GridRecord};
use crate::phasespace::{wigner, SampleGrid, SampledState};
use crate::symplectic::{
    mat_to_rows, pre_iwasawa, random_spd, random_symmetric, random_symplectic, symplectic_residual,
    williamson_eigenvalues, SymplecticMatrix, SymplecticRecord,
};
use crate::toeplitz::{
    density_matrix, semiclassical_sweep, toeplitz_quantize, toeplitz_via_weyl, SweepGrid, ToeplitzSpec, Window,
};
use crate::weyl::{weyl_quantize, DiscretizedOperator, GaussianBump, Symbol};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_BREACH: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const THREADS_ENV: &str = "BLOBKIT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "blobkit", version, about = "Quantum blobs, Wigner transforms, Weyl/Toeplitz quantization and Gabor frames")]
pub struct Cli {
    /// Reduced Planck constant [default: 1]
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// Grid size N, a power of two [default: 512]
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Half-width of the position interval [default: 12√ħ]
    #[arg(long, global = true)]
    pub domain: Option<f64>,
    /// Seed for every random draw [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exit 1 when any check fails
    #[arg(long, global = true)]
    pub assert: bool,
    /// RunConfig JSON; flags on the command line take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pre-Iwasawa factorization S = V_P M_L R
    Factorize(FactorizeArgs),
    /// Robertson–Schrödinger, Williamson and capacity tests for a covariance matrix
    Uncertainty(UncertaintyArgs),
    /// Grid Wigner function of a Gaussian state against its closed form
    Wigner(WignerArgs),
    /// Weyl or Toeplitz quantization of a symbol
    Quantize(QuantizeArgs),
    /// Weyl–Heisenberg frame bounds and expansion
    Frame(FrameArgs),
    /// Density matrix (2πħ)Op_TO(μ) of a phase-space probability density
    Density(DensityArgs),
    /// Semiclassical sweep of the blob-operator symbol deviation
    Sweep(SweepArgs),
    /// Run the invariant suite
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Factorize(_) => "factorize",
            Command::Uncertainty(_) => "uncertainty",
            Command::Wigner(_) => "wigner",
            Command::Quantize(_) => "quantize",
            Command::Frame(_) => "frame",
            Command::Density(_) => "density",
            Command::Sweep(_) => "sweep",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Args, Debug)]
pub struct FactorizeArgs {
    /// Symplectic matrix JSON {"n", "matrix"}; a random matrix is drawn when absent
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub word_length: usize,
}

#[derive(Args, Debug)]
pub struct UncertaintyArgs {
    /// Covariance JSON {"sigma", "mean"?}
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Diagonal covariance in units of ħ, e.g. 0.25,0.25
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub diag: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    /// Gaussian state JSON {"n", "hbar", "X", "Y", "z0"}; standard Gaussian when absent
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Plot-ready CSV of the Wigner grid
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Binary grid record
    #[arg(long)]
    pub bin: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Weyl,
    Toeplitz,
}

#[derive(Args, Debug)]
pub struct QuantizeArgs {
    #[arg(long, value_enum, default_value_t = Mode::Weyl)]
    pub mode: Mode,
    /// Preset (ho, one, quadratic, sin, bump) or a symbol JSON file
    #[arg(long, default_value = "ho")]
    pub symbol: String,
    /// `gauss` or a Gaussian state JSON file (Toeplitz mode)
    #[arg(long, default_value = "gauss")]
    pub window: String,
    /// Number of eigenvalues reported
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Binary grid record of the operator matrix
    #[arg(long)]
    pub bin: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FrameArgs {
    /// `gauss` or a Gaussian state JSON file
    #[arg(long, default_value = "gauss")]
    pub window: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,
    /// Truncation radius [default: covers the grid cell]
    #[arg(long)]
    pub rho: Option<f64>,
    /// Lattice JSON {"M" | "alpha","beta", "rho"}; overrides --alpha/--beta/--rho
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    /// Gaussian state JSON to expand; the window itself when absent
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Coefficient CSV (index, x, p, re, im)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// Preset `thermal` or a symbol JSON file holding μ
    #[arg(long, default_value = "thermal")]
    pub mu: String,
    /// `gauss` or a Gaussian state JSON file
    #[arg(long, default_value = "gauss")]
    pub window: String,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Preset (sin, quadratic, bump) or a symbol JSON file
    #[arg(long, default_value = "sin")]
    pub symbol: String,
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0.125")]
    pub hbars: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0)]
    pub y: f64,
    #[arg(long, default_value_t = 65)]
    pub points: usize,
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    /// CSV of (hbar, deviation, ratio)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// JSON run configuration. Every field is optional; unknown fields are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub hbar: Option<f64>,
    pub grid: Option<GridConfig>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub assert: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub domain: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Io(_) => EXIT_IO,
            CliError::Numerical(_) => EXIT_BREACH,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => CliError::Io(e.to_string()),
            Error::NumericalDegeneracy(_) | Error::NoFrame(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value >= tolerance }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub inputs: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Resolved run settings shared by all commands.
#[derive(Clone, Copy, Debug)]
pub struct Context {
    pub hbar: f64,
    pub n: usize,
    pub domain: f64,
    pub seed: u64,
}

impl Context {
    pub fn grid(&self) -> CliResult<SampleGrid> {
        Ok(SampleGrid::centered(self.n, self.domain, self.hbar)?)
    }

    fn echo(&self) -> Value {
        json!({"hbar": self.hbar, "grid": {"N": self.n, "domain": self.domain}, "seed": self.seed})
    }
}

struct Outcome {
    inputs: Value,
    results: Value,
    checks: Vec<Check>,
}

/// Parses `args` (program name first), runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCHEMA } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Schema(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool may already exist when called more than once in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: &Cli) -> CliResult<i32> {
    let cfg: RunConfig = match &cli.config {
        Some(p) => read_json(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != cli.command.name() {
            return Err(CliError::Schema(format!("config is for `{c}` but `{}` was run", cli.command.name())));
        }
    }
    let ctx = resolve_context(cli, &cfg)?;
    let out = cli.out.clone().or(cfg.out);
    let strict = cli.assert || cfg.assert.unwrap_or(false) || matches!(cli.command, Command::Selftest);

    let start = Instant::now();
    let outcome = dispatch(&cli.command, &ctx)?;
    let mut inputs = ctx.echo();
    if let (Value::Object(base), Value::Object(extra)) = (&mut inputs, outcome.inputs) {
        base.extend(extra);
    }
    let tolerances = outcome.checks.iter().map(|c| (c.name.clone(), c.tolerance)).collect();
    let pass = outcome.checks.iter().all(|c| c.pass);
    let report = Report {
        command: cli.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        inputs,
        tolerances,
        results: outcome.results,
        checks: outcome.checks,
        pass,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &out {
        Some(p) => {
            fs::write(p, &text).map_err(|e| io_error(p, e))?;
            println!("{}: {}", report.command, if pass { "pass" } else { "fail" });
        }
        None => print!("{text}"),
    }
    for c in report.failed() {
        eprintln!("check failed: {} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
    }
    Ok(if strict && !pass { EXIT_BREACH } else { EXIT_PASS })
}

fn resolve_context(cli: &Cli, cfg: &RunConfig) -> CliResult<Context> {
    let grid = cfg.grid.as_ref();
    let hbar = cli.hbar.or(cfg.hbar).unwrap_or(1.0);
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(CliError::Schema(format!("hbar must be positive, got {hbar}")));
    }
    let n = cli.grid_n.or(grid.and_then(|g| g.n)).unwrap_or(512);
    let domain = cli.domain.or(grid.and_then(|g| g.domain)).unwrap_or(12.0 * hbar.sqrt());
    let ctx = Context { hbar, n, domain, seed: cli.seed.or(cfg.seed).unwrap_or(0) };
    ctx.grid()?;
    Ok(ctx)
}

fn dispatch(cmd: &Command, ctx: &Context) -> CliResult<Outcome> {
    match cmd {
        Command::Factorize(a) => factorize(a, ctx),
        Command::Uncertainty(a) => uncertainty(a, ctx),
        Command::Wigner(a) => wigner_cmd(a, ctx),
        Command::Quantize(a) => quantize(a, ctx),
        Command::Frame(a) => frame(a, ctx),
        Command::Density(a) => density(a, ctx),
        Command::Sweep(a) => sweep(a, ctx),
        Command::Selftest => selftest(ctx),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Reads and parses a JSON file; parse failures report `path:line:column`.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Schema(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn path_echo(p: &Option<PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| Value::String(p.display().to_string()))
}

/// Named symbols, or a JSON file for anything else.
pub fn resolve_symbol(name: &str, hbar: f64) -> CliResult<Symbol> {
    Ok(match name {
        "ho" => Symbol::harmonic_oscillator(),
        "one" => Symbol::constant(1.0),
        "quadratic" => Symbol::polynomial(&[(2, 0, 1.0), (0, 2, 1.0)]),
        "sin" => Symbol::SinProduct { amplitude: 1.0, kx: 1.0, kp: 1.0 },
        "bump" => Symbol::gaussian(vec![GaussianBump::isotropic(1.0, [0.0, 0.0], 1.0)]),
        "thermal" => Symbol::gaussian(vec![GaussianBump {
            amplitude: 1.0 / (PI * hbar),
            center: [0.0, 0.0],
            matrix: [[1.0 / hbar, 0.0], [0.0, 1.0 / hbar]],
        }]),
        path => read_json(Path::new(path))?,
    })
}

fn read_gaussian(path: &Path, ctx: &Context) -> CliResult<GaussianState> {
    let state = GaussianState::try_from(read_json::<GaussianRecord>(path)?)?;
    if state.n != 1 {
        return Err(CliError::Schema(format!("{}: grid commands need n = 1", path.display())));
    }
    if (state.hbar - ctx.hbar).abs() > 1e-12 * ctx.hbar {
        return Err(CliError::Schema(format!("{}: hbar {} differs from --hbar {}", path.display(), state.hbar, ctx.hbar)));
    }
    Ok(state)
}

fn resolve_window(name: &str, ctx: &Context) -> CliResult<GaussianState> {
    match name {
        "gauss" => Ok(GaussianState::standard(1, ctx.hbar)?),
        path => read_gaussian(Path::new(path), ctx),
    }
}

fn symbol_echo(s: &Symbol) -> Value {
    serde_json::to_value(s).unwrap_or(Value::Null)
}

fn factorize(a: &FactorizeArgs, ctx: &Context) -> CliResult<Outcome> {
    let (s, source) = match &a.input {
        Some(p) => (SymplecticMatrix::try_from(read_json::<SymplecticRecord>(p)?)?, json!({"input": p.display().to_string()})),
        None => (
            random_symplectic(a.n, ctx.seed, a.word_length)?,
            json!({"random": {"n": a.n, "word_length": a.word_length}}),
        ),
    };
    let f = pre_iwasawa(&s)?;
    let recon = max_abs(&(f.reconstruct() - s.matrix()));
    let l_min = f.l.symmetric_eigenvalues().min();
    let checks = vec![
        Check::at_most("reconstruction", recon, 1e-9),
        Check::at_most("rotation_residual", f.rotation_residual(), 1e-9),
        Check::at_most("rotation_symplectic", symplectic_residual(&f.r)?, 1e-9),
        Check::at_most("p_asymmetry", max_abs(&(&f.p - f.p.transpose())), 1e-12),
        Check::at_least("l_min_eigenvalue", l_min, f64::MIN_POSITIVE),
    ];
    let results = json!({
        "S": mat_to_rows(s.matrix()),
        "P": mat_to_rows(&f.p),
        "L": mat_to_rows(&f.l),
        "R": mat_to_rows(&f.r),
    });
    Ok(Outcome { inputs: source, results, checks })
}

fn uncertainty(a: &UncertaintyArgs, ctx: &Context) -> CliResult<Outcome> {
    let h = ctx.hbar;
    let (cov, source) = match (&a.input, &a.diag) {
        (Some(p), None) => (CovarianceMatrix::try_from(read_json::<CovarianceRecord>(p)?)?, json!({"input": p.display().to_string()})),
        (None, Some(d)) => {
            if d.is_empty() || d.len() % 2 != 0 {
                return Err(CliError::Schema("--diag needs an even number of entries".into()));
            }
            let v = nalgebra::DVector::from_iterator(d.len(), d.iter().map(|x| x * h));
            (CovarianceMatrix::new(Mat::from_diagonal(&v))?, json!({"diag_in_hbar_units": d}))
        }
        _ => return Err(CliError::Schema("give exactly one of --input or --diag".into())),
    };
    let report = uncertainty_report(&cov, h)?;
    let lam = report.symplectic_spectrum.min();
    let agree = three_way_agreement(&cov, h)?;
    let results = json!({
        "report": report,
        "rs2_min_eigenvalue": rs2_min_eigenvalue(&cov, h)?,
        "criteria_agree": agree,
    });
    let checks = vec![
        Check::at_most("criteria_disagreements", if agree { 0.0 } else { 1.0 }, 0.0),
        Check::at_least("williamson_min_over_half_hbar", lam / (h / 2.0), 1.0 - 1e-9),
    ];
    Ok(Outcome { inputs: source, results, checks })
}

/// PSD test, Williamson test and capacity test give the same verdict.
fn three_way_agreement(cov: &CovarianceMatrix, h: f64) -> CliResult<bool> {
    let psd = uncertainty_psd(cov, h)?;
    let will = williamson_eigenvalues(cov.matrix())?.min() >= h / 2.0 * (1.0 - 1e-9);
    let cap = ellipsoid_capacity(cov, h)? >= PI * h * (1.0 - 1e-9);
    Ok(psd == will && will == cap)
}

fn wigner_cmd(a: &WignerArgs, ctx: &Context) -> CliResult<Outcome> {
    let grid = ctx.grid()?;
    let state = match &a.input {
        Some(p) => read_gaussian(p, ctx)?,
        None => GaussianState::standard(1, ctx.hbar)?,
    };
    let psi = state.sample(grid)?;
    let w = wigner(&psi)?;
    let closed = state.wigner_closed_form();
    let mut oracle_err = 0.0f64;
    for i in 0..w.nx {
        for k in 0..w.np {
            oracle_err = oracle_err.max((w.get(i, k) - closed.value(&[w.x(i), w.p(k)])).norm());
        }
    }
    let xm = w.x_marginal();
    let pm = w.p_marginal();
    let amp = psi.momentum_amplitudes();
    let xerr = xm.iter().zip(&psi.values).fold(0.0f64, |m, (a, v)| m.max((a - v.norm_sqr()).norm()));
    let perr = pm.iter().zip(&amp).fold(0.0f64, |m, (a, v)| m.max((a - v.norm_sqr()).norm()));
    let integral = w.integral();
    if let Some(p) = &a.csv {
        write_csv(&w, create(p)?)?;
    }
    if let Some(p) = &a.bin {
        GridRecord::from_phase_space(&w, ctx.hbar, "wigner").write_to(create(p)?)?;
    }
    let results = json!({
        "closed_form_max_error": oracle_err,
        "integral": integral.re,
        "x_marginal_error": xerr,
        "p_marginal_error": perr,
        "min_value": w.min_real(),
        "max_value": w.max_abs(),
        "l1_norm": w.l1_norm(),
        "max_imag": w.max_imag(),
    });
    let checks = vec![
        Check::at_most("closed_form", oracle_err, 1e-6),
        Check::at_most("normalization", (integral - 1.0).norm(), 1e-6),
        Check::at_most("x_marginal", xerr, 1e-6),
        Check::at_most("p_marginal", perr, 1e-6),
    ];
    let state_echo = serde_json::to_value(GaussianRecord::from(&state)).unwrap_or(Value::Null);
    Ok(Outcome {
        inputs: json!({"state": state_echo, "csv": path_echo(&a.csv), "bin": path_echo(&a.bin)}),
        results,
        checks,
    })
}

fn quantize(a: &QuantizeArgs, ctx: &Context) -> CliResult<Outcome> {
    let grid = ctx.grid()?;
    let h = ctx.hbar;
    let symbol = resolve_symbol(&a.symbol, h)?;
    let mut checks = Vec::new();
    let mut extra = serde_json::Map::new();
    let (op, offset): (DiscretizedOperator, f64) = match a.mode {
        Mode::Weyl => (weyl_quantize(&symbol, &grid)?, 0.0),
        Mode::Toeplitz => {
            let window = resolve_window(&a.window, ctx)?;
            let spec = ToeplitzSpec::new(symbol.clone(), Window::Gaussian(window), h)?;
            let direct = toeplitz_quantize(&spec, &grid)?;
            let gap = direct.max_abs_diff(&toeplitz_via_weyl(&spec, &grid)?);
            extra.insert("route_gap".into(), json!(gap));
            checks.push(Check::at_most("route_gap", gap, 1e-4));
            (direct, h / 2.0)
        }
    };
    let eig = op.hermitian_eigenvalues();
    let levels: Vec<f64> = eig.iter().take(a.levels).copied().collect();
    let herm = op.hermiticity_residual();
    checks.push(Check::at_most("hermiticity", herm, 1e-8));
    if a.symbol == "ho" {
        let dev = levels
            .iter()
            .take(6)
            .enumerate()
            .fold(0.0f64, |m, (k, e)| m.max((e - h * (k as f64 + 0.5) - offset).abs()));
        checks.push(Check::at_most("oscillator_spectrum", dev, 1e-5));
    }
    if let Some(p) = &a.bin {
        op.to_record().write_to(create(p)?)?;
    }
    let tr = op.trace();
    extra.insert("eigenvalues".into(), json!(levels));
    extra.insert("hermiticity_residual".into(), json!(herm));
    extra.insert("trace".into(), json!([tr.re, tr.im]));
    extra.insert("frobenius_norm".into(), json!(op.frobenius_norm()));
    let mode = match a.mode {
        Mode::Weyl => "weyl",
        Mode::Toeplitz => "toeplitz",
    };
    let window = if a.mode == Mode::Toeplitz { json!(a.window) } else { Value::Null };
    Ok(Outcome {
        inputs: json!({"mode": mode, "symbol": symbol_echo(&symbol), "window": window, "levels": a.levels, "bin": path_echo(&a.bin)}),
        results: Value::Object(extra),
        checks,
    })
}

fn frame(a: &FrameArgs, ctx: &Context) -> CliResult<Outcome> {
    let grid = ctx.grid()?;
    let window = resolve_window(&a.window, ctx)?;
    let lattice = match &a.lattice {
        Some(p) => Lattice::try_from(read_json::<LatticeRecord>(p)?)?,
        None => {
            let rho = a.rho.unwrap_or_else(|| covering_radius(&grid) + a.alpha.max(a.beta));
            Lattice::separable(a.alpha, a.beta, rho)?
        }
    };
    let sys = WHSystem::new(window.sample(grid)?, lattice.clone())?;
    let bounds = sys.frame_bounds()?;
    let sites = sys.sites();
    let is_frame = bounds.a > 1e-6 * bounds.b;
    let psi = match &a.state {
        Some(p) => read_gaussian(p, ctx)?.sample(grid)?,
        None => sys.window.clone(),
    };
    let mut checks = vec![Check::at_least("lower_bound_ratio", bounds.ratio(), 1e-6)];
    let mut results = json!({
        "sites": sites.len(),
        "density": lattice.density(ctx.hbar),
        "a": bounds.a,
        "b": bounds.b,
        "ratio": bounds.ratio(),
        "is_frame": is_frame,
        "window_width": sys.window_width(),
        "interior_box": sys.interior_box(),
    });
    let coefficients: Vec<Complex64> = if is_frame {
        let ex = sys.expand(&psi)?;
        results["reconstruction_error"] = json!(ex.relative_error);
        results["ambiguity_gap"] = json!(ex.ambiguity_gap);
        checks.push(Check::at_most("reconstruction", ex.relative_error, 1e-6));
        checks.push(Check::at_most("ambiguity_gap", ex.ambiguity_gap, 1e-8));
        ex.coefficients
    } else {
        sys.atoms().iter().map(|at| psi.inner(at)).collect()
    };
    if let Some(p) = &a.csv {
        let mut w = create(p)?;
        let row = |w: &mut BufWriter<File>, s: String| w.write_all(s.as_bytes()).map_err(|e| io_error(p, e));
        row(&mut w, "index,x,p,re,im\n".into())?;
        for (i, (z, c)) in sites.iter().zip(&coefficients).enumerate() {
            row(&mut w, format!("{i},{},{},{},{}\n", z[0], z[1], c.re, c.im))?;
        }
        w.flush().map_err(|e| io_error(p, e))?;
    }
    let lattice_echo = serde_json::to_value(LatticeRecord::from(&lattice)).unwrap_or(Value::Null);
    Ok(Outcome {
        inputs: json!({"window": a.window, "lattice": lattice_echo, "state": path_echo(&a.state), "csv": path_echo(&a.csv)}),
        results,
        checks,
    })
}

fn density(a: &DensityArgs, ctx: &Context) -> CliResult<Outcome> {
    let grid = ctx.grid()?;
    let mu = resolve_symbol(&a.mu, ctx.hbar)?;
    let window = resolve_window(&a.window, ctx)?;
    let sampled = window.sample(grid)?;
    let rho = density_matrix(&mu, Window::Gaussian(window), &grid)?;
    let tc = rho.trace_checks(&mu, &sampled)?;
    let residual = rho.spectral_identity_residual(&mu, &sampled, 1e-12)?;
    let results = json!({
        "traces": tc,
        "min_eigenvalue": rho.min_eigenvalue,
        "spectrum": rho.spectrum.iter().take(a.levels).collect::<Vec<_>>(),
        "purity": rho.purity(),
        "spectral_identity_residual": residual,
    });
    let checks = vec![
        Check::at_most("trace_matrix", (tc.matrix_trace - 1.0).abs(), 1e-4),
        Check::at_most("trace_smoothed", (tc.smoothed_integral - 1.0).abs(), 1e-4),
        Check::at_most("trace_fourier", (tc.fourier_product - 1.0).abs(), 1e-4),
        Check::at_least("min_eigenvalue", rho.min_eigenvalue, -1e-9),
        Check::at_most("spectral_identity", residual, 1e-3),
    ];
    Ok(Outcome { inputs: json!({"mu": symbol_echo(&mu), "window": a.window, "levels": a.levels}), results, checks })
}

fn sweep(a: &SweepArgs, ctx: &Context) -> CliResult<Outcome> {
    let symbol = resolve_symbol(&a.symbol, ctx.hbar)?;
    let sg = SweepGrid { half_width: PI, points: a.points, quadrature_order: a.order };
    let pts = semiclassical_sweep(&symbol, a.x, a.y, &a.hbars, &sg)?;
    let violations = pts.windows(2).filter(|w| w[1].deviation >= w[0].deviation).count();
    let mut checks = vec![Check::at_most("decreasing_violations", violations as f64, 0.0)];
    match a.symbol.as_str() {
        "sin" => {
            let r = pts.last().expect("nonempty").deviation / pts[0].deviation;
            checks.push(Check::at_most("ratio_last_first", r, 0.2));
        }
        "quadratic" => {
            let mut err = 0.0f64;
            for p in &pts {
                let cov = GaussianState::centered(Mat::from_element(1, 1, a.x), Mat::from_element(1, 1, a.y), p.hbar)?
                    .wigner_closed_form()
                    .covariance();
                err = err.max((p.deviation - cov.trace()).abs());
            }
            checks.push(Check::at_most("moment_oracle", err, 1e-8));
        }
        _ => {}
    }
    if let Some(p) = &a.csv {
        let mut w = create(p)?;
        let mut text = String::from("hbar,deviation,ratio\n");
        for q in &pts {
            text += &format!("{},{},{}\n", q.hbar, q.deviation, q.ratio);
        }
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| io_error(p, e))?;
    }
    Ok(Outcome {
        inputs: json!({"symbol": symbol_echo(&symbol), "hbars": a.hbars, "x": a.x, "y": a.y, "sweep_grid": sg, "csv": path_echo(&a.csv)}),
        results: json!({"points": pts}),
        checks,
    })
}

/// A reduced pass over every module's invariants, seeded from the run seed.
fn selftest(ctx: &Context) -> CliResult<Outcome> {
    let h = ctx.hbar;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut checks = Vec::new();

    let mut recon = 0.0f64;
    for k in 0..60u64 {
        let s = random_symplectic(1 + (k % 3) as usize, ctx.seed.wrapping_add(k), 8)?;
        recon = recon.max(max_abs(&(pre_iwasawa(&s)?.reconstruct() - s.matrix())));
    }
    checks.push(Check::at_most("pre_iwasawa_roundtrip", recon, 1e-9));

    let mut disagree = 0usize;
    for k in 0..60u64 {
        let n = 1 + (k % 3) as usize;
        let s = random_symplectic(n, rng.random(), 6)?;
        let lam: Vec<f64> = (0..n).map(|_| h * rng.random_range(0.2..1.5)).collect();
        let d = nalgebra::DVector::from_iterator(2 * n, lam.iter().chain(&lam).copied());
        let sigma = s.matrix() * Mat::from_diagonal(&d) * s.matrix().transpose();
        let cov = CovarianceMatrix::new(crate::linalg::symmetrize(&sigma))?;
        if !three_way_agreement(&cov, h)? {
            disagree += 1;
        }
    }
    checks.push(Check::at_most("uncertainty_equivalence", disagree as f64, 0.0));

    let mut gamma = 0usize;
    for _ in 0..40 {
        let n = rng.random_range(1..=3);
        let l = random_spd(&mut rng, n, 0.5);
        let p = random_symmetric(&mut rng, n, 1.0);
        let s = SymplecticMatrix::shear(&p)?.compose(&SymplecticMatrix::dilation(&l)?);
        let z0: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = QuantumBlob::new(s, z0, h)?;
        if !to_blob(&from_blob(&q)?)?.same_as(&q, 1e-8)? {
            gamma += 1;
        }
    }
    checks.push(Check::at_most("gamma_roundtrip_failures", gamma as f64, 0.0));

    let grid = ctx.grid()?;
    let phi = SampledState::standard_gaussian(grid);
    let w = wigner(&phi)?;
    let mut werr = 0.0f64;
    for i in 0..w.nx {
        for k in 0..w.np {
            let r2 = w.x(i).powi(2) + w.p(k).powi(2);
            werr = werr.max((w.get(i, k).re - (-r2 / h).exp() / (PI * h)).abs());
        }
    }
    checks.push(Check::at_most("wigner_oracle", werr, 1e-6));

    let other = GaussianState::new(Mat::from_element(1, 1, 1.7), Mat::from_element(1, 1, 0.4), vec![0.5, -0.3], h)?
        .sample(grid)?;
    let moyal = w.inner(&wigner(&other)?).re;
    let overlap = phi.inner(&other).norm_sqr() / (2.0 * PI * h);
    checks.push(Check::at_most("moyal_identity", (moyal - overlap).abs() / overlap, 1e-6));

    let (x, y) = (1.6, 0.5);
    let psi = GaussianState::centered(Mat::from_element(1, 1, x), Mat::from_element(1, 1, y), h)?.sample(grid)?;
    let hpsi = &hamiltonian_xy_grid(x, y, &grid) * nalgebra::DVector::from_vec(psi.values.clone());
    let res = hpsi
        .iter()
        .zip(&psi.values)
        .map(|(a, b)| (a - b * (h * x / 2.0)).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / psi.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    checks.push(Check::at_most("eigenvalue_equation", res, 1e-6));

    let id = weyl_quantize(&Symbol::constant(1.0), &grid)?.max_abs_diff(&DiscretizedOperator::identity(grid));
    checks.push(Check::at_most("weyl_identity", id, 1e-8));
    let eig = weyl_quantize(&Symbol::harmonic_oscillator(), &grid)?.hermitian_eigenvalues();
    let ho = (0..6).fold(0.0f64, |m, k| m.max((eig[k] - h * (k as f64 + 0.5)).abs()));
    checks.push(Check::at_most("oscillator_spectrum", ho, 1e-5));

    let small = SampleGrid::symmetric(128, h)?;
    let ratio = |d: f64| -> CliResult<f64> {
        let sys = WHSystem::new(SampledState::standard_gaussian(small), Lattice::square_with_density(d, h, 1.5 * covering_radius(&small))?)?;
        Ok(sys.frame_bounds()?.ratio())
    };
    let (r_lo, r_hi) = (ratio(0.5)?, ratio(2.0)?);
    checks.push(Check::at_least("gabor_threshold_drop", r_lo / r_hi.max(1e-300), 100.0));

    let spec = ToeplitzSpec::anti_wick(Symbol::gaussian(vec![GaussianBump::isotropic(1.0, [0.4, -0.2], 0.8)]), h)?;
    let direct = toeplitz_quantize(&spec, &small)?;
    checks.push(Check::at_most("toeplitz_routes", direct.max_abs_diff(&toeplitz_via_weyl(&spec, &small)?), 1e-4));
    checks.push(Check::at_least("toeplitz_positivity", direct.hermitian_eigenvalues()[0], -1e-9));

    let mu = resolve_symbol("thermal", h)?;
    let rho = density_matrix(&mu, Window::Gaussian(GaussianState::standard(1, h)?), &small)?;
    checks.push(Check::at_most("density_trace", (rho.trace - 1.0).abs(), 1e-4));
    checks.push(Check::at_least("density_psd", rho.min_eigenvalue, -1e-9));

    let pts = semiclassical_sweep(&resolve_symbol("sin", h)?, 1.0, 0.0, &[1.0, 0.5, 0.25, 0.125], &SweepGrid::default())?;
    let worst = pts.windows(2).filter(|w| w[1].deviation >= w[0].deviation).count();
    checks.push(Check::at_most("sweep_monotone_violations", worst as f64, 0.0));
    checks.push(Check::at_most("sweep_ratio", pts[3].deviation / pts[0].deviation, 0.2));

    let results = json!({
        "checks_run": checks.len(),
        "failed": checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect::<Vec<_>>(),
    });
    Ok(Outcome { inputs: json!({}), results, checks })
}
