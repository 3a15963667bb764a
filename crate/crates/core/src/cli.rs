//! Command-line front end. The binary only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 a `reproduce` case missed its reference value,
//! 2 usage or configuration error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{parse_config, ConfigSources, OutputFormat, ParamSet, RunConfig, WORKERS_ENV};
use crate::error::Error;
use crate::figures::{figure, reproduce_case, REFERENCE_TOLERANCE};
use crate::params::derive_params;
use crate::spectrum::{variance_qp, CothModel};
use crate::steadystate::{select_branch, solve_steady_state, BranchPolicy};
use crate::sweep::{
    find_min_variance, linspace, run_sweep, Quadrature, SweepAxis, SweepSpec, DEFAULT_DELTA0_POINTS, DEFAULT_DELTA0_WINDOW,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REPRODUCE_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Parser)]
#[command(
    name = "optosqueeze",
    version,
    about = "Mirror squeezing by radiation pressure and squeezed vacuum"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` parameter file (SI units).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Built-in parameter set.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Read frequency flags (kappa, omega_m, delta0, a delta0 sweep range) in Hz.
    #[arg(long, global = true)]
    pub hz: bool,
    /// Thermal factor model: exact, hiT or zeroT.
    #[arg(long, global = true)]
    pub coth: Option<CothModel>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// lowest-qs-stable, highest-qs-stable or all.
    #[arg(long, global = true)]
    pub branch: Option<BranchPolicy>,
    /// csv or json (JSON lines).
    #[arg(long, global = true)]
    pub output: Option<OutputFormat>,
    /// Worker threads for sweeps (default from OPTOSQUEEZE_WORKERS, else 1).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_name = "M")]
    pub wavelength: Option<f64>,
    #[arg(long = "cavity-length", global = true, value_name = "M")]
    pub cavity_length: Option<f64>,
    #[arg(long, global = true, value_name = "KG")]
    pub mass: Option<f64>,
    #[arg(long, global = true, value_name = "RAD_S")]
    pub kappa: Option<f64>,
    #[arg(long = "omega-m", global = true, value_name = "RAD_S")]
    pub omega_m: Option<f64>,
    #[arg(long, global = true)]
    pub quality: Option<f64>,
    /// Laser power [W].
    #[arg(long = "P", visible_alias = "power", global = true, value_name = "W")]
    pub power: Option<f64>,
    /// Temperature [K].
    #[arg(long = "T", visible_alias = "temperature", global = true, value_name = "K")]
    pub temperature: Option<f64>,
    /// Squeezing parameter.
    #[arg(long = "r", visible_alias = "squeeze-r", global = true)]
    pub squeeze_r: Option<f64>,
    /// Squeezing phase [rad].
    #[arg(long = "phi", visible_alias = "squeeze-phi", global = true, allow_negative_numbers = true)]
    pub squeeze_phi: Option<f64>,
    /// Bare detuning [rad/s].
    #[arg(
        long,
        global = true,
        value_name = "RAD_S",
        conflicts_with = "delta0_wm",
        allow_negative_numbers = true
    )]
    pub delta0: Option<f64>,
    /// Bare detuning in units of omega_m.
    #[arg(long = "delta0-wm", global = true, allow_negative_numbers = true)]
    pub delta0_wm: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All steady-state branches at the configured detuning.
    Steady,
    /// Stability verdict and Routh-Hurwitz margins of every branch.
    Stability,
    /// Stability over a (delta0, power) grid.
    StabilityMap {
        /// LO:HI:N in units of omega_m.
        #[arg(long, default_value = "0.1:3:59", allow_hyphen_values = true)]
        delta0_range: GridRange,
        /// LO:HI:N in watts.
        #[arg(long, default_value = "1e-4:1e-2:34", allow_hyphen_values = true)]
        power_range: GridRange,
    },
    /// Position and momentum variances of the selected branch.
    Variance,
    /// Variances along one parameter axis.
    Sweep(SweepArgs),
    /// Refined minimum of one variance along an axis.
    Min {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Q or P.
        #[arg(long, default_value = "P")]
        quadrature: QuadratureArg,
    },
    /// Recompute the reference minima of one figure.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=5))]
        figure: u32,
        /// Detuning grid points before refinement.
        #[arg(long, default_value_t = DEFAULT_DELTA0_POINTS)]
        points: usize,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// delta0, r, T or P.
    #[arg(long, default_value = "delta0")]
    pub axis: SweepAxis,
    /// LO:HI:N in SI units of the axis; defaults to 0.1..3 omega_m for delta0.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<GridRange>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl std::str::FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected LO:HI:N, got `{s}`");
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || n < 2 {
            return Err(format!("range `{s}` needs LO < HI and N >= 2"));
        }
        Ok(GridRange { lo, hi, n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureArg(pub Quadrature);

impl std::str::FromStr for QuadratureArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Q" | "q" | "position" => Ok(QuadratureArg(Quadrature::Q)),
            "P" | "p" | "momentum" => Ok(QuadratureArg(Quadrature::P)),
            other => Err(format!("unknown quadrature `{other}` (Q, P)")),
        }
    }
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<i32, Failure>;

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        // round to the printed precision so JSON and CSV agree
        let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
        json!(r)
    } else {
        Value::Null
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_num)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, W, E>(args: I, env_workers: Option<String>, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator,
    I::Item: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // help and version exit 0, everything else is a usage error
            if e.exit_code() == 0 {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match execute(&cli, env_workers, out) {
        Ok(code) => code,
        Err(Failure::Lib(e)) => {
            let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
            let _ = writeln!(err, "{}", error_line(&e));
            code
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "{}", json!({"error": "io", "message": e.to_string()}));
            EXIT_NUMERICAL
        }
    }
}

/// Machine-readable error record.
pub fn error_line(e: &Error) -> Value {
    let mut m = Map::new();
    let kind = match e {
        Error::Validation { field, .. } => {
            m.insert("field".into(), json!(field));
            "validation"
        }
        Error::UnknownKey(key) => {
            m.insert("field".into(), json!(key));
            "unknown_key"
        }
        Error::Config { line, .. } => {
            m.insert("line".into(), json!(line));
            "config"
        }
        Error::InvalidSweep(_) => "invalid_sweep",
        Error::NoStableBranch => "no_stable_branch",
        Error::UnstableBranch => "unstable_branch",
        Error::TailNotConverged { .. } => "tail_not_converged",
        Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
        Error::EigenNonConvergence => "eigen_non_convergence",
    };
    m.insert("error".into(), json!(kind));
    m.insert("message".into(), json!(e.to_string()));
    Value::Object(m)
}

fn load_config(c: &Common, env_workers: Option<String>, default_output: OutputFormat) -> Result<RunConfig, Error> {
    let f = if c.hz { TWO_PI } else { 1.0 };
    let mut flags = ParamSet::default();
    let entries = [
        ("wavelength_m", c.wavelength),
        ("cavity_length_m", c.cavity_length),
        ("mass_kg", c.mass),
        ("kappa_rad_s", c.kappa.map(|x| x * f)),
        ("omega_m_rad_s", c.omega_m.map(|x| x * f)),
        ("quality", c.quality),
        ("power_w", c.power),
        ("temperature_k", c.temperature),
        ("squeeze_r", c.squeeze_r),
        ("squeeze_phi", c.squeeze_phi),
        // placeholder, replaced below once omega_m is known
        ("detuning0_rad_s", c.delta0.map(|x| x * f).or(c.delta0_wm.map(|_| 0.0))),
    ];
    for (key, v) in entries {
        if let Some(v) = v {
            flags.set(key, v)?;
        }
    }
    let mut cfg = parse_config(&ConfigSources {
        preset: c.preset.as_deref(),
        file: c.config.as_deref(),
        flags,
        coth: c.coth,
        tol: c.tol,
        branch_policy: c.branch,
        output: Some(c.output.unwrap_or(default_output)),
        workers: c.workers,
        workers_env: env_workers,
    })?;
    if let Some(x) = c.delta0_wm {
        cfg.params.detuning0 = x * cfg.params.omega_m;
        cfg.params.validate()?;
    }
    Ok(cfg)
}

fn execute<W: Write>(cli: &Cli, env_workers: Option<String>, out: &mut W) -> Outcome {
    let default_output = match cli.command {
        Command::Variance | Command::Min { .. } => OutputFormat::Json,
        _ => OutputFormat::Csv,
    };
    let env_workers = env_workers
        .or_else(|| std::env::var(WORKERS_ENV).ok())
        .filter(|_| cli.common.workers.is_none());
    let needs_params = !matches!(cli.command, Command::Reproduce { .. });
    let cfg = if needs_params {
        load_config(&cli.common, env_workers, default_output)?
    } else {
        // figure cases carry their own parameters; only the numerics apply
        let mut common = ConfigSources {
            preset: Some("groeblacher"),
            coth: cli.common.coth,
            tol: cli.common.tol,
            output: Some(cli.common.output.unwrap_or(default_output)),
            workers: cli.common.workers,
            workers_env: env_workers,
            ..Default::default()
        };
        common.branch_policy = cli.common.branch;
        parse_config(&common)?
    };
    match &cli.command {
        Command::Steady => steady(&cfg, out),
        Command::Stability => stability(&cfg, out),
        Command::StabilityMap { delta0_range, power_range } => stability_map(&cfg, *delta0_range, *power_range, cli.common.hz, out),
        Command::Variance => variance(&cfg, out),
        Command::Sweep(args) => sweep(&cfg, args, cli.common.hz, out),
        Command::Min { sweep, quadrature } => minimum(&cfg, sweep, quadrature.0, cli.common.hz, out),
        Command::Reproduce { figure, points } => reproduce(&cfg, *figure, *points, out),
    }
}

/// Writes either CSV with a header or one JSON object per row.
struct Table<'a, W: Write> {
    out: &'a mut W,
    format: OutputFormat,
    header: &'static [&'static str],
    wrote_header: bool,
}

enum Cell {
    Num(f64),
    OptNum(Option<f64>),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl<'a, W: Write> Table<'a, W> {
    fn new(out: &'a mut W, format: OutputFormat, header: &'static [&'static str]) -> Self {
        Table {
            out,
            format,
            header,
            wrote_header: false,
        }
    }

    fn row(&mut self, cells: Vec<Cell>) -> std::io::Result<()> {
        debug_assert_eq!(cells.len(), self.header.len());
        match self.format {
            OutputFormat::Csv => {
                if !self.wrote_header {
                    writeln!(self.out, "{}", self.header.join(","))?;
                    self.wrote_header = true;
                }
                let fields: Vec<String> = cells
                    .into_iter()
                    .map(|c| match c {
                        Cell::Num(x) => fmt_num(x),
                        Cell::OptNum(x) => x.map(fmt_num).unwrap_or_default(),
                        Cell::Int(i) => i.to_string(),
                        Cell::Bool(b) => b.to_string(),
                        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
                        Cell::Text(s) => s,
                    })
                    .collect();
                writeln!(self.out, "{}", fields.join(","))
            }
            OutputFormat::Json => {
                let mut m = Map::new();
                for (k, c) in self.header.iter().zip(cells) {
                    let v = match c {
                        Cell::Num(x) => json_num(x),
                        Cell::OptNum(x) => opt_num(x),
                        Cell::Int(i) => json!(i),
                        Cell::Bool(b) => json!(b),
                        Cell::Text(s) => json!(s),
                    };
                    m.insert((*k).to_string(), v);
                }
                writeln!(self.out, "{}", Value::Object(m))
            }
        }
    }
}

fn steady<W: Write>(cfg: &RunConfig, out: &mut W) -> Outcome {
    let p = cfg.params;
    let d = derive_params(&p)?;
    let branches = solve_steady_state(&d, p.detuning0)?;
    let header = &[
        "delta0",
        "root_index",
        "q_s",
        "delta",
        "re_c_s",
        "im_c_s",
        "photon_number",
        "stable",
    ];
    if cfg.output == OutputFormat::Json {
        // a single JSON array
        let rows: Vec<Value> = branches
            .iter()
            .enumerate()
            .map(|(i, b)| {
                json!({
                    "delta0": json_num(p.detuning0),
                    "root_index": i,
                    "q_s": json_num(b.q_s),
                    "delta": json_num(b.delta),
                    "re_c_s": json_num(b.c_s.re),
                    "im_c_s": json_num(b.c_s.im),
                    "photon_number": json_num(b.photon_number),
                    "stable": b.stable,
                })
            })
            .collect();
        writeln!(out, "{}", Value::Array(rows))?;
        return Ok(EXIT_OK);
    }
    let mut t = Table::new(out, cfg.output, header);
    for (i, b) in branches.iter().enumerate() {
        t.row(vec![
            Cell::Num(p.detuning0),
            Cell::Int(i),
            Cell::Num(b.q_s),
            Cell::Num(b.delta),
            Cell::Num(b.c_s.re),
            Cell::Num(b.c_s.im),
            Cell::Num(b.photon_number),
            Cell::Bool(b.stable),
        ])?;
    }
    Ok(EXIT_OK)
}

fn stability<W: Write>(cfg: &RunConfig, out: &mut W) -> Outcome {
    let p = cfg.params;
    let d = derive_params(&p)?;
    let branches = solve_steady_state(&d, p.detuning0)?;
    let mut t = Table::new(
        out,
        cfg.output,
        &[
            "delta0",
            "root_index",
            "delta",
            "stable",
            "marginal",
            "rh_margin_1",
            "rh_margin_2",
            "max_eig_real",
        ],
    );
    for (i, b) in branches.iter().enumerate() {
        let v = b.verdict;
        t.row(vec![
            Cell::Num(p.detuning0),
            Cell::Int(i),
            Cell::Num(b.delta),
            Cell::Bool(v.stable),
            Cell::Bool(v.marginal),
            Cell::Num(v.rh_margin_1),
            Cell::Num(v.rh_margin_2),
            Cell::Num(v.max_eig_real),
        ])?;
    }
    Ok(EXIT_OK)
}

fn stability_map<W: Write>(cfg: &RunConfig, delta0: GridRange, power: GridRange, _hz: bool, out: &mut W) -> Outcome {
    let wm = cfg.params.omega_m;
    let mut t = Table::new(out, cfg.output, &["delta0", "power", "branches", "stable_branches", "stable"]);
    for x in linspace(delta0.lo, delta0.hi, delta0.n) {
        for pw in linspace(power.lo, power.hi, power.n) {
            let p = crate::params::SystemParams {
                detuning0: x * wm,
                power: pw,
                ..cfg.params
            };
            let d = derive_params(&p)?;
            let branches = solve_steady_state(&d, p.detuning0)?;
            let n_stable = branches.iter().filter(|b| b.stable).count();
            t.row(vec![
                Cell::Num(p.detuning0),
                Cell::Num(pw),
                Cell::Int(branches.len()),
                Cell::Int(n_stable),
                Cell::Bool(select_branch(&branches, cfg.branch_policy).is_ok()),
            ])?;
        }
    }
    Ok(EXIT_OK)
}

fn variance<W: Write>(cfg: &RunConfig, out: &mut W) -> Outcome {
    let p = cfg.params;
    let d = derive_params(&p)?;
    let branches = solve_steady_state(&d, p.detuning0)?;
    let coth = cfg.coth_model();
    let mut t = Table::new(
        out,
        cfg.output,
        &[
            "delta0",
            "root_index",
            "q_s",
            "delta",
            "coth",
            "var_q",
            "var_p",
            "imag_residual_q",
            "imag_residual_p",
            "quad_error_q",
            "quad_error_p",
            "omega_max",
            "evaluations",
        ],
    );
    for b in select_branch(&branches, cfg.branch_policy)?.into_vec() {
        let i = branches.iter().position(|x| std::ptr::eq(x, b)).unwrap_or(0);
        let v = variance_qp(&d, b, coth, cfg.tol)?;
        t.row(vec![
            Cell::Num(p.detuning0),
            Cell::Int(i),
            Cell::Num(b.q_s),
            Cell::Num(b.delta),
            Cell::Text(coth.name().into()),
            Cell::Num(v.var_q),
            Cell::Num(v.var_p),
            Cell::Num(v.imag_residual_q),
            Cell::Num(v.imag_residual_p),
            Cell::Num(v.quad_error_q),
            Cell::Num(v.quad_error_p),
            Cell::Num(v.omega_max),
            Cell::Int(v.evaluations),
        ])?;
    }
    Ok(EXIT_OK)
}

fn sweep_spec(cfg: &RunConfig, args: &SweepArgs, hz: bool) -> Result<SweepSpec<f64>, Error> {
    let wm = cfg.params.omega_m;
    let grid = match (args.axis, args.range) {
        (SweepAxis::Delta0, Some(r)) => {
            let f = if hz { TWO_PI } else { 1.0 };
            linspace(r.lo * f, r.hi * f, r.n)
        }
        (_, Some(r)) => linspace(r.lo, r.hi, r.n),
        (SweepAxis::Delta0, None) => linspace(DEFAULT_DELTA0_WINDOW.0 * wm, DEFAULT_DELTA0_WINDOW.1 * wm, DEFAULT_DELTA0_POINTS),
        (axis, None) => return Err(Error::InvalidSweep(format!("--range is required for axis {axis:?}"))),
    };
    Ok(SweepSpec {
        axis: args.axis,
        grid,
        fixed: cfg.params,
        branch_policy: cfg.branch_policy,
        coth: cfg.coth,
        tol: cfg.tol,
        workers: cfg.workers,
    })
}

fn sweep<W: Write>(cfg: &RunConfig, args: &SweepArgs, hz: bool, out: &mut W) -> Outcome {
    let spec = sweep_spec(cfg, args, hz)?;
    let rows = run_sweep(&spec)?;
    let mut t = Table::new(out, cfg.output, &["coordinate", "Q_s", "stable", "varQ", "varP"]);
    for r in rows {
        t.row(vec![
            Cell::Num(r.coordinate),
            Cell::Num(r.q_s),
            Cell::Bool(r.stable),
            Cell::OptNum(r.var_q),
            Cell::OptNum(r.var_p),
        ])?;
    }
    Ok(EXIT_OK)
}

fn minimum<W: Write>(cfg: &RunConfig, args: &SweepArgs, which: Quadrature, hz: bool, out: &mut W) -> Outcome {
    let spec = sweep_spec(cfg, args, hz)?;
    let m = find_min_variance(&spec, which)?;
    let mut t = Table::new(
        out,
        cfg.output,
        &["axis", "quadrature", "coordinate", "value", "grid_coordinate", "grid_value"],
    );
    t.row(vec![
        Cell::Text(format!("{:?}", args.axis)),
        Cell::Text(format!("{which:?}")),
        Cell::Num(m.coordinate),
        Cell::Num(m.value),
        Cell::Num(m.grid_coordinate),
        Cell::Num(m.grid_value),
    ])?;
    Ok(EXIT_OK)
}

fn reproduce<W: Write>(cfg: &RunConfig, id: u32, points: usize, out: &mut W) -> Outcome {
    let cases = figure(id).ok_or_else(|| Error::validation("figure", format!("no figure {id} (2, 3, 4, 5)")))?;
    let mut t = Table::new(
        out,
        cfg.output,
        &[
            "figure",
            "case",
            "expected",
            "minimum",
            "delta0_opt_wm",
            "relative_deviation",
            "tolerance",
            "pass",
        ],
    );
    let mut all_pass = true;
    for case in &cases {
        let o = reproduce_case(case, cfg.coth, points, cfg.tol, cfg.workers)?;
        all_pass &= o.pass;
        t.row(vec![
            Cell::Int(id as usize),
            Cell::Text(case.label()),
            Cell::Num(case.expected_min),
            Cell::Num(o.minimum.value),
            Cell::Num(o.minimum.coordinate / case.params().omega_m),
            Cell::Num(o.relative_deviation),
            Cell::Num(REFERENCE_TOLERANCE),
            Cell::Text(if o.pass { "PASS" } else { "FAIL" }.into()),
        ])?;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_REPRODUCE_FAILED })
}
