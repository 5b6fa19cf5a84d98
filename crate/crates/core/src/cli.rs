//! Command-line front end behind the `bertrand` binary.
//!
//! Every subcommand shares one flat option set ([`RunConfig`]) that can also
//! be read from a JSON file with `--config`; flags override file values and
//! each subcommand rejects options it does not use. Data go to stdout (or
//! `--output`), errors to stderr as a JSON record. Exit status is 0 on
//! success, 1 for invalid input and 2 for numerical failures.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::{self, Overrides, PresetDefaults, PRESET_NAMES};
use crate::dynamics::{self, angular_momentum, PhasePoint};
use crate::geometry::{
    conformal_factor, profile_at, scalar_curvature, BertrandSpace, Family, RationalExponent, TypeIIParams,
    TypeIParams,
};
use crate::parallel;
use crate::quantum::{self, QuantizationScheme, RadialGrid, Spacing, Spectrum};
use crate::stackel::{residual_sweep, StackelDescriptor};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// All options of every subcommand. Unset fields take the documented
/// defaults; JSON config files use the serde names shown in `--help`.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of these options; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Named preset (see `bertrand catalog`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Type I exponent `p/q`; selects a raw Type I space.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    /// Type II exponent `p/q`; selects a raw Type II space.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// λ; the space uses λ².
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// λ² directly (raw Type II only; may be negative).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_sq: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Type I time-coefficient shift (raw spaces only).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// Type II time-coefficient shift (raw spaces only).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// Kepler–Coulomb coupling A.
    #[arg(long = "A", allow_negative_numbers = true)]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub coupling_a: Option<f64>,
    /// Oscillator coupling B.
    #[arg(long = "B", allow_negative_numbers = true)]
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub coupling_b: Option<f64>,
    /// Potential shift C of the Stäckel transform (duality only).
    #[arg(long = "C", allow_negative_numbers = true)]
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub aux_c: Option<f64>,
    /// Dimension N.
    #[arg(short = 'N', long = "dim")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Write data here instead of stdout.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,

    /// Radii `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    /// Initial position, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    /// Initial momentum, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    /// Energy, or `lo:hi:count` for `apsidal`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<String>,
    /// Squared angular momentum, or `lo:hi:count` for `apsidal`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<String>,
    /// Circular-orbit radii `lo:hi:count` of the default apsidal grid.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<String>,
    /// Energy fractions `lo:hi:count` of the default apsidal grid.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractions: Option<String>,
    /// Integration time.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Integration time in radial periods (default 10).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<f64>,
    /// Integrator tolerance (orbit, closure), closure distance (closure),
    /// agreement tolerance (spectrum, gauge-check) or a uniform degeneracy
    /// tolerance (degeneracy).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Keep every n-th trajectory sample.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `direct`, `lb`, `clb` or `all`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// Scheme whose gaps are compared with the clusters (degeneracy).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<String>,
    /// Angular momentum quantum numbers `lo:hi` (inclusive) or a single value.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    /// Number of levels per `l`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Grid nodes including both ends.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// `uniform` or `log`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_start: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_end: Option<f64>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        RunConfig { config: None, $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Fields of `top` that are set replace those of `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        overlay!(
            self, top, preset, beta, gamma, kappa, lambda, lambda_sq, delta, xi, chi, coupling_a, coupling_b,
            aux_c, dim, hbar, format, output, r, q, p, energy, l2, radii, fractions, t_end, periods, tol,
            stride, samples, seed, scheme, compare, l, k, nodes, spacing, r_start, r_end
        )
    }

    /// Serde names of the fields that are set.
    fn present(&self) -> BTreeSet<String> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m.into_iter().map(|(k, _)| k).collect(),
            _ => BTreeSet::new(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bertrand", version, about = "Bertrand spaces: curvature, orbits, duality and radial spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Catalog,
    Curvature,
    Orbit,
    Apsidal,
    Closure,
    Duality,
    Spectrum,
    GaugeCheck,
    Degeneracy,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the presets and their dual pairs.
    Catalog(RunConfig),
    /// Conformal factor and scalar curvature on a radius grid.
    Curvature(RunConfig),
    /// Integrate a trajectory and report energy and L² drift.
    Orbit(RunConfig),
    /// Apsidal angle over a grid of bounded orbits.
    Apsidal(RunConfig),
    /// Integrate through the rational period and measure the return distance.
    Closure(RunConfig),
    /// Stäckel identity residual over random phase points.
    Duality(RunConfig),
    /// Radial spectra for schemes × l.
    Spectrum(RunConfig),
    /// Direct vs conformal Laplace–Beltrami spectra, eigenfunctions and operators.
    GaugeCheck(RunConfig),
    /// Cross-l eigenvalue clusters.
    Degeneracy(RunConfig),
}

impl Command {
    fn split(self) -> (CommandKind, RunConfig) {
        match self {
            Command::Catalog(c) => (CommandKind::Catalog, c),
            Command::Curvature(c) => (CommandKind::Curvature, c),
            Command::Orbit(c) => (CommandKind::Orbit, c),
            Command::Apsidal(c) => (CommandKind::Apsidal, c),
            Command::Closure(c) => (CommandKind::Closure, c),
            Command::Duality(c) => (CommandKind::Duality, c),
            Command::Spectrum(c) => (CommandKind::Spectrum, c),
            Command::GaugeCheck(c) => (CommandKind::GaugeCheck, c),
            Command::Degeneracy(c) => (CommandKind::Degeneracy, c),
        }
    }
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Catalog => "catalog",
            CommandKind::Curvature => "curvature",
            CommandKind::Orbit => "orbit",
            CommandKind::Apsidal => "apsidal",
            CommandKind::Closure => "closure",
            CommandKind::Duality => "duality",
            CommandKind::Spectrum => "spectrum",
            CommandKind::GaugeCheck => "gauge-check",
            CommandKind::Degeneracy => "degeneracy",
        }
    }

    fn allowed(self) -> Vec<&'static str> {
        const SPACE: [&str; 13] = [
            "preset", "beta", "gamma", "kappa", "lambda", "lambda_sq", "delta", "xi", "chi", "A", "B", "N", "hbar",
        ];
        const GRID: [&str; 6] = ["l", "k", "nodes", "spacing", "r_start", "r_end"];
        let extra: &[&str] = match self {
            CommandKind::Catalog => return vec!["format", "output", "kappa", "lambda", "delta", "A", "B", "N", "hbar"],
            CommandKind::Curvature => &["r"],
            CommandKind::Orbit => &["q", "p", "energy", "l2", "t_end", "periods", "tol", "stride"],
            CommandKind::Apsidal => &["energy", "l2", "radii", "fractions"],
            CommandKind::Closure => &["q", "p", "energy", "l2", "tol"],
            CommandKind::Duality => &["C", "samples", "seed"],
            CommandKind::Spectrum => &["scheme", "tol"],
            CommandKind::GaugeCheck => &["tol"],
            CommandKind::Degeneracy => &["scheme", "compare", "tol"],
        };
        let grid: &[&str] = match self {
            CommandKind::Spectrum | CommandKind::GaugeCheck | CommandKind::Degeneracy => &GRID,
            _ => &[],
        };
        let mut out = vec!["format", "output"];
        out.extend(SPACE);
        out.extend(grid);
        out.extend(extra);
        out
    }
}

/// Failure of a CLI run, with its exit status and error-stream record.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Parse { message: String, line: usize, column: usize },
    Schema { message: String, fields: Vec<String> },
    Invalid(String),
    Numerical(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub fn record(&self) -> Value {
        let (kind, mut body) = match self {
            CliError::Usage(m) => ("UsageError", json!({ "message": m })),
            CliError::Parse { message, line, column } => {
                ("ParseError", json!({ "message": message, "line": line, "column": column }))
            }
            CliError::Schema { message, fields } => ("SchemaError", json!({ "message": message, "fields": fields })),
            CliError::Invalid(m) => ("ValidationError", json!({ "message": m })),
            CliError::Numerical(e) => ("NumericalError", json!({ "message": e.to_string(), "cause": error_name(e) })),
            CliError::Io(m) => ("IoError", json!({ "message": m })),
        };
        body["kind"] = json!(kind);
        json!({ "error": body })
    }
}

fn error_name(e: &Error) -> &'static str {
    match e {
        Error::EmptyDomain(_) => "EmptyDomain",
        Error::DomainViolation { .. } => "DomainViolation",
        Error::InvalidParameter(_) => "InvalidParameter",
        Error::QuadratureFailure(_) => "QuadratureFailure",
        Error::DivisionByZero(_) => "DivisionByZero",
        Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
        Error::NoBoundedOrbit { .. } => "NoBoundedOrbit",
        Error::DegenerateOrbit { .. } => "DegenerateOrbit",
        Error::NotClosedWithinCap { .. } => "NotClosedWithinCap",
        Error::NoCircularOrbit { .. } => "NoCircularOrbit",
        Error::IllConditioned(_) => "IllConditioned",
        Error::ConvergenceFailure(_) => "ConvergenceFailure",
        Error::LengthMismatch(_) => "LengthMismatch",
        Error::UnknownPreset(_) => "UnknownPreset",
        Error::InvalidOverride { .. } => "InvalidOverride",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            // caused by the input rather than by the numerics
            Error::EmptyDomain(_)
            | Error::DomainViolation { .. }
            | Error::InvalidParameter(_)
            | Error::NoBoundedOrbit { .. }
            | Error::DegenerateOrbit { .. }
            | Error::NoCircularOrbit { .. }
            | Error::UnknownPreset(_)
            | Error::InvalidOverride { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Reads and parses a JSON config file.
pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        if let Some(field) = unknown_field(&message) {
            CliError::Schema {
                message,
                fields: vec![field],
            }
        } else {
            CliError::Parse {
                message,
                line: e.line(),
                column: e.column(),
            }
        }
    })
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

/// Rejects options the subcommand does not use.
pub fn validate(kind: CommandKind, cfg: &RunConfig) -> CliResult<()> {
    let allowed = kind.allowed();
    let offending: Vec<String> = cfg.present().into_iter().filter(|f| !allowed.contains(&f.as_str())).collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(CliError::Schema {
            message: format!("options not accepted by `{}`", kind.name()),
            fields: offending,
        })
    }
}

/// Parses `argv`, runs the subcommand, writes its output and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.record());
            return err.exit_code();
        }
    };
    let (kind, flags) = cli.command.split();
    match execute(kind, flags) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.record());
            err.exit_code()
        }
    }
}

fn execute(kind: CommandKind, flags: RunConfig) -> CliResult<()> {
    let cfg = match &flags.config {
        Some(path) => load_config(path)?.overlay(flags),
        None => flags,
    };
    let output = render(kind, &cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, output).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(output.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Validates `cfg` for `kind`, runs it and returns the formatted output.
pub fn render(kind: CommandKind, cfg: &RunConfig) -> CliResult<String> {
    validate(kind, cfg)?;
    let report = match kind {
        CommandKind::Catalog => cmd_catalog(cfg)?,
        CommandKind::Curvature => cmd_curvature(cfg)?,
        CommandKind::Orbit => cmd_orbit(cfg)?,
        CommandKind::Apsidal => cmd_apsidal(cfg)?,
        CommandKind::Closure => cmd_closure(cfg)?,
        CommandKind::Duality => cmd_duality(cfg)?,
        CommandKind::Spectrum => cmd_spectrum(cfg)?,
        CommandKind::GaugeCheck => cmd_gauge_check(cfg)?,
        CommandKind::Degeneracy => cmd_degeneracy(cfg)?,
    };
    Ok(match cfg.format.unwrap_or_default() {
        Format::Csv => report.table.to_csv(),
        Format::Json => {
            let mut doc = report.json;
            doc["command"] = json!(kind.name());
            doc["config"] = serde_json::to_value(cfg).expect("config serializes");
            to_json(&doc)
        }
    })
}

// ---------------------------------------------------------------- output

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Default)]
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> String {
        fn quote(s: &str) -> String {
            if s.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| quote(c)).collect();
        out.push_str(&header.join(","));
        out.push_str("\r\n");
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_number(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => quote(s),
                    Cell::Empty => String::new(),
                })
                .collect();
            let _ = write!(out, "{}\r\n", cells.join(","));
        }
        out
    }
}

struct Report {
    json: Value,
    table: Table,
}

struct Fixed17;

impl serde_json::ser::Formatter for Fixed17 {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    v.serialize(&mut ser).expect("JSON values serialize");
    let mut s = String::from_utf8(buf).expect("serde_json writes UTF-8");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- inputs

/// `lo:hi:count` as `count` evenly spaced values (a single number gives one).
pub fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Invalid(format!("`{s}` is not a number or a lo:hi:count range"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [x] => Ok(vec![x.parse().map_err(|_| bad())?]),
        [lo, hi, n] => {
            let lo: f64 = lo.parse().map_err(|_| bad())?;
            let hi: f64 = hi.parse().map_err(|_| bad())?;
            let n: usize = n.parse().map_err(|_| bad())?;
            if n == 0 || !lo.is_finite() || !hi.is_finite() {
                return Err(bad());
            }
            if n == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
        }
        _ => Err(bad()),
    }
}

/// `lo:hi` (inclusive) or a single value.
pub fn parse_l_range(s: &str) -> CliResult<Vec<u32>> {
    let bad = || CliError::Invalid(format!("`{s}` is not an l value or lo:hi range"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [x] => Ok(vec![x.parse().map_err(|_| bad())?]),
        [lo, hi] => {
            let lo: u32 = lo.parse().map_err(|_| bad())?;
            let hi: u32 = hi.parse().map_err(|_| bad())?;
            if hi < lo {
                return Err(bad());
            }
            Ok((lo..=hi).collect())
        }
        _ => Err(bad()),
    }
}

fn single(s: &Option<String>, name: &str) -> CliResult<Option<f64>> {
    match s {
        None => Ok(None),
        Some(text) => match parse_range(text)?.as_slice() {
            [x] if !text.contains(':') => Ok(Some(*x)),
            _ => Err(CliError::Invalid(format!("`{name}` must be a single number here"))),
        },
    }
}

fn parse_exponent(s: &str) -> CliResult<RationalExponent> {
    RationalExponent::from_str(s).map_err(|e| CliError::Invalid(e.to_string()))
}

fn reject(cfg: &RunConfig, names: &[&str], why: &str) -> CliResult<()> {
    let present = cfg.present();
    let fields: Vec<String> = names.iter().filter(|n| present.contains(**n)).map(|n| n.to_string()).collect();
    if fields.is_empty() {
        Ok(())
    } else {
        Err(CliError::Schema {
            message: why.to_string(),
            fields,
        })
    }
}

/// The space selected by `--preset`, `--beta` or `--gamma`. With `dual`,
/// the coupling of the other family is allowed (it is read by `duality`).
fn resolve_space(cfg: &RunConfig, dual: bool) -> CliResult<(BertrandSpace, Option<String>)> {
    let defaults = PresetDefaults::default();
    let dim = cfg.dim.unwrap_or(defaults.dim);
    let hbar = cfg.hbar.unwrap_or(defaults.hbar);
    let chosen = [cfg.preset.is_some(), cfg.beta.is_some(), cfg.gamma.is_some()];
    match chosen {
        [true, false, false] => {
            reject(cfg, &["lambda_sq", "xi", "chi"], "not available with --preset")?;
            let name = cfg.preset.clone().unwrap_or_default();
            let probe = catalog::preset(&name, &Overrides::default())?;
            let type_i = probe.family.is_type_i();
            let mut o = Overrides {
                kappa: cfg.kappa,
                lambda: cfg.lambda,
                delta: cfg.delta,
                coupling_a: cfg.coupling_a,
                coupling_b: cfg.coupling_b,
                dim: cfg.dim,
                hbar: cfg.hbar,
            };
            // the dual coupling is not a parameter of the space itself
            if dual {
                if type_i {
                    o.coupling_b = None;
                } else {
                    o.coupling_a = None;
                }
            }
            Ok((catalog::preset(&name, &o)?, Some(name)))
        }
        [false, true, false] => {
            let mut fixed = vec!["lambda", "lambda_sq", "delta", "chi"];
            if !dual {
                fixed.push("B");
            }
            reject(cfg, &fixed, "not a Type I parameter")?;
            let params = TypeIParams {
                beta: parse_exponent(cfg.beta.as_deref().unwrap_or_default())?,
                kappa: cfg.kappa.unwrap_or(0.0),
                xi: cfg.xi.unwrap_or(0.0),
                coupling_a: cfg.coupling_a.unwrap_or(defaults.coupling_a),
            };
            Ok((BertrandSpace::with_hbar(dim, Family::TypeI(params), hbar)?, None))
        }
        [false, false, true] => {
            let mut fixed = vec!["kappa", "xi"];
            if !dual {
                fixed.push("A");
            }
            reject(cfg, &fixed, "not a Type II parameter")?;
            if cfg.lambda.is_some() && cfg.lambda_sq.is_some() {
                return Err(CliError::Schema {
                    message: "give either lambda or lambda_sq".into(),
                    fields: vec!["lambda".into(), "lambda_sq".into()],
                });
            }
            let params = TypeIIParams {
                gamma: parse_exponent(cfg.gamma.as_deref().unwrap_or_default())?,
                lambda_sq: cfg.lambda_sq.or(cfg.lambda.map(|l| l * l)).unwrap_or(0.0),
                delta: cfg.delta.unwrap_or(0.0),
                chi: cfg.chi.unwrap_or(0.0),
                coupling_b: cfg.coupling_b.unwrap_or(defaults.coupling_b),
            };
            Ok((BertrandSpace::with_hbar(dim, Family::TypeII(params), hbar)?, None))
        }
        _ => Err(CliError::Invalid(
            "select exactly one space with --preset, --beta or --gamma".into(),
        )),
    }
}

fn space_json(space: &BertrandSpace, preset: &Option<String>) -> CliResult<Value> {
    let d = conformal_factor(space)?.domain();
    Ok(json!({
        "preset": preset,
        "dim": space.dim,
        "hbar": space.hbar,
        "family": space.family,
        "domain": { "lo": d.lo, "hi": if d.hi.is_finite() { json!(d.hi) } else { json!("inf") } },
    }))
}

fn initial_state(cfg: &RunConfig, space: &BertrandSpace) -> CliResult<PhasePoint> {
    let energy = single(&cfg.energy, "energy")?;
    let l2 = single(&cfg.l2, "l2")?;
    match (&cfg.q, &cfg.p, energy, l2) {
        (Some(q), Some(p), None, None) => {
            if q.len() != space.dim || p.len() != space.dim {
                return Err(CliError::Invalid(format!(
                    "q and p need {} components, got {} and {}",
                    space.dim,
                    q.len(),
                    p.len()
                )));
            }
            Ok(PhasePoint::new(q.clone(), p.clone())?)
        }
        (None, None, Some(e), Some(l2)) => Ok(dynamics::pericentre_state(space, e, l2)?),
        _ => Err(CliError::Invalid(
            "give either --q and --p, or --energy and --l2".into(),
        )),
    }
}

fn schemes(s: &str) -> CliResult<Vec<QuantizationScheme>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(QuantizationScheme::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let sch = QuantizationScheme::from_str(part.trim())?;
        if !out.contains(&sch) {
            out.push(sch);
        }
    }
    Ok(out)
}

fn grid_for(cfg: &RunConfig, space: &BertrandSpace) -> CliResult<RadialGrid> {
    let mut grid = RadialGrid::for_space(space, cfg.nodes.unwrap_or(2000))?;
    if let Some(s) = &cfg.spacing {
        grid.spacing = Spacing::from_str(s)?;
    }
    Ok(RadialGrid::new(
        cfg.r_start.unwrap_or(grid.r_start),
        cfg.r_end.unwrap_or(grid.r_end),
        grid.n_nodes,
        grid.spacing,
    )?)
}

/// Spectra for every `(scheme, l)` pair, solved concurrently and returned
/// grouped by scheme in input order.
fn solve_all(
    space: &BertrandSpace,
    schemes: &[QuantizationScheme],
    ls: &[u32],
    grid: &RadialGrid,
    k: usize,
) -> CliResult<Vec<Vec<Spectrum>>> {
    let jobs: Vec<(QuantizationScheme, u32)> =
        schemes.iter().flat_map(|&s| ls.iter().map(move |&l| (s, l))).collect();
    let mut solved = parallel::map(&jobs, |&(s, l)| quantum::spectrum(space, s, l, grid, k)).into_iter();
    let mut out = Vec::new();
    for _ in schemes {
        let mut group = Vec::new();
        for _ in ls {
            group.push(solved.next().expect("one result per job")?);
        }
        out.push(group);
    }
    Ok(out)
}

// ---------------------------------------------------------------- commands

fn cmd_catalog(cfg: &RunConfig) -> CliResult<Report> {
    let base = PresetDefaults::default();
    let defaults = PresetDefaults {
        kappa: cfg.kappa.unwrap_or(base.kappa),
        lambda: cfg.lambda.unwrap_or(base.lambda),
        delta: cfg.delta.unwrap_or(base.delta),
        coupling_a: cfg.coupling_a.unwrap_or(base.coupling_a),
        coupling_b: cfg.coupling_b.unwrap_or(base.coupling_b),
        dim: cfg.dim.unwrap_or(base.dim),
        hbar: cfg.hbar.unwrap_or(base.hbar),
    };
    let mut table = Table::new(&[
        "name",
        "table_ref",
        "family",
        "exponent",
        "kappa [1]",
        "lambda_sq [1]",
        "delta [1]",
        "coupling [1]",
        "domain_lo [length]",
        "domain_hi [length]",
        "description",
    ]);
    let mut presets = Vec::new();
    for name in PRESET_NAMES {
        let p = catalog::describe_with(name, &defaults, &Overrides::default())?;
        let d = conformal_factor(&p.space)?.domain();
        let (family, exponent, kappa, lambda_sq, delta) = match p.space.family {
            Family::TypeI(t) => ("I", t.beta.to_string(), Cell::Num(t.kappa), Cell::Empty, Cell::Empty),
            Family::TypeII(t) => ("II", t.gamma.to_string(), Cell::Empty, Cell::Num(t.lambda_sq), Cell::Num(t.delta)),
        };
        table.push(vec![
            name.into(),
            p.table_ref.into(),
            family.into(),
            exponent.into(),
            kappa,
            lambda_sq,
            delta,
            p.space.family.coupling().into(),
            d.lo.into(),
            d.hi.into(),
            p.description.into(),
        ]);
        presets.push(serde_json::to_value(&p).expect("preset serializes"));
    }
    let pairs = catalog::stackel_pairs_with(&defaults)?;
    Ok(Report {
        json: json!({ "defaults": defaults, "presets": presets, "stackel_pairs": pairs }),
        table,
    })
}

fn cmd_curvature(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, false)?;
    let radii = parse_range(cfg.r.as_deref().unwrap_or("0.1:5:100"))?;
    let mut table = Table::new(&["r [length]", "f [1]", "R [length^-2]", "status"]);
    let mut rows = Vec::new();
    for &r in &radii {
        // radii outside the domain keep their row so the table has one row per requested r
        match profile_at(&space, r) {
            Ok(prof) => {
                let f = prof.f(r);
                let curv = scalar_curvature(&space, r)?;
                table.push(vec![r.into(), f.into(), curv.into(), "ok".into()]);
                rows.push(json!({ "r": r, "f": f, "R": curv, "status": "ok" }));
            }
            Err(Error::DomainViolation { .. }) => {
                table.push(vec![r.into(), Cell::Empty, Cell::Empty, "outside-domain".into()]);
                rows.push(json!({ "r": r, "f": null, "R": null, "status": "outside-domain" }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report {
        json: json!({ "space": space_json(&space, &name)?, "rows": rows }),
        table,
    })
}

fn cmd_orbit(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, false)?;
    let initial = initial_state(cfg, &space)?;
    let tol = cfg.tol.unwrap_or(1e-12);
    let energy = dynamics::hamiltonian(&space, &initial)?;
    let l2 = angular_momentum(&initial).l2;
    let t_end = match (cfg.t_end, cfg.periods) {
        (Some(_), Some(_)) => {
            return Err(CliError::Schema {
                message: "give either t_end or periods".into(),
                fields: vec!["periods".into(), "t_end".into()],
            })
        }
        (Some(t), None) => t,
        (None, p) => p.unwrap_or(10.0) * dynamics::orbit_data(&space, energy, l2)?.radial_period,
    };
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(CliError::Invalid(format!("integration time {t_end} must be positive")));
    }
    let stride = cfg.stride.unwrap_or(1).max(1);
    let traj = dynamics::integrate(&space, &initial, t_end, tol)?;
    let dim = space.dim;
    let mut columns = vec!["t [time]".to_string()];
    columns.extend((0..dim).map(|i| format!("q{i} [length]")));
    columns.extend((0..dim).map(|i| format!("p{i} [momentum]")));
    columns.push("dH/H [1]".into());
    columns.push("dL2/L2 [1]".into());
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    let last = traj.times.len() - 1;
    for i in (0..traj.times.len()).filter(|&i| i % stride == 0 || i == last) {
        let s = &traj.states[i];
        let mut row = vec![Cell::Num(traj.times[i])];
        row.extend(s.q.iter().map(|&x| Cell::Num(x)));
        row.extend(s.p.iter().map(|&x| Cell::Num(x)));
        row.push(traj.energy_drift[i].into());
        row.push(traj.l2_drift[i].into());
        table.push(row);
    }
    let samples: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let num = |c: &Cell| match c {
                Cell::Num(x) => *x,
                _ => f64::NAN,
            };
            json!({
                "t": num(&row[0]),
                "q": row[1..=dim].iter().map(num).collect::<Vec<_>>(),
                "p": row[dim + 1..=2 * dim].iter().map(num).collect::<Vec<_>>(),
                "energy_drift": num(&row[2 * dim + 1]),
                "l2_drift": num(&row[2 * dim + 2]),
            })
        })
        .collect();
    Ok(Report {
        json: json!({
            "space": space_json(&space, &name)?,
            "tolerance": tol,
            "t_end": t_end,
            "energy": energy,
            "l2": l2,
            "max_energy_drift": traj.max_energy_drift(),
            "max_l2_drift": traj.max_l2_drift(),
            "steps": { "accepted": traj.stats.accepted, "rejected": traj.stats.rejected },
            "samples": samples,
        }),
        table,
    })
}

fn cmd_apsidal(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, false)?;
    let pairs: Vec<(f64, f64)> = match (&cfg.energy, &cfg.l2) {
        (Some(e), Some(l)) => {
            reject(cfg, &["radii", "fractions"], "the grid is given by energy and l2")?;
            let es = parse_range(e)?;
            let ls = parse_range(l)?;
            es.iter().flat_map(|&e| ls.iter().map(move |&l| (e, l))).collect()
        }
        (None, None) => dynamics::bounded_orbit_grid(
            &space,
            &parse_range(cfg.radii.as_deref().unwrap_or("0.5:1.5:5"))?,
            &parse_range(cfg.fractions.as_deref().unwrap_or("0.1:0.9:5"))?,
        )?,
        _ => return Err(CliError::Invalid("give both --energy and --l2, or neither".into())),
    };
    let mut table = Table::new(&[
        "E [energy]",
        "L2 [action^2]",
        "r_min [length]",
        "r_max [length]",
        "dphi [rad]",
        "dphi/pi [1]",
        "T_r [time]",
        "status",
    ]);
    let mut rows = Vec::new();
    let results = parallel::map(&pairs, |&(e, l2)| dynamics::orbit_data(&space, e, l2));
    for (&(e, l2), res) in pairs.iter().zip(results) {
        match res {
            Ok(o) => {
                table.push(vec![
                    e.into(),
                    l2.into(),
                    o.r_min.into(),
                    o.r_max.into(),
                    o.apsidal_angle.into(),
                    (o.apsidal_angle / std::f64::consts::PI).into(),
                    o.radial_period.into(),
                    "ok".into(),
                ]);
                rows.push(json!({ "status": "ok", "orbit": o }));
            }
            Err(err) => {
                let mut row = vec![e.into(), l2.into()];
                row.extend(std::iter::repeat_n(Cell::Empty, 5));
                row.push(error_name(&err).into());
                table.push(row);
                rows.push(json!({ "status": error_name(&err), "energy": e, "l2": l2, "message": err.to_string() }));
            }
        }
    }
    Ok(Report {
        json: json!({ "space": space_json(&space, &name)?, "orbits": rows }),
        table,
    })
}

fn cmd_closure(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, false)?;
    let initial = initial_state(cfg, &space)?;
    let tol = cfg.tol.unwrap_or(1e-5);
    let rep = dynamics::closure_check(&space, &initial, tol)?;
    let mut table = Table::new(&[
        "E [energy]",
        "L2 [action^2]",
        "dphi/pi [1]",
        "winding",
        "radial_periods",
        "return_distance [phase]",
        "tolerance [phase]",
        "closed",
    ]);
    table.push(vec![
        rep.orbit.energy.into(),
        rep.orbit.l2.into(),
        (rep.orbit.apsidal_angle / std::f64::consts::PI).into(),
        Cell::Int(rep.winding as i64),
        rep.radial_periods.into(),
        rep.return_distance.into(),
        tol.into(),
        rep.closed.into(),
    ]);
    Ok(Report {
        json: json!({
            "space": space_json(&space, &name)?,
            "tolerance": tol,
            "denominator_cap": dynamics::CLOSURE_DENOMINATOR_CAP,
            "report": rep,
        }),
        table,
    })
}

fn cmd_duality(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, true)?;
    let defaults = PresetDefaults::default();
    let desc = match space.family {
        Family::TypeI(p) => {
            StackelDescriptor::new(p, cfg.coupling_b.unwrap_or(defaults.coupling_b), cfg.aux_c.unwrap_or(0.0))
        }
        Family::TypeII(p) => {
            reject(cfg, &["C"], "C = -2 delta is fixed by the Type II space")?;
            StackelDescriptor::from_type_ii(p, cfg.coupling_a.unwrap_or(defaults.coupling_a))
        }
    };
    let samples = cfg.samples.unwrap_or(1000);
    let seed = cfg.seed.unwrap_or(0);
    let sweep = residual_sweep(&desc, space.dim, samples, seed)?;
    let mut table = Table::new(&[
        "samples",
        "seed",
        "max_abs_residual [1]",
        "mean_abs_residual [1]",
        "worst_r [length]",
    ]);
    table.push(vec![
        sweep.samples.into(),
        Cell::Int(seed as i64),
        sweep.max_abs.into(),
        sweep.mean_abs.into(),
        sweep.worst_radius.into(),
    ]);
    Ok(Report {
        json: json!({
            "space": space_json(&space, &name)?,
            "descriptor": desc,
            "sweep": sweep,
        }),
        table,
    })
}

fn cmd_spectrum(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, false)?;
    let schemes = schemes(cfg.scheme.as_deref().unwrap_or("all"))?;
    let ls = parse_l_range(cfg.l.as_deref().unwrap_or("0"))?;
    let k = cfg.k.unwrap_or(5);
    let grid = grid_for(cfg, &space)?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let solved = solve_all(&space, &schemes, &ls, &grid, k)?;
    let mut table = Table::new(&["scheme", "l", "n", "E [energy]"]);
    let mut blocks = Vec::new();
    for (scheme, group) in schemes.iter().zip(&solved) {
        let mut levels = Vec::new();
        for s in group {
            for (n, &e) in s.eigenvalues.iter().enumerate() {
                table.push(vec![scheme.name().into(), s.l.into(), n.into(), e.into()]);
            }
            levels.push(json!({ "l": s.l, "eigenvalues": s.eigenvalues }));
        }
        blocks.push(json!({ "scheme": scheme, "levels": levels }));
    }
    let find = |sch| schemes.iter().position(|&s| s == sch);
    let gauge = match (
        find(QuantizationScheme::DirectSchrodinger),
        find(QuantizationScheme::ConformalLB),
    ) {
        (Some(d), Some(c)) => {
            let cmps = solved[d]
                .iter()
                .zip(&solved[c])
                .map(|(a, b)| quantum::compare_spectra(a, b, tol))
                .collect::<Result<Vec<_>, _>>()?;
            let worst = cmps.iter().fold(0.0f64, |m, c| m.max(c.max_abs_diff));
            json!({ "tolerance": tol, "max_abs_diff": worst, "passed": worst <= tol })
        }
        _ => Value::Null,
    };
    Ok(Report {
        json: json!({
            "space": space_json(&space, &name)?,
            "grid": grid,
            "boundary": quantum::BoundaryCondition::Dirichlet,
            "k": k,
            "schemes": blocks,
            "direct_vs_conformal": gauge,
        }),
        table,
    })
}

fn cmd_gauge_check(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, false)?;
    let ls = parse_l_range(cfg.l.as_deref().unwrap_or("0:3"))?;
    let k = cfg.k.unwrap_or(5);
    let grid = grid_for(cfg, &space)?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let pair = [QuantizationScheme::DirectSchrodinger, QuantizationScheme::ConformalLB];
    let solved = solve_all(&space, &pair, &ls, &grid, k)?;
    let profile = conformal_factor(&space)?;
    let mut table = Table::new(&[
        "l",
        "n",
        "E_direct [energy]",
        "E_conformal [energy]",
        "abs_diff [energy]",
        "eigenfunction_error [1]",
    ]);
    let mut per_l = Vec::new();
    let mut passed = true;
    for (d, c) in solved[0].iter().zip(&solved[1]) {
        let cmp = quantum::compare_spectra(d, c, tol)?;
        passed &= cmp.passed;
        let mut errs = Vec::new();
        for lv in &cmp.levels {
            let e = quantum::eigenfunction_gauge_error(d, c, &profile, lv.index)?;
            errs.push(e);
            table.push(vec![d.l.into(), lv.index.into(), lv.a.into(), lv.b.into(), lv.abs_diff.into(), e.into()]);
        }
        per_l.push(json!({ "comparison": cmp, "eigenfunction_errors": errs }));
    }
    let refined = grid.refined();
    let mut residuals = Vec::new();
    for &l in &ls {
        let coarse = quantum::operator_gauge_residual(&space, l, &grid, &quantum::interior_bumps(&grid))?;
        let fine = quantum::operator_gauge_residual(&space, l, &refined, &quantum::interior_bumps(&refined))?;
        residuals.push(json!({
            "l": l,
            "residual": coarse,
            "residual_refined": fine,
            "order": (coarse / fine).log2(),
        }));
    }
    Ok(Report {
        json: json!({
            "space": space_json(&space, &name)?,
            "grid": grid,
            "boundary": quantum::BoundaryCondition::Dirichlet,
            "tolerance": tol,
            "passed": passed,
            "levels": per_l,
            "operator_residuals": residuals,
        }),
        table,
    })
}

fn cmd_degeneracy(cfg: &RunConfig) -> CliResult<Report> {
    let (space, name) = resolve_space(cfg, false)?;
    let scheme = QuantizationScheme::from_str(cfg.scheme.as_deref().unwrap_or("direct"))?;
    let compare = cfg.compare.as_deref().map(QuantizationScheme::from_str).transpose()?;
    let ls = parse_l_range(cfg.l.as_deref().unwrap_or("0:3"))?;
    let k = cfg.k.unwrap_or(5);
    let grid = grid_for(cfg, &space)?;
    let mut schemes = vec![scheme];
    schemes.extend(compare);
    let solved = solve_all(&space, &schemes, &ls, &grid, k)?;
    let report = match cfg.tol {
        Some(t) => quantum::degeneracy_report(&solved[0], t),
        None => {
            let coarse_grid = grid.with_nodes(grid.n_nodes.div_ceil(2))?;
            let coarse = solve_all(&space, &[scheme], &ls, &coarse_grid, k)?;
            let tols = quantum::level_tolerances(&solved[0], &coarse[0])?;
            quantum::degeneracy_report_per_level(&solved[0], &tols)?
        }
    };
    let mut table = Table::new(&[
        "cluster",
        "E [energy]",
        "members (n:l)",
        "gap [energy]",
        "tolerance [energy]",
        "compare_gap [energy]",
    ]);
    let mut clusters = Vec::new();
    for (i, c) in report.clusters.iter().enumerate() {
        let members: Vec<(usize, u32)> = c.members.iter().map(|m| (m.n, m.l)).collect();
        let label = members.iter().map(|(n, l)| format!("{n}:{l}")).collect::<Vec<_>>().join(";");
        let other = solved.get(1).and_then(|s| quantum::level_gap(s, &members));
        table.push(vec![
            i.into(),
            c.energy.into(),
            label.into(),
            c.gap.into(),
            c.tolerance.into(),
            other.map_or(Cell::Empty, Cell::Num),
        ]);
        clusters.push(json!({ "cluster": c, "compare_gap": other }));
    }
    Ok(Report {
        json: json!({
            "space": space_json(&space, &name)?,
            "grid": grid,
            "boundary": quantum::BoundaryCondition::Dirichlet,
            "scheme": scheme,
            "compare": compare,
            "uniform_tolerance": report.tolerance,
            "clusters": clusters,
        }),
        table,
    })
}
