//! The `kspace` command line.
//!
//! Every subcommand produces one table. Tables are written as CSV (header
//! row, 15 significant digits) or as a JSON object holding the config echo,
//! the rows and the library version. `replay` re-runs a JSON config echo.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::checkpoint::{load_ground, load_state, save_ground, save_state, GroundCheckpoint};
use crate::ed::{free_fermion_energy, ground_state, neel_state, xxz_hamiltonian, SolverMethod};
use crate::entropy::validate_alphas;
use crate::error::Error;
use crate::fitkit::{fit_model, luttinger, occupation_points, FitModel};
use crate::mbft::{
    fourier_matrix, max_difference_up_to_phase, momentum_residual, transform, ManyBodyState,
    TransformMethod,
};
use crate::modes::{BlockFamily, Boundary, ModeBlock, MomentumGrid};
use crate::quadratic::{
    block_entropy_quadratic, bogoliubov, collapse_row, positive_half_entropy, single_mode_approx,
    thermo_entropy_per_site, QuadraticModel, ThetaState,
};
use crate::rdm::{
    block_entropy_state, entropy_scan, minimax_entropy, neel_reference, EntropyMethod, MinimaxMode,
};
use crate::workflows::{float_range, xxz_momentum_state, SizeScanRow, SolveOptions, K_FERMI};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for a bad flag, range or output request.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for a violated physics precondition.
pub const EXIT_PRECONDITION: i32 = 3;
/// Exit status for I/O, checkpoint and convergence failures.
pub const EXIT_RUNTIME: i32 = 1;

/// Numeric list given as `start:stop:step`, a comma list, or one value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

/// System sizes given like [`FloatList`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SizeList(pub Vec<usize>);

fn parse_float(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Parses `start:stop:step`, `a,b,c` or a single value.
pub fn parse_float_list(s: &str) -> Result<FloatList, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.len() {
        1 => s
            .split(',')
            .map(parse_float)
            .collect::<Result<Vec<_>, _>>()?,
        3 => {
            let (start, stop, step) = (
                parse_float(parts[0])?,
                parse_float(parts[1])?,
                parse_float(parts[2])?,
            );
            if step <= 0.0 {
                return Err(format!("range step must be > 0, got {step}"));
            }
            if stop < start {
                return Err(format!("empty range {s}: stop is below start"));
            }
            float_range(start, stop, step)
        }
        _ => return Err(format!("`{s}` is not start:stop:step")),
    };
    if values.is_empty() {
        return Err(format!("empty range `{s}`"));
    }
    Ok(FloatList(values))
}

pub fn parse_size_list(s: &str) -> Result<SizeList, String> {
    let parse = |t: &str| -> Result<usize, String> {
        t.trim()
            .parse()
            .map_err(|_| format!("`{t}` is not a non-negative integer"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.len() {
        1 => s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?,
        3 => {
            let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
            if step == 0 {
                return Err("range step must be > 0".into());
            }
            if stop < start {
                return Err(format!("empty range {s}: stop is below start"));
            }
            (start..=stop).step_by(step).collect()
        }
        _ => return Err(format!("`{s}` is not start:stop:step")),
    };
    if values.is_empty() {
        return Err(format!("empty range `{s}`"));
    }
    Ok(SizeList(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Lanczos,
    Dense,
}

impl From<SolverArg> for SolverMethod {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Lanczos => SolverMethod::Lanczos,
            SolverArg::Dense => SolverMethod::Dense,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformArg {
    Givens,
    Determinant,
}

impl From<TransformArg> for TransformMethod {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Givens => TransformMethod::Givens,
            TransformArg::Determinant => TransformMethod::Determinant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum FamilyArg {
    #[value(name = "P")]
    #[serde(rename = "P")]
    Positive,
    #[value(name = "pair")]
    #[serde(rename = "pair")]
    Pair,
    #[value(name = "E")]
    #[serde(rename = "E")]
    Energy,
}

impl From<FamilyArg> for BlockFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Positive => BlockFamily::Positive,
            FamilyArg::Pair => BlockFamily::Pair,
            FamilyArg::Energy => BlockFamily::Energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    #[value(name = "power")]
    Power,
    #[value(name = "exp_offset")]
    ExpOffset,
    #[value(name = "log_correction")]
    LogCorrection,
    #[value(name = "linear")]
    Linear,
}

impl From<ModelArg> for FitModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Power => FitModel::Power,
            ModelArg::ExpOffset => FitModel::ExpOffset,
            ModelArg::LogCorrection => FitModel::LogCorrection,
            ModelArg::Linear => FitModel::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XyTable {
    /// One row per `(N, J, gamma)`: half-block entropy and densities.
    Summary,
    /// One row per positive block `P_n`.
    Blocks,
    /// One row per mode: occupation `v^2` and pair entropy.
    Modes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinimaxArg {
    Exhaustive,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateArg {
    Xxz,
    Neel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct XyScanArgs {
    /// Anisotropy values.
    #[arg(long, value_parser = parse_float_list)]
    pub gamma: FloatList,
    /// Transverse field values.
    #[arg(long = "J", value_parser = parse_float_list, default_value = "0")]
    #[serde(rename = "J")]
    pub field: FloatList,
    /// System sizes (even).
    #[arg(long = "N", value_parser = parse_size_list, default_value = "100")]
    #[serde(rename = "N")]
    pub sizes: SizeList,
    #[arg(long, value_enum, default_value = "summary")]
    pub table: XyTable,
    /// Rényi orders reported next to the von Neumann entropy (blocks table).
    #[arg(long, value_parser = parse_float_list)]
    pub alpha: Option<FloatList>,
    /// Fermi momentum of the block definitions; defaults to pi/2.
    #[arg(long)]
    pub k_fermi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ItfScanArgs {
    /// Transverse field values.
    #[arg(long = "J", value_parser = parse_float_list)]
    #[serde(rename = "J")]
    pub field: FloatList,
    #[arg(long = "N", value_parser = parse_size_list, default_value = "200")]
    #[serde(rename = "N")]
    pub sizes: SizeList,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "lanczos")]
    pub solver: SolverArg,
    /// Residual target of the eigensolver.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct XxzGsArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub sites: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Write the sector vector to this checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MbftArgs {
    #[arg(long = "N", required_unless_present = "ground")]
    #[serde(rename = "N")]
    pub sites: Option<usize>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub delta: f64,
    /// Start from a ground-state checkpoint instead of solving.
    #[arg(long)]
    pub ground: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "givens")]
    pub method: TransformArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Write the momentum-basis state to this file.
    #[arg(long)]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EntropyScanArgs {
    #[arg(long = "N", required_unless_present = "input")]
    #[serde(rename = "N")]
    pub sites: Option<usize>,
    #[arg(long, value_parser = parse_float_list, allow_hyphen_values = true, default_value = "0")]
    pub delta: FloatList,
    /// Block families to scan.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "P,pair,E")]
    pub family: Vec<FamilyArg>,
    #[arg(long, value_parser = parse_float_list)]
    pub alpha: Option<FloatList>,
    /// Momentum-basis state file to scan instead of an XXZ ground state.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Fermi momentum of the block definitions; defaults to pi/2.
    #[arg(long)]
    pub k_fermi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SizeScanArgs {
    #[arg(long = "N", value_parser = parse_size_list, default_value = "8,12,16,20")]
    #[serde(rename = "N")]
    pub sizes: SizeList,
    #[arg(long, value_parser = parse_float_list, allow_hyphen_values = true)]
    pub delta: FloatList,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OccupationsArgs {
    #[arg(long = "N", default_value_t = 16)]
    #[serde(rename = "N")]
    pub sites: usize,
    #[arg(long, value_parser = parse_float_list, allow_hyphen_values = true)]
    pub delta: FloatList,
    /// Fit only points with `|k - k_F|` at or below this value.
    #[arg(long)]
    pub max_distance: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Fermi momentum of the block definitions; defaults to pi/2.
    #[arg(long)]
    pub k_fermi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct NeelCheckArgs {
    #[arg(long = "N", default_value_t = 8)]
    #[serde(rename = "N")]
    pub sites: usize,
    #[arg(long, value_enum, default_value = "givens")]
    pub method: TransformArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MinimaxArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub sites: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "xxz")]
    pub state: StateArg,
    /// Largest block size; defaults to `N/2`.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub search: MinimaxArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "power")]
    pub model: Vec<ModelArg>,
    /// Fit each distinct value of this column separately.
    #[arg(long)]
    pub group: Option<String>,
    /// Use `|x|` as the abscissa.
    #[arg(long)]
    pub abs_x: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Starting parameters, comma separated, in the model's order.
    #[arg(long, value_parser = parse_float_list, allow_hyphen_values = true)]
    pub init: Option<FloatList>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    /// JSON output of an earlier run.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Anisotropy sweep of the XY chain.
    XyScan(XyScanArgs),
    /// Field sweep of the Ising chain, with collapse and single-mode columns.
    ItfScan(ItfScanArgs),
    /// XXZ ground state by exact diagonalization.
    XxzGs(XxzGsArgs),
    /// Many-body Fourier transform of an XXZ ground state.
    Mbft(MbftArgs),
    /// Block entropy profiles of the families P, pair and E.
    EntropyScan(EntropyScanArgs),
    /// `S(P_{N/2})` and `max_n S(E_n)` against N and Delta.
    XxzSizeScan(SizeScanArgs),
    /// Momentum occupations with the Luttinger exponent fit.
    Occupations(OccupationsArgs),
    /// Néel state against its closed-form momentum amplitudes.
    NeelCheck(NeelCheckArgs),
    /// `max_n min_{|B|=n} S(B)` over mode blocks.
    Minimax(MinimaxArgs),
    /// Fit scaling models to two CSV columns.
    Fit(FitArgs),
    /// Re-run the config echo stored in a JSON output.
    #[serde(skip)]
    Replay(ReplayArgs),
}

/// Everything that determines the results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
}

#[derive(Debug, Parser)]
#[command(
    name = "kspace",
    version,
    about = "Momentum-space entanglement of spin chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the `--out` extension, CSV otherwise.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Also write a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    pub emit_plot: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Missing => Value::Null,
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
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

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// `%.15g`: 15 significant digits, trailing zeros removed, exponent form
/// outside `1e-5 <= |x| < 1e15`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..15).contains(&exp) {
        let m = trim_fraction(mantissa);
        return format!("{sign}{m}e{exp}");
    }
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{}", trim_fraction(&body))
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Axes of the emitted plot script, by column name.
struct PlotSpec {
    x: &'static str,
    ys: Vec<&'static str>,
    xlabel: &'static str,
    ylabel: &'static str,
}

struct Output {
    table: Table,
    plot: Option<PlotSpec>,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Precondition(_)
        | Error::Degenerate { .. }
        | Error::Domain(_)
        | Error::SizeLimit(_)
        | Error::BasisMismatch { .. } => EXIT_PRECONDITION,
        Error::NoConvergence { .. } | Error::Format(_) | Error::Io(_) => EXIT_RUNTIME,
    }
}

fn require_even(sizes: &[usize]) -> CliResult<()> {
    match sizes.iter().find(|&&n| n < 2 || n % 2 != 0) {
        Some(n) => {
            Err(Error::Precondition(format!("N must be even and at least 2, got {n}")).into())
        }
        None => Ok(()),
    }
}

fn require_xxz_size(n: usize) -> CliResult<()> {
    if n < 4 || n % 2 != 0 {
        return Err(
            Error::Precondition(format!("XXZ commands need N a multiple of 4, got {n}")).into(),
        );
    }
    if n % 4 == 2 {
        return Err(Error::Degenerate { n }.into());
    }
    Ok(())
}

fn solve_options(s: &SolverArgs, seed: u64) -> SolveOptions {
    SolveOptions {
        method: s.solver.into(),
        tol: s.tol,
        seed,
    }
}

fn alphas_of(a: &Option<FloatList>) -> CliResult<Vec<f64>> {
    let alphas = a.as_ref().map(|l| l.0.clone()).unwrap_or_default();
    validate_alphas(&alphas)?;
    Ok(alphas)
}

fn alpha_columns(alphas: &[f64]) -> Vec<String> {
    alphas
        .iter()
        .map(|a| format!("S_alpha_{}", format_number(*a)))
        .collect()
}

fn k_fermi(k: Option<f64>) -> f64 {
    k.unwrap_or(K_FERMI)
}

fn block_text(block: &[usize]) -> Cell {
    Cell::Text(
        block
            .iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    )
}

fn xy_scan(a: &XyScanArgs) -> CliResult<Output> {
    require_even(&a.sizes.0)?;
    let alphas = alphas_of(&a.alpha)?;
    let mut table;
    let plot;
    match a.table {
        XyTable::Summary => {
            table = Table::new(&[
                "N",
                "J",
                "gamma",
                "S_P_half",
                "s_per_site",
                "s_thermo",
                "n_f",
            ]);
            for &n in &a.sizes.0 {
                let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
                for &j in &a.field.0 {
                    for &g in &a.gamma.0 {
                        let model = QuadraticModel::new(j, g);
                        let s = positive_half_entropy(&model, n)?;
                        let sol = bogoliubov(&model, &grid);
                        table.push(vec![
                            n.into(),
                            j.into(),
                            g.into(),
                            s.into(),
                            (s / n as f64).into(),
                            thermo_entropy_per_site(j, g).into(),
                            sol.n_f.into(),
                        ]);
                    }
                }
            }
            plot = PlotSpec {
                x: "gamma",
                ys: vec!["s_per_site", "s_thermo"],
                xlabel: "gamma",
                ylabel: "S(P_half) / N",
            };
        }
        XyTable::Blocks => {
            let mut cols = vec!["N", "J", "gamma", "n", "x", "S", "n_ln2"];
            let extra = alpha_columns(&alphas);
            cols.extend(extra.iter().map(String::as_str));
            table = Table::new(&cols);
            for &n in &a.sizes.0 {
                let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
                let theta = ThetaState::ground(&grid);
                for &j in &a.field.0 {
                    for &g in &a.gamma.0 {
                        let sol = bogoliubov(&QuadraticModel::new(j, g), &grid);
                        for m in 1..=n / 2 {
                            let block = ModeBlock::positive(&grid, m, k_fermi(a.k_fermi))?;
                            let e = block_entropy_quadratic(&sol, &theta, &block, &alphas)?;
                            let mut row: Vec<Cell> = vec![
                                n.into(),
                                j.into(),
                                g.into(),
                                m.into(),
                                (m as f64 / n as f64).into(),
                                e.vn.into(),
                                (m as f64 * std::f64::consts::LN_2).into(),
                            ];
                            row.extend(e.renyi.iter().map(|(_, s)| Cell::Num(*s)));
                            table.push(row);
                        }
                    }
                }
            }
            plot = PlotSpec {
                x: "x",
                ys: vec!["S", "n_ln2"],
                xlabel: "n / N",
                ylabel: "S(P_n)",
            };
        }
        XyTable::Modes => {
            table = Table::new(&["N", "J", "gamma", "k", "v2", "S_mode"]);
            for &n in &a.sizes.0 {
                let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
                for &j in &a.field.0 {
                    for &g in &a.gamma.0 {
                        let model = QuadraticModel::new(j, g);
                        let sol = bogoliubov(&model, &grid);
                        for idx in 0..grid.len() {
                            let k = grid.momentum(idx);
                            table.push(vec![
                                n.into(),
                                j.into(),
                                g.into(),
                                k.into(),
                                sol.v2[idx].into(),
                                model.mode_entropy(k).into(),
                            ]);
                        }
                    }
                }
            }
            plot = PlotSpec {
                x: "k",
                ys: vec!["v2", "S_mode"],
                xlabel: "k",
                ylabel: "v^2, S",
            };
        }
    }
    Ok(Output {
        table,
        plot: Some(plot),
    })
}

fn itf_scan(a: &ItfScanArgs) -> CliResult<Output> {
    require_even(&a.sizes.0)?;
    let mut table = Table::new(&[
        "N",
        "J",
        "S_P_half",
        "s_per_site",
        "s_singlemode",
        "n_f",
        "J_tilde",
        "s_thermo",
        "s_tilde",
    ]);
    for &n in &a.sizes.0 {
        let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
        for &j in &a.field.0 {
            let model = QuadraticModel::ising(j);
            let s = positive_half_entropy(&model, n)?;
            let collapse = collapse_row(n, j)?;
            table.push(vec![
                n.into(),
                j.into(),
                s.into(),
                collapse.s_n.into(),
                (single_mode_approx(j, n)? / n as f64).into(),
                bogoliubov(&model, &grid).n_f.into(),
                collapse.scaled_field.into(),
                (collapse.s_n - collapse.s_tilde).into(),
                collapse.s_tilde.into(),
            ]);
        }
    }
    Ok(Output {
        table,
        plot: Some(PlotSpec {
            x: "J",
            ys: vec!["s_per_site", "s_singlemode", "s_thermo"],
            xlabel: "J",
            ylabel: "S(P_half) / N",
        }),
    })
}

fn xxz_gs(a: &XxzGsArgs, seed: u64) -> CliResult<Output> {
    require_xxz_size(a.sites)?;
    let h = xxz_hamiltonian(a.sites, a.delta)?;
    let gs = ground_state(&h, a.solver.solver.into(), a.solver.tol, seed)?;
    if let Some(path) = &a.checkpoint {
        save_ground(path, &GroundCheckpoint::from(&gs))?;
    }
    let mut table = Table::new(&[
        "N",
        "delta",
        "dim",
        "energy",
        "energy_free",
        "residual",
        "gap",
        "low_gap",
        "iterations",
    ]);
    let free = (a.delta == 0.0)
        .then(|| free_fermion_energy(a.sites))
        .transpose()?;
    table.push(vec![
        a.sites.into(),
        a.delta.into(),
        gs.vector.len().into(),
        gs.energy.into(),
        free.into(),
        gs.residual.into(),
        gs.gap.into(),
        gs.low_gap.into(),
        gs.iterations.into(),
    ]);
    Ok(Output { table, plot: None })
}

fn mbft(a: &MbftArgs, seed: u64) -> CliResult<Output> {
    let (position, delta) = match &a.ground {
        Some(path) => {
            let ck = load_ground(path)?;
            require_xxz_size(ck.sites)?;
            (ck.to_state()?, ck.delta)
        }
        None => {
            let n = a.sites.expect("clap requires N without a checkpoint");
            require_xxz_size(n)?;
            let h = xxz_hamiltonian(n, a.delta)?;
            let gs = ground_state(&h, a.solver.solver.into(), a.solver.tol, seed)?;
            (gs.to_state()?, a.delta)
        }
    };
    let n = position.sites();
    let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
    let state = transform(&position, &fourier_matrix(&grid), a.method.into())?;
    if let Some(path) = &a.save {
        save_state(path, &state, delta)?;
    }
    let occ = state.occupations();
    let particles: f64 = occ.iter().sum();
    let mut table = Table::new(&[
        "N",
        "delta",
        "method",
        "norm",
        "momentum_residual",
        "particles",
    ]);
    table.push(vec![
        n.into(),
        delta.into(),
        format!("{:?}", a.method).to_lowercase().as_str().into(),
        state.norm().into(),
        momentum_residual(&state)?.into(),
        particles.into(),
    ]);
    Ok(Output { table, plot: None })
}

fn entropy_scan_cmd(a: &EntropyScanArgs, seed: u64) -> CliResult<Output> {
    let alphas = alphas_of(&a.alpha)?;
    let mut cols = vec![
        "N",
        "delta",
        "family",
        "parameter",
        "size",
        "S",
        "schmidt_count",
        "block",
    ];
    let extra = alpha_columns(&alphas);
    cols.extend(extra.iter().map(String::as_str));
    let mut table = Table::new(&cols);
    let states: Vec<(ManyBodyState, f64)> = match &a.input {
        Some(path) => vec![load_state(path)?],
        None => {
            let n = a.sites.expect("clap requires N without an input state");
            require_xxz_size(n)?;
            let opts = solve_options(&a.solver, seed);
            a.delta
                .0
                .iter()
                .map(|&d| Ok((xxz_momentum_state(n, d, &opts)?.state, d)))
                .collect::<CliResult<_>>()?
        }
    };
    for (state, delta) in &states {
        for &family in &a.family {
            let profile = entropy_scan(state, family.into(), k_fermi(a.k_fermi), &alphas)?;
            for p in &profile.points {
                let mut row: Vec<Cell> = vec![
                    state.sites().into(),
                    Cell::from(*delta),
                    profile.family.as_str().into(),
                    p.parameter.into(),
                    p.block.len().into(),
                    p.entropy.vn.into(),
                    Cell::Int(p.entropy.schmidt_count as i64),
                    block_text(&p.block),
                ];
                row.extend(p.entropy.renyi.iter().map(|(_, s)| Cell::Num(*s)));
                table.push(row);
            }
        }
    }
    Ok(Output {
        table,
        plot: Some(PlotSpec {
            x: "parameter",
            ys: vec!["S"],
            xlabel: "n or k",
            ylabel: "S",
        }),
    })
}

fn size_scan_cmd(a: &SizeScanArgs, seed: u64) -> CliResult<Output> {
    for &n in &a.sizes.0 {
        require_xxz_size(n)?;
    }
    let rows: Vec<SizeScanRow> =
        crate::workflows::size_scan(&a.sizes.0, &a.delta.0, &solve_options(&a.solver, seed))?;
    let mut table = Table::new(&[
        "N", "delta", "energy", "S_P_half", "S_max", "n_at_max", "low_gap",
    ]);
    for r in rows {
        table.push(vec![
            r.n.into(),
            r.delta.into(),
            r.energy.into(),
            r.s_p_half.into(),
            r.s_max.into(),
            r.n_at_max.into(),
            r.low_gap.into(),
        ]);
    }
    Ok(Output {
        table,
        plot: Some(PlotSpec {
            x: "N",
            ys: vec!["S_P_half", "S_max"],
            xlabel: "N",
            ylabel: "S",
        }),
    })
}

fn occupations_cmd(a: &OccupationsArgs, seed: u64) -> CliResult<Output> {
    require_xxz_size(a.sites)?;
    let opts = solve_options(&a.solver, seed);
    let mut table = Table::new(&["N", "delta", "k", "n_k", "alpha_fit", "alpha_theory"]);
    for &d in &a.delta.0 {
        let xs = xxz_momentum_state(a.sites, d, &opts)?;
        let occ = xs.state.occupations();
        let mut pts = occupation_points(&xs.grid, &occ, k_fermi(a.k_fermi))?;
        if let Some(m) = a.max_distance {
            pts.retain(|p| p.0 <= m);
        }
        let fit = fit_model(&pts, FitModel::Power, None)?;
        let alpha = fit.param("b");
        let theory = luttinger(d).ok().map(|l| l.alpha);
        for (j, &n_k) in occ.iter().enumerate() {
            table.push(vec![
                a.sites.into(),
                d.into(),
                xs.grid.momentum(j).into(),
                n_k.into(),
                alpha.into(),
                theory.into(),
            ]);
        }
    }
    Ok(Output {
        table,
        plot: Some(PlotSpec {
            x: "k",
            ys: vec!["n_k"],
            xlabel: "k",
            ylabel: "n_k",
        }),
    })
}

fn neel_check(a: &NeelCheckArgs) -> CliResult<Output> {
    require_xxz_size(a.sites)?;
    let n = a.sites;
    let reference = neel_reference(n)?;
    let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
    let state = transform(&neel_state(n)?, &fourier_matrix(&grid), a.method.into())?;
    let mut table = Table::new(&["quantity", "block", "measured", "predicted", "deviation"]);
    let mut push = |q: &str, block: Cell, measured: f64, predicted: f64| {
        table.push(vec![
            q.into(),
            block,
            measured.into(),
            predicted.into(),
            (measured - predicted).abs().into(),
        ]);
    };
    let mismatch = max_difference_up_to_phase(state.amplitudes(), &reference.amplitudes);
    push("amplitude_mismatch", Cell::Missing, mismatch, 0.0);
    let nonzero = state
        .amplitudes()
        .iter()
        .filter(|c| c.norm() > 1e-12)
        .count();
    push(
        "nonzero_amplitudes",
        Cell::Missing,
        nonzero as f64,
        reference.nonzero as f64,
    );
    for j in grid.positive_indices() {
        let block = ModeBlock::pair_at(&grid, j)?;
        let s = block_entropy_state(&state, &block, &[], EntropyMethod::Schmidt)?.vn;
        push("S_pair", block_text(block.indices()), s, reference.pair);
    }
    for m in 1..n {
        let block = ModeBlock::energy(&grid, m, K_FERMI)?;
        let s = block_entropy_state(&state, &block, &[], EntropyMethod::Schmidt)?.vn;
        push("S_E", block_text(block.indices()), s, reference.energy);
    }
    for &(m, predicted) in &reference.positive {
        let block = ModeBlock::positive(&grid, m, K_FERMI)?;
        let s = block_entropy_state(&state, &block, &[], EntropyMethod::Schmidt)?.vn;
        push("S_P", block_text(block.indices()), s, predicted);
    }
    Ok(Output { table, plot: None })
}

fn minimax_cmd(a: &MinimaxArgs, seed: u64) -> CliResult<Output> {
    require_xxz_size(a.sites)?;
    let state = match a.state {
        StateArg::Xxz => {
            xxz_momentum_state(a.sites, a.delta, &solve_options(&a.solver, seed))?.state
        }
        StateArg::Neel => {
            let grid = MomentumGrid::new(a.sites, Boundary::Antiperiodic)?;
            transform(
                &neel_state(a.sites)?,
                &fourier_matrix(&grid),
                TransformMethod::Givens,
            )?
        }
    };
    let mode = match a.search {
        MinimaxArg::Exhaustive => MinimaxMode::Exhaustive,
        MinimaxArg::Heuristic => MinimaxMode::Heuristic { seed },
    };
    let result = minimax_entropy(&state, a.n_max.unwrap_or(a.sites / 2), mode)?;
    let mut table = Table::new(&["N", "size", "S_min", "block", "is_max", "heuristic"]);
    for m in &result.per_size {
        table.push(vec![
            a.sites.into(),
            m.size.into(),
            m.entropy.into(),
            block_text(&m.block),
            (m.size == result.size).into(),
            result.heuristic.into(),
        ]);
    }
    Ok(Output {
        table,
        plot: Some(PlotSpec {
            x: "size",
            ys: vec!["S_min"],
            xlabel: "block size",
            ylabel: "min S",
        }),
    })
}

fn fit_cmd(a: &FitArgs) -> CliResult<Output> {
    let mut reader = csv::Reader::from_path(&a.input)
        .map_err(|e| Error::Format(format!("{}: {e}", a.input.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    let column = |name: &str| -> CliResult<usize> {
        match headers.iter().position(|h| h == name) {
            Some(i) => Ok(i),
            None => usage(format!("column `{name}` not in {}", a.input.display())),
        }
    };
    let xi = column(&a.x)?;
    let yi = column(&a.y)?;
    let gi = a.group.as_deref().map(column).transpose()?;
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        let num = |i: usize| -> CliResult<f64> {
            record[i].trim().parse().map_err(|_| {
                CliError::Lib(Error::Format(format!("`{}` is not a number", &record[i])))
            })
        };
        let mut x = num(xi)?;
        if a.abs_x {
            x = x.abs();
        }
        if a.x_min.is_some_and(|m| x < m) || a.x_max.is_some_and(|m| x > m) {
            continue;
        }
        let y = num(yi)?;
        let key = gi.map(|i| record[i].to_string()).unwrap_or_default();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((x, y)),
            None => groups.push((key, vec![(x, y)])),
        }
    }
    if groups.is_empty() {
        return usage("no data points left after filtering");
    }
    let mut table = Table::new(&[
        "group",
        "model",
        "param",
        "value",
        "rss",
        "r_squared",
        "converged",
        "iterations",
        "points",
    ]);
    for (key, pts) in &groups {
        for &m in &a.model {
            let init = a.init.as_ref().map(|l| l.0.as_slice());
            let r = fit_model(pts, m.into(), init)?;
            for (name, value) in &r.params {
                table.push(vec![
                    key.as_str().into(),
                    r.model.as_str().into(),
                    name.as_str().into(),
                    (*value).into(),
                    r.rss.into(),
                    r.r_squared.into(),
                    r.converged.into(),
                    r.iterations.into(),
                    pts.len().into(),
                ]);
            }
        }
    }
    Ok(Output { table, plot: None })
}

fn execute(config: &RunConfig) -> CliResult<Output> {
    let seed = config.seed;
    match &config.command {
        Command::XyScan(a) => xy_scan(a),
        Command::ItfScan(a) => itf_scan(a),
        Command::XxzGs(a) => xxz_gs(a, seed),
        Command::Mbft(a) => mbft(a, seed),
        Command::EntropyScan(a) => entropy_scan_cmd(a, seed),
        Command::XxzSizeScan(a) => size_scan_cmd(a, seed),
        Command::Occupations(a) => occupations_cmd(a, seed),
        Command::NeelCheck(a) => neel_check(a),
        Command::Minimax(a) => minimax_cmd(a, seed),
        Command::Fit(a) => fit_cmd(a),
        Command::Replay(_) => usage("replay configs cannot be nested"),
    }
}

fn gnuplot_script(data: &Path, spec: &PlotSpec) -> String {
    let file = data
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let image = data.with_extension("png");
    let image = image
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo\n");
    s.push_str(&format!("set output '{image}'\n"));
    s.push_str(&format!("set xlabel '{}'\n", spec.xlabel));
    s.push_str(&format!("set ylabel '{}'\n", spec.ylabel));
    let curves: Vec<String> = spec
        .ys
        .iter()
        .map(|y| format!("'{file}' using '{}':'{y}' with points title '{y}'", spec.x))
        .collect();
    s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    s
}

/// Renders one run as CSV or JSON text.
fn render(config: &RunConfig, out: &Output, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(out.table.to_csv()),
        Format::Json => {
            let config_value = serde_json::to_value(config)
                .map_err(|e| CliError::Usage(format!("config cannot be echoed: {e}")))?;
            let doc = json!({
                "version": VERSION,
                "config": config_value,
                "results": out.table.json_rows(),
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable document");
            text.push('\n');
            Ok(text)
        }
    }
}

fn load_replay(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(Error::from)?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let config = doc.get("config").cloned().unwrap_or(doc);
    serde_json::from_value(config)
        .map_err(|e| CliError::Usage(format!("{}: not a config echo: {e}", path.display())))
}

fn run_cli(cli: Cli) -> CliResult<()> {
    if cli.threads == 0 {
        return usage("--threads must be at least 1");
    }
    let config = match cli.command {
        Command::Replay(r) => load_replay(&r.config)?,
        command => RunConfig {
            command,
            seed: cli.seed,
        },
    };
    let format = cli.format.unwrap_or(match &cli.out {
        Some(p)
            if p.extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("json")) =>
        {
            Format::Json
        }
        _ => Format::Csv,
    });
    if cli.emit_plot && (format != Format::Csv || cli.out.is_none()) {
        return usage("--emit-plot needs CSV output written with --out");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let out = pool.install(|| execute(&config))?;
    let plot_text = match (&out.plot, cli.emit_plot, &cli.out) {
        (Some(spec), true, Some(path)) => Some(gnuplot_script(path, spec)),
        (None, true, _) => return usage("this command has no plot"),
        _ => None,
    };
    let text = render(&config, &out, format)?;
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(Error::from)?;
            if let Some(script) = plot_text {
                fs::write(path.with_extension("gp"), script).map_err(Error::from)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = Cli::command().error(ErrorKind::InvalidValue, msg).print();
            EXIT_USAGE
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Column names of each subcommand's CSV output, keyed by subcommand.
pub fn schemas() -> BTreeMap<&'static str, Vec<&'static str>> {
    BTreeMap::from([
        (
            "xy-scan summary",
            vec![
                "N",
                "J",
                "gamma",
                "S_P_half",
                "s_per_site",
                "s_thermo",
                "n_f",
            ],
        ),
        (
            "xy-scan blocks",
            vec!["N", "J", "gamma", "n", "x", "S", "n_ln2", "S_alpha_*"],
        ),
        (
            "xy-scan modes",
            vec!["N", "J", "gamma", "k", "v2", "S_mode"],
        ),
        (
            "itf-scan",
            vec![
                "N",
                "J",
                "S_P_half",
                "s_per_site",
                "s_singlemode",
                "n_f",
                "J_tilde",
                "s_thermo",
                "s_tilde",
            ],
        ),
        (
            "xxz-gs",
            vec![
                "N",
                "delta",
                "dim",
                "energy",
                "energy_free",
                "residual",
                "gap",
                "low_gap",
                "iterations",
            ],
        ),
        (
            "mbft",
            vec![
                "N",
                "delta",
                "method",
                "norm",
                "momentum_residual",
                "particles",
            ],
        ),
        (
            "entropy-scan",
            vec![
                "N",
                "delta",
                "family",
                "parameter",
                "size",
                "S",
                "schmidt_count",
                "block",
                "S_alpha_*",
            ],
        ),
        (
            "xxz-size-scan",
            vec![
                "N", "delta", "energy", "S_P_half", "S_max", "n_at_max", "low_gap",
            ],
        ),
        (
            "occupations",
            vec!["N", "delta", "k", "n_k", "alpha_fit", "alpha_theory"],
        ),
        (
            "neel-check",
            vec!["quantity", "block", "measured", "predicted", "deviation"],
        ),
        (
            "minimax",
            vec!["N", "size", "S_min", "block", "is_max", "heuristic"],
        ),
        (
            "fit",
            vec![
                "group",
                "model",
                "param",
                "value",
                "rss",
                "r_squared",
                "converged",
                "iterations",
                "points",
            ],
        ),
    ])
}
