//! Command-line front end: `estimate`, `ci`, `test` and `simulate`.
//!
//! [`run`] takes the argument list and two writers so it can be driven from
//! tests. Errors are reported as a single JSON line on the error writer and
//! mapped to exit codes:
//!
//! | code | meaning                          |
//! |------|----------------------------------|
//! | 0    | success                          |
//! | 2    | usage error / bad parameter      |
//! | 3    | data error (file, CSV, sample)   |
//! | 4    | numeric or calibration failure   |

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bootstrap::BootstrapConfig;
use crate::data::{load_csv, DataError, DataFile};
use crate::error::Error;
use crate::estimators::{plug_in_absolute, plug_in_relative, ustat_absolute, ustat_relative};
use crate::interval::Method;
use crate::jel::jel_test;
use crate::sample::SGiniOrder;
use crate::simulation::{
    coverage_study, true_r_nu, type1_power_study, DistributionSpec, SimReport, StudyConfig,
    StudyKind,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "sgini",
    version,
    about = "S-Gini inequality estimates, intervals, tests and simulations"
)]
pub struct Cli {
    /// Output format (default: table; csv for `simulate`).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for replicate loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Column holding the (positive) values.
    #[arg(long, default_value = "value")]
    pub column: String,

    /// Optional column to split the rows into groups.
    #[arg(long)]
    pub group: Option<String>,

    /// S-Gini order.
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plug-in and U-statistic absolute/relative indices per group.
    Estimate {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Confidence interval for the relative index per group.
    Ci {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "jel")]
        method: Method,
        /// Confidence level.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, env = "SGINI_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        outer_b: usize,
        #[arg(long, default_value_t = 50)]
        inner_b: usize,
    },
    /// JEL test of R = r0 per group.
    Test {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        r0: f64,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Monte-Carlo coverage, type-1 error or power study.
    Simulate {
        /// exp, pareto or lognormal.
        #[arg(long)]
        family: String,
        /// Comma-separated parameters: rate | scale,shape | mu,sigma2.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        params: Vec<f64>,
        #[arg(long, default_value_t = 3.0)]
        nu: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value = "coverage")]
        study: StudyKind,
        #[arg(long, default_value = "jel")]
        method: Method,
        /// Null value for type1/power (type1 defaults to the true value).
        #[arg(long)]
        r0: Option<f64>,
        /// Confidence level for coverage (default 0.95), significance
        /// level otherwise (default 0.05).
        #[arg(long)]
        level: Option<f64>,
        #[arg(long, env = "SGINI_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        outer_b: usize,
        #[arg(long, default_value_t = 50)]
        inner_b: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(DataError),
    Library(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) | CliError::Io(_) => EXIT_DATA,
            CliError::Library(e) => match e {
                Error::ParameterDomain(_) => EXIT_USAGE,
                Error::InvalidSample(_) | Error::InsufficientSample { .. } => EXIT_DATA,
                Error::OracleSize { .. } | Error::Calibration(_) => EXIT_NUMERIC,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_DATA => "data",
            _ => "numeric",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// A float that survives a JSON round trip even when it is not finite
/// (written as the strings `"inf"`, `"-inf"` or `"NaN"`).
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits() || self.0 == other.0
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Num(x)),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "NaN" => Ok(Num(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

impl Num {
    fn cell(self, decimals: Option<usize>) -> String {
        match decimals {
            Some(d) if self.0.is_finite() => format!("{:.*}", d, self.0),
            _ => self.0.to_string(),
        }
    }
}

fn opt_cell(v: Option<Num>, decimals: Option<usize>) -> String {
    v.map(|x| x.cell(decimals)).unwrap_or_else(|| "NA".into())
}

/// One output line of a subcommand.
pub trait Row {
    const HEADER: &'static [&'static str];
    /// Cell text; `decimals` is `Some` for table output, `None` for full precision.
    fn cells(&self, decimals: Option<usize>) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub group: String,
    pub n: usize,
    pub nu: Num,
    pub mean: Num,
    pub plug_in_absolute: Num,
    pub plug_in_relative: Num,
    /// Absent when ν is not an integer or exceeds n.
    pub ustat_absolute: Option<Num>,
    pub ustat_relative: Option<Num>,
}

impl Row for EstimateRow {
    const HEADER: &'static [&'static str] = &[
        "group",
        "n",
        "nu",
        "mean",
        "plug_in_absolute",
        "plug_in_relative",
        "ustat_absolute",
        "ustat_relative",
    ];

    fn cells(&self, d: Option<usize>) -> Vec<String> {
        vec![
            self.group.clone(),
            self.n.to_string(),
            self.nu.0.to_string(),
            self.mean.cell(d),
            self.plug_in_absolute.cell(d),
            self.plug_in_relative.cell(d),
            opt_cell(self.ustat_absolute, d),
            opt_cell(self.ustat_relative, d),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRow {
    pub group: String,
    pub n: usize,
    pub method: Method,
    pub level: Num,
    /// Point the interval was grown from.
    pub estimate: Num,
    pub lower: Num,
    pub upper: Num,
    pub length: Num,
    pub lower_at_hull: bool,
    pub upper_at_hull: bool,
    pub dropped_replicates: usize,
}

impl Row for CiRow {
    const HEADER: &'static [&'static str] = &[
        "group", "n", "method", "level", "estimate", "lower", "upper", "length",
    ];

    fn cells(&self, d: Option<usize>) -> Vec<String> {
        vec![
            self.group.clone(),
            self.n.to_string(),
            self.method.to_string(),
            self.level.0.to_string(),
            self.estimate.cell(d),
            self.lower.cell(d),
            self.upper.cell(d),
            self.length.cell(d),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub group: String,
    pub n: usize,
    pub r0: Num,
    pub level: Num,
    pub statistic: Num,
    pub p_value: Num,
    pub reject: bool,
}

impl TestRow {
    pub fn decision(&self) -> &'static str {
        if self.reject {
            "reject"
        } else {
            "do-not-reject"
        }
    }
}

impl Row for TestRow {
    const HEADER: &'static [&'static str] = &[
        "group",
        "n",
        "r0",
        "level",
        "statistic",
        "p_value",
        "decision",
    ];

    fn cells(&self, d: Option<usize>) -> Vec<String> {
        vec![
            self.group.clone(),
            self.n.to_string(),
            self.r0.0.to_string(),
            self.level.0.to_string(),
            self.statistic.cell(d),
            self.p_value.cell(d),
            self.decision().to_string(),
        ]
    }
}

impl Row for SimReport {
    const HEADER: &'static [&'static str] = &SimReport::CSV_HEADER;

    fn cells(&self, d: Option<usize>) -> Vec<String> {
        let mut cells = self.csv_record().to_vec();
        if let Some(d) = d {
            let fixed =
                |v: Option<f64>| v.map(|x| format!("{x:.d$}")).unwrap_or_else(|| "NA".into());
            cells[6] = fixed(self.coverage);
            cells[7] = fixed(self.avg_length);
            cells[8] = fixed(self.rejection_rate);
        }
        cells
    }
}

/// JSON envelope for every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Output<T> {
    pub command: String,
    pub results: Vec<T>,
}

const TABLE_DECIMALS: usize = 4;

fn render<T: Row + Serialize>(
    command: &str,
    rows: Vec<T>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let envelope = Output {
                command: command.to_string(),
                results: rows,
            };
            let text = serde_json::to_string_pretty(&envelope).map_err(std::io::Error::from)?;
            writeln!(out, "{text}")?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(T::HEADER)?;
            for row in &rows {
                w.write_record(row.cells(None))?;
            }
            w.flush()?;
        }
        Format::Table => {
            let body: Vec<Vec<String>> =
                rows.iter().map(|r| r.cells(Some(TABLE_DECIMALS))).collect();
            let mut widths: Vec<usize> = T::HEADER.iter().map(|h| h.len()).collect();
            for cells in &body {
                for (w, c) in widths.iter_mut().zip(cells) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: Vec<String>| {
                cells
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (c, w))| {
                        if i == 0 {
                            format!("{c:<w$}")
                        } else {
                            format!("{c:>w$}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(
                out,
                "{}",
                line(T::HEADER.iter().map(|h| h.to_string()).collect())
            )?;
            for cells in body {
                writeln!(out, "{}", line(cells))?;
            }
        }
    }
    Ok(())
}

fn load(data: &DataArgs) -> Result<(DataFile, SGiniOrder), CliError> {
    let order = SGiniOrder::new(data.nu)?;
    let file = load_csv(&data.input, &data.column, data.group.as_deref())?;
    Ok((file, order))
}

fn estimate_rows(data: &DataArgs) -> Result<Vec<EstimateRow>, CliError> {
    let (file, order) = load(data)?;
    let ustat_ok = |n: usize| order.as_integer().is_some_and(|k| k <= n);
    file.groups
        .iter()
        .map(|g| {
            let s = &g.sample;
            let (ua, ur) = if ustat_ok(s.len()) {
                (
                    Some(Num(ustat_absolute(s, order)?)),
                    Some(Num(ustat_relative(s, order)?)),
                )
            } else {
                (None, None)
            };
            Ok(EstimateRow {
                group: g.label.clone(),
                n: s.len(),
                nu: Num(order.nu()),
                mean: Num(s.mean()),
                plug_in_absolute: Num(plug_in_absolute(s, order)),
                plug_in_relative: Num(plug_in_relative(s, order)),
                ustat_absolute: ua,
                ustat_relative: ur,
            })
        })
        .collect()
}

fn ci_rows(
    data: &DataArgs,
    method: Method,
    level: f64,
    boot: &BootstrapConfig,
) -> Result<Vec<CiRow>, CliError> {
    let (file, order) = load(data)?;
    file.groups
        .iter()
        .map(|g| {
            let ci = crate::confidence_interval(&g.sample, order, level, method, boot)?;
            Ok(CiRow {
                group: g.label.clone(),
                n: g.sample.len(),
                method,
                level: Num(level),
                estimate: Num(ci.diagnostics.center),
                lower: Num(ci.lower),
                upper: Num(ci.upper),
                length: Num(ci.length()),
                lower_at_hull: ci.diagnostics.lower_at_hull,
                upper_at_hull: ci.diagnostics.upper_at_hull,
                dropped_replicates: ci.diagnostics.dropped_replicates,
            })
        })
        .collect()
}

fn test_rows(data: &DataArgs, r0: f64, level: f64) -> Result<Vec<TestRow>, CliError> {
    let (file, order) = load(data)?;
    file.groups
        .iter()
        .map(|g| {
            let t = jel_test(&g.sample, order, r0, level)?;
            Ok(TestRow {
                group: g.label.clone(),
                n: g.sample.len(),
                r0: Num(r0),
                level: Num(level),
                statistic: Num(t.statistic),
                p_value: Num(t.p_value),
                reject: t.reject,
            })
        })
        .collect()
}

fn execute(command: Command, format: Option<Format>, out: &mut dyn Write) -> Result<(), CliError> {
    let table = format.unwrap_or(Format::Table);
    match command {
        Command::Estimate { data } => render("estimate", estimate_rows(&data)?, table, out),
        Command::Ci {
            data,
            method,
            level,
            seed,
            outer_b,
            inner_b,
        } => {
            let boot = BootstrapConfig::new(outer_b, inner_b, seed);
            render("ci", ci_rows(&data, method, level, &boot)?, table, out)
        }
        Command::Test { data, r0, level } => {
            render("test", test_rows(&data, r0, level)?, table, out)
        }
        Command::Simulate {
            family,
            params,
            nu,
            n,
            reps,
            study,
            method,
            r0,
            level,
            seed,
            outer_b,
            inner_b,
        } => {
            let dist = DistributionSpec::from_parts(&family, &params)?;
            let order = SGiniOrder::new(nu)?;
            let cfg = StudyConfig::new(reps, seed).with_bootstrap(outer_b, inner_b);
            let report = match study {
                StudyKind::Coverage => {
                    coverage_study(&dist, order, n, level.unwrap_or(0.95), method, &cfg)?
                }
                StudyKind::Type1 | StudyKind::Power => {
                    if method != Method::Jel {
                        return Err(CliError::Usage(format!(
                            "{study} studies use the JEL test; --method {method} is not supported"
                        )));
                    }
                    let r0 = match (study, r0) {
                        (_, Some(r0)) => r0,
                        (StudyKind::Type1, None) => true_r_nu(&dist, order)?,
                        _ => return Err(CliError::Usage("power studies need --r0".into())),
                    };
                    type1_power_study(&dist, order, n, r0, level.unwrap_or(0.05), &cfg)?
                }
            };
            render("simulate", vec![report], format.unwrap_or(Format::Csv), out)
        }
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        _ => Ok(f()),
    }
}

fn report_error(err: &mut dyn Write, e: &CliError) -> i32 {
    let line = serde_json::json!({
        "error": e.kind(),
        "exit_code": e.exit_code(),
        "message": e.to_string(),
    });
    let _ = writeln!(err, "{line}");
    e.exit_code()
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let rendered = e.render().to_string();
            let message = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            return report_error(err, &CliError::Usage(message));
        }
    };
    let mut buffer = Vec::new();
    let result = with_threads(cli.threads, || {
        execute(cli.command, cli.format, &mut buffer)
    })
    .and_then(|r| r);
    match result {
        Ok(()) => match out.write_all(&buffer).and_then(|_| out.flush()) {
            Ok(()) => EXIT_OK,
            Err(e) => report_error(err, &CliError::Io(e)),
        },
        Err(e) => report_error(err, &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("sgini").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn num_round_trips_non_finite() {
        for x in [1.5, f64::INFINITY, f64::NEG_INFINITY] {
            let s = serde_json::to_string(&Num(x)).unwrap();
            assert_eq!(serde_json::from_str::<Num>(&s).unwrap(), Num(x));
        }
        let s = serde_json::to_string(&Num(f64::NAN)).unwrap();
        assert!(serde_json::from_str::<Num>(&s).unwrap().0.is_nan());
    }

    #[test]
    fn usage_errors_exit_2_with_one_json_line() {
        let (code, out, err) = run_str(&["ci", "--method", "nope", "--input", "x.csv"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert_eq!(err.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(&err).unwrap();
        assert_eq!(v["error"], "usage");
        let (code, _, _) = run_str(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn missing_file_is_a_data_error() {
        let (code, _, err) = run_str(&["estimate", "--input", "/nonexistent/file.csv"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("\"data\""));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("simulate"));
    }

    #[test]
    fn simulate_needs_r0_for_power() {
        let (code, _, _) = run_str(&[
            "simulate", "--family", "exp", "--params", "1", "--n", "20", "--reps", "5", "--study",
            "power",
        ]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn simulate_csv_row() {
        let (code, out, err) = run_str(&[
            "simulate", "--family", "exp", "--params", "1", "--n", "30", "--reps", "20", "--seed",
            "3",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), SimReport::CSV_HEADER.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "jel");
        assert_eq!(row[1], "exp");
        assert!(lines.next().is_none());
    }
}
