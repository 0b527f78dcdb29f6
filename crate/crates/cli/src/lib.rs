//! Command runners behind the `wave-oracle` binary.
//!
//! Every runner returns its machine-readable output and a human summary
//! separately; the binary decides where each goes.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wave_oracle::angle;
use wave_oracle::dataset::{
    load_table, segment_search_tabulated, synthesize_device_table, DatasetError, Noise,
    SegmentGeometry, TabulatedOracle, DEFAULT_VOLTAGE_TOLERANCE,
};
use wave_oracle::oracle::{random_oracle, RandomKind};
use wave_oracle::periodfind::{
    check_factorizable, default_length, factor_step, factorize, find_period, mod_sequence,
    phase_trace_csv, FactorOptions, PeriodError, MAX_MODULUS,
};
use wave_oracle::phasor::{Power, Tolerance};
use wave_oracle::presets;
use wave_oracle::search::{
    binary_superposition_search, brute_force, margin_csv, segment_search, worst_case_margin,
    SearchError, SearchOptions,
};
use wave_oracle::{OracleError, OracleSpec, PhaseAlphabet, SearchResult};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_EXHAUSTED: i32 = 4;

/// Largest `n` accepted by the margin sweep.
pub const MAX_MARGIN_INPUTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VERIFICATION,
            message: message.into(),
        }
    }

    pub fn exhausted(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_EXHAUSTED,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::VerificationFailed { .. } | SearchError::TieAtStep { .. } => {
                CliError::verification(e.to_string())
            }
            SearchError::SpaceTooLarge { .. } => CliError::exhausted(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<PeriodError> for CliError {
    fn from(e: PeriodError) -> Self {
        match e {
            PeriodError::NotConverged { .. }
            | PeriodError::FalseMatch { .. }
            | PeriodError::NotMinimal { .. } => CliError::verification(e.to_string()),
            PeriodError::ExhaustedAttempts(_)
            | PeriodError::OddPeriod(_)
            | PeriodError::TrivialCase { .. } => CliError::exhausted(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wave-oracle", version, about = "Wave-superposition oracle search and period finding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bit-by-bit search on a binary oracle.
    Search(SearchArgs),
    /// Segment subdivision search on a multivalued oracle.
    Multisearch(MultisearchArgs),
    /// Worst-case decision margin over a range of input counts.
    Margin(MarginArgs),
    /// Period finding and the gcd factoring step.
    Factor(FactorArgs),
    /// Segment search over measured voltage tables.
    Dataset(DatasetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Example1,
    Example2,
    #[value(name = "example3-fixture")]
    Example3Fixture,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub emit: Emit,
    /// Write machine-readable output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct OracleSource {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Oracle JSON document.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    /// Seed for a pseudo-random oracle.
    #[arg(long)]
    pub random_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub source: OracleSource,
    /// Input count of a random oracle.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Cross-check against an exhaustive scan (always on for random oracles).
    #[arg(long)]
    pub check_brute_force: bool,
    #[arg(long, default_value_t = Tolerance::DEFAULT.value())]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MultisearchArgs {
    #[command(flatten)]
    pub source: OracleSource,
    /// Input count of a random oracle.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Alphabet size of a random oracle, equally spaced over [0, π/2].
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    /// Detector reference power, replacing the default `n²`.
    #[arg(long)]
    pub p_ref: Option<f64>,
    #[arg(long)]
    pub check_brute_force: bool,
    #[arg(long, default_value_t = Tolerance::DEFAULT.value())]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MarginArgs {
    /// `a..b` or a single value, with 2 ≤ a ≤ b ≤ 10000.
    #[arg(long, value_parser = parse_n_range)]
    pub n: (usize, usize),
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FactorArgs {
    /// Number to factor.
    #[arg(long)]
    pub n: u64,
    /// Fixed base; without it bases are drawn from `--seed`.
    #[arg(long)]
    pub base: Option<u64>,
    /// Sequence length.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub max_attempts: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    #[arg(long, value_enum, conflicts_with_all = ["csv", "emit_synthetic"])]
    pub preset: Option<Preset>,
    /// Table holding the midpoint rows (and the leaves unless `--leaves` is given).
    #[arg(long, conflicts_with = "emit_synthetic")]
    pub csv: Option<PathBuf>,
    #[arg(long, requires = "csv")]
    pub leaves: Option<PathBuf>,
    /// Write a synthetic device table instead of searching.
    #[arg(long, requires = "deltas")]
    pub emit_synthetic: bool,
    /// Shifters in degrees, comma separated.
    #[arg(long, value_parser = parse_degree_list)]
    pub deltas: Option<DegreeList>,
    #[arg(long, requires = "noise_amplitude")]
    pub noise_seed: Option<u64>,
    /// Half-width of the uniform noise band in mV.
    #[arg(long, requires = "noise_seed")]
    pub noise_amplitude: Option<f64>,
    /// Voltage tolerance for co-maxima, in mV.
    #[arg(long, default_value_t = DEFAULT_VOLTAGE_TOLERANCE)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub machine: String,
    pub summary: String,
}

/// Parses `a..b` (inclusive) or `a`.
pub fn parse_n_range(text: &str) -> Result<(usize, usize), String> {
    let text = text.trim();
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (text, text),
    };
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| format!("invalid input count {s:?}: {e}"))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo < 2 || lo > hi || hi > MAX_MARGIN_INPUTS {
        return Err(format!(
            "range must satisfy 2 <= a <= b <= {MAX_MARGIN_INPUTS}, got {lo}..{hi}"
        ));
    }
    Ok((lo, hi))
}

/// Parses a comma-separated list of finite decimal numbers.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Err("empty list".into());
    }
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(format!("{v} is not finite")),
                Err(e) => Err(format!("invalid number {s:?}: {e}")),
            }
        })
        .collect()
}

/// Comma-separated degrees given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeList(pub Vec<f64>);

fn parse_degree_list(text: &str) -> Result<DegreeList, String> {
    parse_number_list(text).map(DegreeList)
}

fn tolerance(value: f64) -> Result<Tolerance, CliError> {
    if value.is_finite() && value >= 0.0 {
        Ok(Tolerance(value))
    } else {
        Err(CliError::validation(format!("tolerance must be finite and non-negative, got {value}")))
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn phases_pi(phases: &[f64]) -> String {
    phases
        .iter()
        .map(|&p| format!("{}π", angle::in_pi(p)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Search(args) => cmd_search(args),
        Command::Multisearch(args) => cmd_multisearch(args),
        Command::Margin(args) => cmd_margin(args),
        Command::Factor(args) => cmd_factor(args),
        Command::Dataset(args) => cmd_dataset(args),
    }
}

/// Loads the oracle; the flag says whether it came from a random seed.
fn resolve_oracle(
    source: &OracleSource,
    random: impl FnOnce(u64) -> Result<OracleSpec, OracleError>,
    preset: impl FnOnce(Preset) -> Result<OracleSpec, CliError>,
) -> Result<(OracleSpec, bool), CliError> {
    if let Some(p) = source.preset {
        return Ok((preset(p)?, false));
    }
    if let Some(path) = &source.oracle {
        return Ok((OracleSpec::from_json(&read(path)?)?, false));
    }
    let seed = source
        .random_seed
        .ok_or_else(|| CliError::validation("one of --preset, --oracle or --random-seed is required"))?;
    Ok((random(seed)?, true))
}

/// Runs the exhaustive cross-check. `forced` makes an oversized space an error.
fn cross_check(
    oracle: &OracleSpec,
    options: &SearchOptions,
    found: &SearchResult,
    forced: bool,
) -> Result<String, CliError> {
    let fresh = oracle.clone();
    match brute_force(&fresh, options) {
        Ok(slow) => {
            if !slow.co_maxima.contains(&found.solution_indices) {
                return Err(CliError::verification(format!(
                    "exhaustive scan disagrees: maximum at {}",
                    phases_pi(&slow.solution)
                )));
            }
            Ok(format!("brute-force check: agrees ({} queries)\n", slow.queries))
        }
        Err(SearchError::SpaceTooLarge { size, cap }) if !forced => Ok(format!(
            "brute-force check: skipped, {size} combinations exceed the cap of {cap}\n"
        )),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_search(args: &SearchArgs) -> Result<Report, CliError> {
    let options = SearchOptions {
        tolerance: tolerance(args.tolerance)?,
        ..SearchOptions::default()
    };
    let (oracle, random) = resolve_oracle(
        &args.source,
        |seed| random_oracle(args.n, RandomKind::Binary, None, seed),
        |p| match p {
            Preset::Example1 => Ok(presets::example1()),
            other => Err(CliError::validation(format!(
                "preset {other:?} is not a binary oracle; use multisearch or dataset"
            ))),
        },
    )?;
    let result = binary_superposition_search(&oracle, &options)?;
    let mut summary = format!(
        "solution: {}\nqueries: {}\nverified: {}\n",
        phases_pi(&result.solution),
        result.queries,
        result.verified
    );
    if args.check_brute_force || random {
        summary.push_str(&cross_check(&oracle, &options, &result, args.check_brute_force)?);
    }
    let machine = match args.output.emit {
        Emit::Csv => result.trace_csv(),
        Emit::Json => to_json(&result),
    };
    Ok(Report { machine, summary })
}

pub fn cmd_multisearch(args: &MultisearchArgs) -> Result<Report, CliError> {
    let options = SearchOptions {
        tolerance: tolerance(args.tolerance)?,
        ..SearchOptions::default()
    };
    let (mut oracle, random) = resolve_oracle(
        &args.source,
        |seed| {
            let alphabet = PhaseAlphabet::uniform(args.levels, FRAC_PI_2)?;
            random_oracle(args.n, RandomKind::Multivalued, Some(&alphabet), seed)
        },
        |p| match p {
            Preset::Example2 => Ok(presets::example2()),
            other => Err(CliError::validation(format!(
                "preset {other:?} is not a multivalued oracle"
            ))),
        },
    )?;
    if let Some(p) = args.p_ref {
        let p_ref = Power::new(p).map_err(|e| CliError::validation(e.to_string()))?;
        oracle = OracleSpec::from_parts(
            oracle.deltas().to_vec(),
            oracle.sigmas().to_vec(),
            p_ref,
            oracle.alphabet().clone(),
        )?;
    }
    let result = segment_search(&oracle, &options)?;
    let mut summary = format!(
        "solution: {}\nqueries: {}\nverified: {}\n",
        phases_pi(&result.solution),
        result.queries,
        result.verified
    );
    if result.co_maxima.len() > 1 {
        summary.push_str(&format!("co-maxima: {}\n", result.co_maxima.len()));
    }
    if args.check_brute_force || random {
        summary.push_str(&cross_check(&oracle, &options, &result, args.check_brute_force)?);
    }
    let machine = match args.output.emit {
        Emit::Csv => result.trace_csv(),
        Emit::Json => to_json(&result),
    };
    Ok(Report { machine, summary })
}

pub fn cmd_margin(args: &MarginArgs) -> Result<Report, CliError> {
    let (lo, hi) = args.n;
    if lo < 2 || lo > hi || hi > MAX_MARGIN_INPUTS {
        return Err(CliError::validation(format!("bad range {lo}..{hi}")));
    }
    let rows = (lo..=hi)
        .map(|n| worst_case_margin(n).map(|m| (n, m)))
        .collect::<Result<Vec<_>, _>>()?;
    let (last_n, last) = rows[rows.len() - 1];
    let summary = format!("{} rows; margin at n = {last_n}: {last:.6e}\n", rows.len());
    let machine = match args.output.emit {
        Emit::Csv => margin_csv(&rows),
        Emit::Json => {
            let objects: Vec<_> = rows
                .iter()
                .map(|(n, m)| serde_json::json!({ "n": n, "margin": m }))
                .collect();
            to_json(&objects)
        }
    };
    Ok(Report { machine, summary })
}

pub fn cmd_factor(args: &FactorArgs) -> Result<Report, CliError> {
    let tol = tolerance(args.tolerance)?.value();
    if !(4..=MAX_MODULUS).contains(&args.n) {
        return Err(CliError::validation(format!(
            "N must be in [4, {MAX_MODULUS}], got {}",
            args.n
        )));
    }
    if args.k == Some(0) {
        return Err(CliError::validation("--k must be at least 1"));
    }
    let n = args.n;
    let len = args.k.unwrap_or_else(|| default_length(n));

    let Some(base) = args.base else {
        check_factorizable(n)?;
        let options = FactorOptions {
            seed: args.seed,
            max_attempts: args.max_attempts,
            tol,
            len: Some(len),
        };
        let report = factorize(n, &options)?;
        let mut summary = format!(
            "N: {n}\nfactor: {} (cofactor {})\nattempts: {}\n",
            report.factor,
            n / report.factor,
            report.attempts.len()
        );
        let last = report.attempts.last().expect("successful attempt");
        summary.push_str(&format!("base: {}\n", last.base));
        if let Some(p) = &report.period {
            summary.push_str(&format!(
                "period: {}\nconverged phase: {}π\n",
                p.period,
                angle::in_pi(p.converged_phase)
            ));
        }
        let machine = match args.output.emit {
            Emit::Json => to_json(&report),
            Emit::Csv => match &report.period {
                Some(p) => phase_trace_csv(&mod_sequence(n, last.base, len)?, &p.phase_trace),
                None => "k,f_k,phi_k,running_phase,running_amplitude\n".to_string(),
            },
        };
        return Ok(Report { machine, summary });
    };

    let seq = match mod_sequence(n, base, len) {
        Err(PeriodError::NotCoprime { gcd, .. }) => {
            let summary = format!("N: {n}\nbase: {base}\nfactor: {gcd} (shared with the base)\n");
            let machine = match args.output.emit {
                Emit::Json => to_json(&serde_json::json!({ "modulus": n, "base": base, "factor": gcd })),
                Emit::Csv => "k,f_k,phi_k,running_phase,running_amplitude\n".to_string(),
            };
            return Ok(Report { machine, summary });
        }
        other => other?,
    };
    let result = find_period(&seq, tol)?;
    let mut summary = format!(
        "N: {n}\nbase: {base}\nperiod: {}\nconverged phase: {}π\n",
        result.period,
        angle::in_pi(result.converged_phase)
    );
    if let Some(t) = result.terminal_phase {
        summary.push_str(&format!("phase at k = {len}: {}π\n", angle::in_pi(t)));
    }
    let factors = factor_step(n, base, result.period);
    let machine = match args.output.emit {
        Emit::Csv => phase_trace_csv(&seq, &result.phase_trace),
        Emit::Json => to_json(&result),
    };
    match factors {
        Ok(f) => {
            let list = f.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
            summary.push_str(&format!("factors: {list}\n"));
            Ok(Report { machine, summary })
        }
        Err(e) => Err(CliError::exhausted(format!("{summary}{e}"))),
    }
}

fn print_combo(c: &[f64]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn cmd_dataset(args: &DatasetArgs) -> Result<Report, CliError> {
    if args.emit_synthetic {
        let deltas = args
            .deltas
            .as_ref()
            .ok_or_else(|| CliError::validation("--emit-synthetic needs --deltas"))?;
        let noise = match (args.noise_seed, args.noise_amplitude) {
            (Some(seed), Some(amplitude_mv)) => {
                if !(amplitude_mv.is_finite() && amplitude_mv >= 0.0) {
                    return Err(CliError::validation("noise amplitude must be finite and non-negative"));
                }
                Some(Noise { seed, amplitude_mv })
            }
            _ => None,
        };
        let table = synthesize_device_table(&deltas.0, noise)?;
        let summary = format!("synthetic table: {} rows, {} inputs\n", table.len(), table.arity());
        return Ok(Report {
            machine: table.to_csv(),
            summary,
        });
    }
    let tol = tolerance(args.tolerance)?.value();
    let (segments, leaves): (TabulatedOracle, TabulatedOracle) = match (args.preset, &args.csv) {
        (Some(Preset::Example3Fixture), None) => {
            (presets::example3_segment_table(), presets::example3_leaf_table()?)
        }
        (Some(other), None) => {
            return Err(CliError::validation(format!("preset {other:?} has no voltage table")))
        }
        (None, Some(path)) => {
            let segments = load_table(&read(path)?)?;
            let leaves = match &args.leaves {
                Some(p) => load_table(&read(p)?)?,
                None => load_table(&read(path)?)?,
            };
            (segments, leaves)
        }
        _ => return Err(CliError::validation("one of --preset or --csv is required")),
    };
    let report = segment_search_tabulated(&segments, &leaves, &SegmentGeometry::four_phase_degrees(), tol)?;
    let mut summary = String::new();
    for w in &report.winning_segments {
        summary.push_str(&format!("stage-1 winner: ({}) at {} mV\n", print_combo(&w.combination), w.voltage_mv));
    }
    for c in &report.candidates {
        summary.push_str(&format!("maximum: ({}) at {} mV\n", print_combo(&c.combination), c.voltage_mv));
    }
    summary.push_str(&format!(
        "queries: {} ({} + {}) vs {} exhaustive\n",
        report.total_queries, report.segment_queries, report.leaf_queries, report.exhaustive_queries
    ));
    if report.extra_leaf_queries > 0 {
        summary.push_str(&format!("extra leaf queries from ties: {}\n", report.extra_leaf_queries));
    }
    let machine = match args.output.emit {
        Emit::Csv => report.to_csv(),
        Emit::Json => to_json(&report),
    };
    Ok(Report { machine, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ranges() {
        assert_eq!(parse_n_range("2..100"), Ok((2, 100)));
        assert_eq!(parse_n_range("7"), Ok((7, 7)));
        assert_eq!(parse_n_range(" 7..=9 "), Ok((7, 9)));
        assert!(parse_n_range("1..5").is_err());
        assert!(parse_n_range("9..5").is_err());
        assert!(parse_n_range("2..10001").is_err());
        assert!(parse_n_range("a..b").is_err());
        assert!(parse_n_range("").is_err());
    }

    #[test]
    fn number_lists() {
        assert_eq!(parse_number_list("0, 21,21,21,0"), Ok(vec![0.0, 21.0, 21.0, 21.0, 0.0]));
        assert!(parse_number_list("").is_err());
        assert!(parse_number_list("1,,2").is_err());
        assert!(parse_number_list("inf").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(SearchError::NotBinary).code, EXIT_VALIDATION);
        assert_eq!(
            CliError::from(PeriodError::ExhaustedAttempts(3)).code,
            EXIT_EXHAUSTED
        );
        assert_eq!(
            CliError::from(PeriodError::NotConverged { len: 3 }).code,
            EXIT_VERIFICATION
        );
        assert_eq!(CliError::from(PeriodError::EvenModulus(8)).code, EXIT_VALIDATION);
    }

    #[test]
    fn pi_labels() {
        assert_eq!(phases_pi(&[0.0, PI / 2.0]), "0π, 0.5π");
    }
}
