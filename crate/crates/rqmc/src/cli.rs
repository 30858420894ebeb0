//! The `rqmc` command line.

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rqmc_core::estimator::Method;
use rqmc_core::integrand::{builtin, BUILTIN_NAMES};
use rqmc_core::net::{
    default_precision, delta_n, is_tms_net, net_points, quality_report, MAX_REPORT_DIMENSION,
};
use rqmc_core::partitions::count_rows;
use rqmc_core::walsh::{gain_table, n_star};
use rqmc_core::GeneratorSet;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::formats::{counts_csv, gain_csv, load_direction_file, load_matrices, study_csv};
use crate::study::{convergence_study, StudyConfig};

/// Largest `N` accepted by `counts`.
pub const MAX_COUNT_N: usize = 5000;

#[derive(Parser, Debug)]
#[command(name = "rqmc", version, about = "Scrambled digital nets: audits, gain tables, counts and convergence runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct GeneratorArgs {
    /// Dimension (default 1, or the number of matrices in --matrices).
    #[arg(long = "s")]
    pub s: Option<usize>,
    /// log2 of the number of points (default 8, or the matrix width).
    #[arg(long = "m")]
    pub m: Option<usize>,
    /// Generator precision in bits.
    #[arg(long = "E")]
    pub precision: Option<usize>,
    /// Joe–Kuo style direction-number file.
    #[arg(long, conflicts_with = "matrices")]
    pub dirs: Option<PathBuf>,
    /// Raw generator matrices, blank-line separated.
    #[arg(long)]
    pub matrices: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Median,
    Mean,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Median => vec![Method::Median],
            MethodArg::Mean => vec![Method::Mean],
            MethodArg::Both => Method::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quality parameters t, t*_u and t_u of a generator set, as JSON.
    NetAudit {
        #[command(flatten)]
        gen: GeneratorArgs,
        /// Failure probability used for the per-subset N* threshold.
        #[arg(long, default_value_t = 0.0625)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact gain probabilities for every k with ‖κ‖₁ up to --ncap, as CSV.
    GainTable {
        #[command(flatten)]
        gen: GeneratorArgs,
        #[arg(long, default_value_t = 0)]
        ncap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact frequency counts by ‖κ‖₁ with their closed-form bounds, as CSV.
    Counts {
        #[arg(long = "s", default_value_t = 1)]
        s: usize,
        /// Largest N in the table.
        #[arg(long, default_value_t = 0)]
        ncap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Median-of-means and mean-of-means errors across m and seeds, as CSV.
    Converge {
        #[arg(long = "s", default_value_t = 1)]
        s: usize,
        /// Inclusive range A..B.
        #[arg(long = "m-range", default_value = "4..14", value_parser = parse_m_range)]
        m_range: RangeInclusive<usize>,
        /// Replicates per batch are 2r-1; defaults to ceil(m²/4) capped at 50.
        #[arg(long = "r")]
        r: Option<usize>,
        /// Master seeds (repeatable); defaults to 1..=20.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long, default_value = "exp")]
        integrand: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long = "E")]
        precision: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_m_range(text: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, found {text:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    if a == 0 || a > b {
        return Err(format!("need 1 <= A <= B, found {a}..{b}"));
    }
    Ok(a..=b)
}

fn generators(args: &GeneratorArgs) -> CliResult<GeneratorSet> {
    if let Some(path) = &args.matrices {
        let g = load_matrices(path)?;
        for (flag, given, actual) in [("--s", args.s, g.s()), ("--m", args.m, g.m()), ("--E", args.precision, g.precision())] {
            if given.is_some_and(|v| v != actual) {
                return Err(CliError::Input(format!(
                    "{flag} {} disagrees with {} ({actual})",
                    given.unwrap_or_default(),
                    path.display()
                )));
            }
        }
        return Ok(g);
    }
    let s = args.s.unwrap_or(1);
    let m = args.m.unwrap_or(8);
    let precision = args.precision.unwrap_or_else(|| default_precision(m));
    match &args.dirs {
        Some(path) => load_direction_file(path, s, m, precision),
        None => Ok(GeneratorSet::sobol(s, m, precision)?),
    }
}

fn generator_config(g: &GeneratorSet, args: &GeneratorArgs) -> Value {
    json!({
        "s": g.s(),
        "m": g.m(),
        "E": g.precision(),
        "dirs": args.dirs.as_ref().map(|p| p.display().to_string()),
        "matrices": args.matrices.as_ref().map(|p| p.display().to_string()),
        "source": g.source().to_string(),
    })
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn with_command(mut config: Value, command: &str) -> Value {
    config["command"] = json!(command);
    config["version"] = json!(env!("CARGO_PKG_VERSION"));
    config
}

/// Nets small enough for a full elementary-interval check.
fn tms_checkable(g: &GeneratorSet) -> bool {
    g.m() <= 14 && g.s() <= 4
}

fn net_audit(gen: &GeneratorArgs, delta: f64, out: Option<&Path>) -> CliResult<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::Input(format!("--delta must lie in (0, 1), found {delta}")));
    }
    let g = generators(gen)?;
    if g.s() > MAX_REPORT_DIMENSION {
        return Err(CliError::Input(format!("net-audit supports s <= {MAX_REPORT_DIMENSION}")));
    }
    let report = quality_report(&g)?;
    let max_star = report.subsets.iter().map(|q| q.t_star).max().unwrap_or(0);
    let tms = tms_checkable(&g).then(|| is_tms_net(&net_points(&g), g.m(), report.t));
    let (s, m) = (g.s(), g.m());
    let subsets: Vec<Value> = report
        .subsets
        .iter()
        .map(|q| {
            let n = (m > q.t_u).then(|| n_star(m, q.subset.len(), q.t_u, q.t_star, delta));
            json!({
                "u": q.subset.to_string(),
                "t_star": q.t_star,
                "t_u": q.t_u,
                "n_star": n,
            })
        })
        .collect();
    let t_star: serde_json::Map<String, Value> = report
        .subsets
        .iter()
        .map(|q| (q.subset.to_string(), json!(q.t_star)))
        .collect();
    let mut config = with_command(generator_config(&g, gen), "net-audit");
    config["delta"] = json!(delta);
    let doc = json!({
        "config": config,
        "s": s,
        "m": m,
        "t": report.t,
        "tms_verified": tms,
        "discrepancy_factor": delta_n(m, report.t, s, f64::INFINITY, 1.0),
        "t_star": t_star,
        "subsets": subsets,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    emit(out, &text)?;
    if report.t != max_star {
        return Err(CliError::Invariant(format!("t = {} but max t*_u = {max_star}", report.t)));
    }
    if tms == Some(false) {
        return Err(CliError::Invariant(format!("points are not a (t,m,s)-net at t = {}", report.t)));
    }
    Ok(())
}

fn gain(gen: &GeneratorArgs, ncap: usize, out: Option<&Path>) -> CliResult<()> {
    let g = generators(gen)?;
    let table = gain_table(&g, ncap)?;
    let mut config = with_command(generator_config(&g, gen), "gain-table");
    config["ncap"] = json!(ncap);
    emit(out, &gain_csv(&table, &config))?;
    match table.violations() {
        0 => Ok(()),
        v => Err(CliError::Invariant(format!("{v} gain probabilities exceed 2^(-m+t+s)"))),
    }
}

fn counts(s: usize, ncap: usize, out: Option<&Path>) -> CliResult<()> {
    if s == 0 {
        return Err(CliError::Input("--s must be at least 1".into()));
    }
    if ncap > MAX_COUNT_N {
        return Err(CliError::Budget(format!("--ncap {ncap} exceeds {MAX_COUNT_N}")));
    }
    let rows = count_rows(s, ncap)?;
    let config = with_command(json!({ "s": s, "ncap": ncap }), "counts");
    emit(out, &counts_csv(&rows, &config))?;
    match rows.iter().find(|r| !r.holds()) {
        None => Ok(()),
        Some(r) => Err(CliError::Invariant(format!("bound fails at s = {s}, N = {}", r.n))),
    }
}

#[allow(clippy::too_many_arguments)]
fn converge(
    s: usize,
    m_range: RangeInclusive<usize>,
    r: Option<usize>,
    seeds: Vec<u64>,
    integrand: &str,
    method: MethodArg,
    precision: Option<usize>,
    out: Option<&Path>,
) -> CliResult<()> {
    let f = builtin(integrand, s).ok_or_else(|| {
        CliError::Input(format!(
            "unknown integrand {integrand:?} for s = {s} (known: {})",
            BUILTIN_NAMES.join(", ")
        ))
    })?;
    let seeds = if seeds.is_empty() { (1..=20).collect() } else { seeds };
    let cfg = StudyConfig {
        m_range: m_range.clone(),
        r,
        seeds,
        methods: method.methods(),
        precision,
    };
    let study = convergence_study(f.as_ref(), &cfg)?;
    let config = with_command(
        json!({
            "s": s,
            "m_range": format!("{}..{}", m_range.start(), m_range.end()),
            "r": r,
            "seeds": cfg.seeds,
            "integrand": integrand,
            "method": cfg.methods.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "E": precision,
        }),
        "converge",
    );
    emit(out, &study_csv(&study, &config))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::NetAudit { gen, delta, out } => net_audit(&gen, delta, out.as_deref()),
        Command::GainTable { gen, ncap, out } => gain(&gen, ncap, out.as_deref()),
        Command::Counts { s, ncap, out } => counts(s, ncap, out.as_deref()),
        Command::Converge {
            s,
            m_range,
            r,
            seeds,
            integrand,
            method,
            precision,
            out,
        } => converge(s, m_range, r, seeds, &integrand, method, precision, out.as_deref()),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rqmc: {e}");
            e.exit_code()
        }
    }
}
