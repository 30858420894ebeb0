//! Text inputs and CSV/JSON outputs.

use std::fmt::Write as _;
use std::path::Path;

use rqmc_core::net::{build_generators, DirectionNumberRecord, GeneratorSource};
use rqmc_core::partitions::CountRow;
use rqmc_core::walsh::GainTable;
use rqmc_core::{BitMatrix, GeneratorSet};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::study::{Study, StudyRow};

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A parsed direction-number record and the line it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberedRecord {
    pub line: usize,
    pub record: DirectionNumberRecord,
}

/// Parses a Joe–Kuo style table: `d s a m_1 .. m_s` per line. A header line
/// starting with a non-numeric token, blank lines and `#` comments are
/// skipped. Errors carry a one-based line number.
pub fn parse_direction_numbers(text: &str) -> Result<Vec<NumberedRecord>, (usize, String)> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens[0].parse::<u64>().is_err() {
            if out.is_empty() {
                continue;
            }
            return Err((line, format!("expected an integer, found {:?}", tokens[0])));
        }
        let nums = tokens
            .iter()
            .map(|t| t.parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| (line, format!("bad integer: {e}")))?;
        if nums.len() < 4 {
            return Err((line, "need at least d, s, a and one m_i".into()));
        }
        let (d, deg, a) = (nums[0] as usize, nums[1] as usize, nums[2]);
        let record = DirectionNumberRecord::new(d, deg, a, nums[3..].to_vec())
            .map_err(|e| (line, e.to_string()))?;
        if let Some(prev) = out.last().map(|r: &NumberedRecord| r.record.dimension) {
            if d <= prev {
                return Err((line, format!("dimension {d} follows {prev}; dimensions must ascend")));
            }
        }
        out.push(NumberedRecord { line, record });
    }
    Ok(out)
}

/// Sobol' generators for dimensions `1..=s` from a direction-number file.
pub fn load_direction_file(path: &Path, s: usize, m: usize, precision: usize) -> CliResult<GeneratorSet> {
    let text = read(path)?;
    let records = parse_direction_numbers(&text).map_err(|(line, message)| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })?;
    let used: Vec<&NumberedRecord> = records
        .iter()
        .filter(|r| (2..=s).contains(&r.record.dimension))
        .collect();
    let first_line = used.iter().map(|r| r.line).min().unwrap_or(0);
    let last_line = used.iter().map(|r| r.line).max().unwrap_or(0);
    let plain: Vec<DirectionNumberRecord> = records.into_iter().map(|r| r.record).collect();
    let source = GeneratorSource::DirectionFile {
        path: path.display().to_string(),
        first_line,
        last_line,
    };
    Ok(build_generators(&plain, s, m, precision, source)?)
}

/// Raw generator matrices: rows of `0`/`1`, matrices separated by blank
/// lines, `#` comments ignored. Every matrix is `precision x m`.
pub fn parse_matrices(text: &str) -> Result<Vec<BitMatrix>, (usize, String)> {
    let mut out = Vec::new();
    let mut block = String::new();
    let mut block_start = 0;
    let flush = |block: &mut String, start: usize, out: &mut Vec<BitMatrix>| {
        if block.is_empty() {
            return Ok(());
        }
        let mat = block
            .parse::<BitMatrix>()
            .map_err(|e| (start, e.to_string()))?;
        out.push(mat);
        block.clear();
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            flush(&mut block, block_start, &mut out)?;
            continue;
        }
        if block.is_empty() {
            block_start = idx + 1;
        }
        block.push_str(body);
        block.push('\n');
    }
    flush(&mut block, block_start, &mut out)?;
    if out.is_empty() {
        return Err((1, "no matrices found".into()));
    }
    Ok(out)
}

pub fn load_matrices(path: &Path) -> CliResult<GeneratorSet> {
    let text = read(path)?;
    let matrices = parse_matrices(&text).map_err(|(line, message)| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })?;
    Ok(GeneratorSet::from_matrices(
        matrices,
        GeneratorSource::Matrices(path.display().to_string()),
    )?)
}

fn config_line(config: &Value) -> String {
    format!("# config: {config}\n")
}

/// `k1..ks, norm1, probability, cap, within_cap`, with a trailing
/// violation count.
pub fn gain_csv(table: &GainTable, config: &Value) -> String {
    let mut out = config_line(config);
    let _ = writeln!(out, "# source: {}", table.source);
    let _ = writeln!(out, "# t: {}", table.t);
    let cap = match table.cap_exponent() {
        e if e <= 0 => "1".to_string(),
        e => format!("2^-{e}"),
    };
    let header: Vec<String> = (1..=table.s).map(|j| format!("k{j}")).collect();
    let _ = writeln!(out, "{},norm1,probability,cap,within_cap", header.join(","));
    for e in &table.entries {
        let ks: Vec<String> = e.k.k().iter().map(u64::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            ks.join(","),
            e.k.norm1(),
            e.probability,
            cap,
            e.within_cap
        );
    }
    let _ = writeln!(out, "# violations: {}", table.violations());
    out
}

/// `s, N, count, bound_thm6, bound_cor5`.
pub fn counts_csv(rows: &[CountRow], config: &Value) -> String {
    let mut out = config_line(config);
    out.push_str("s,N,count,bound_thm6,bound_cor5\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:e},{:e}", r.s, r.n, r.count, r.bound_thm6, r.bound_cor5);
    }
    out
}

fn study_row(out: &mut String, r: &StudyRow) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{:e},{:e}",
        r.integrand, r.s, r.m, r.n, r.method, r.r, r.seed, r.estimate, r.abs_error
    );
}

/// One row per `(m, method, seed)`, then a `#` summary of per-`m` median
/// errors and local rates.
pub fn study_csv(study: &Study, config: &Value) -> String {
    let mut out = config_line(config);
    out.push_str("integrand,s,m,n,method,r,seed,estimate,abs_error\n");
    for r in &study.rows {
        study_row(&mut out, r);
    }
    out.push_str("# summary: method,m,median_abs_error,rate\n");
    for p in &study.summary {
        let rate = p.rate.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(out, "# {},{},{:e},{}", p.method, p.m, p.median_error, rate);
    }
    out
}
