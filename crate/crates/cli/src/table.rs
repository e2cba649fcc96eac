//! Long-format result table and its CSV serialization.
//!
//! One row per (grid point, statistic). The header is fixed; every row
//! carries the run seed and a hash of the resolved configuration, and the
//! file opens with `#` provenance comments (config hash, seed, constant
//! vector, source version). Output is fully deterministic for a given
//! configuration and seed.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::errors::{CliError, CliResult};
use ridgesplit_core::TheoryConstants;

/// Fixed CSV column header.
pub const CSV_HEADER: &str =
    "preset,n,d,M,F,rho2,eps,alpha,snr,tau,rep_count,stat,value,stderr,valid_flags,seed,config_hash";

/// Statistic labels used in the `stat` column.
pub mod stat {
    pub const RISK_MEAN: &str = "risk_mean";
    pub const COND_BIAS: &str = "cond_bias";
    pub const COND_VAR: &str = "cond_var";
    pub const EFFICIENCY: &str = "efficiency";
    pub const TEST_MSE: &str = "test_mse";
    pub const BIAS_BOUND: &str = "bias_bound";
    pub const VAR_BOUND: &str = "var_bound";
    pub const TOTAL_BOUND: &str = "total_bound";
    pub const LOWER_BOUND: &str = "lower_bound";
    pub const UNIVERSAL_LOWER: &str = "universal_lower";
    pub const M_OPT_FORMULA: &str = "m_opt_formula";
    pub const M_OPT_GRIDSEARCH: &str = "m_opt_gridsearch";
}

/// One (grid point, statistic) result.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub preset: String,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub f: Option<usize>,
    pub rho2: Option<f64>,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
    pub snr: Option<f64>,
    pub tau: f64,
    pub rep_count: usize,
    pub stat: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub valid_flags: String,
    pub seed: u64,
    pub config_hash: String,
}

/// A result table plus the provenance lines emitted above the header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// `(key, value)` pairs rendered as `# key: value` comment lines.
    pub provenance: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

/// Shortest round-trip decimal rendering of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt<T: std::str::FromStr>(cell: &str, name: &str, line: usize) -> CliResult<Option<T>> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<T>()
        .map(Some)
        .map_err(|_| CliError::data(format!("line {line}: column '{name}': cannot parse '{cell}'")))
}

fn parse_req<T: std::str::FromStr>(cell: &str, name: &str, line: usize) -> CliResult<T> {
    parse_opt(cell, name, line)?
        .ok_or_else(|| CliError::data(format!("line {line}: column '{name}': empty")))
}

impl Row {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.preset,
            self.n,
            self.d,
            self.m,
            fmt_opt_usize(self.f),
            fmt_opt_f64(self.rho2),
            fmt_opt_f64(self.eps),
            fmt_opt_f64(self.alpha),
            fmt_opt_f64(self.snr),
            fmt_f64(self.tau),
            self.rep_count,
            self.stat,
            fmt_f64(self.value),
            fmt_opt_f64(self.stderr),
            self.valid_flags,
            self.seed,
            self.config_hash,
        )
    }

    fn parse_line(line: &str, line_no: usize) -> CliResult<Row> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 17 {
            return Err(CliError::data(format!(
                "line {line_no}: expected 17 columns, got {}",
                cells.len()
            )));
        }
        Ok(Row {
            preset: cells[0].to_string(),
            n: parse_req(cells[1], "n", line_no)?,
            d: parse_req(cells[2], "d", line_no)?,
            m: parse_req(cells[3], "M", line_no)?,
            f: parse_opt(cells[4], "F", line_no)?,
            rho2: parse_opt(cells[5], "rho2", line_no)?,
            eps: parse_opt(cells[6], "eps", line_no)?,
            alpha: parse_opt(cells[7], "alpha", line_no)?,
            snr: parse_opt(cells[8], "snr", line_no)?,
            tau: parse_req(cells[9], "tau", line_no)?,
            rep_count: parse_req(cells[10], "rep_count", line_no)?,
            stat: cells[11].to_string(),
            value: parse_req(cells[12], "value", line_no)?,
            stderr: parse_opt(cells[13], "stderr", line_no)?,
            valid_flags: cells[14].to_string(),
            seed: parse_req(cells[15], "seed", line_no)?,
            config_hash: cells[16].to_string(),
        })
    }
}

impl Table {
    pub fn new(provenance: Vec<(String, String)>) -> Self {
        Table {
            provenance,
            rows: Vec::new(),
        }
    }

    /// Render the table as CSV text (comments, header, one line per row).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.provenance {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{CSV_HEADER}");
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.to_line());
        }
        out
    }

    /// Parse CSV text produced by [`Table::to_csv`]; inverse up to equality.
    pub fn from_csv(text: &str) -> CliResult<Table> {
        let mut provenance = Vec::new();
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if let Some(comment) = line.strip_prefix('#') {
                let body = comment.trim_start();
                let (k, v) = body
                    .split_once(": ")
                    .ok_or_else(|| CliError::data(format!("line {line_no}: malformed comment")))?;
                provenance.push((k.to_string(), v.to_string()));
            } else if !seen_header {
                if line != CSV_HEADER {
                    return Err(CliError::data(format!(
                        "line {line_no}: unexpected header '{line}'"
                    )));
                }
                seen_header = true;
            } else if !line.is_empty() {
                rows.push(Row::parse_line(line, line_no)?);
            }
        }
        if !seen_header {
            return Err(CliError::data("missing header row"));
        }
        Ok(Table { provenance, rows })
    }

    /// Parse a CSV file produced by this tool.
    pub fn read_csv(path: &Path) -> CliResult<Table> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        Table::from_csv(&text)
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
    }
}

/// First 16 hex characters of the SHA-256 of the canonical configuration
/// string. Identical resolved configurations hash identically; execution
/// details (thread count, output paths) are excluded by construction.
pub fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// `git describe` of the source tree, captured at build time (the crate
/// version when the tree was built outside git).
pub fn source_version() -> String {
    env!("RIDGESPLIT_GIT_DESCRIBE").to_string()
}

/// Standard provenance block shared by all emitters.
pub fn provenance(
    hash: &str,
    seed: u64,
    constants: &TheoryConstants,
    extra: &[(&str, String)],
) -> Vec<(String, String)> {
    let mut p = vec![
        ("config_hash".to_string(), hash.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("constants".to_string(), constants.describe()),
        ("source_version".to_string(), source_version()),
    ];
    for (k, v) in extra {
        p.push((k.to_string(), v.clone()));
    }
    p
}
