//! Flat key-value experiment configuration: file schema, CLI merging, and
//! validation with field-path error messages.

use std::path::Path;

use serde::Deserialize;

use crate::errors::{CliError, CliResult};
use ridgesplit_core::TheoryConstants;

/// Schema version this binary reads.
pub const SCHEMA_VERSION: u64 = 1;

/// The experiment file: flat `key = value` pairs (TOML grammar, no tables).
/// Every field is optional in the file; requiredness depends on the
/// subcommand and preset, and is checked during plan resolution so errors
/// carry field paths.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Required in any config file; must equal [`SCHEMA_VERSION`].
    pub schema_version: Option<u64>,
    /// Preset name (kebab-case); `custom` or absent means fully file-driven.
    pub preset: Option<String>,

    // Model geometry and noise.
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub tau: Option<f64>,

    // Covariance spectrum: `strong_weak`, `polynomial`, or `explicit`.
    pub spectrum: Option<String>,
    pub f: Option<usize>,
    pub rho2: Option<f64>,
    pub eps: Option<f64>,
    /// One-column CSV of decreasing positive eigenvalues (`explicit` only).
    pub spectrum_csv: Option<String>,

    // Coefficient prior: `random_effects`, `source_condition`,
    // or `general_source`.
    pub prior: Option<String>,
    pub snr: Option<f64>,
    pub alpha: Option<f64>,
    pub r2: Option<f64>,
    /// Source shape for `general_source`: `identity`, `constant`, `inverse`.
    pub phi: Option<String>,

    // Sweep grids. At most one of the `_list` keys may be set; it defines
    // the curve series.
    pub m_grid: Option<Vec<usize>>,
    pub f_list: Option<Vec<usize>>,
    pub rho2_list: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    /// Round shard counts to the nearest divisor of `n` in log scale
    /// (default true). With rounding disabled, a non-divisor M is an error.
    pub round_m: Option<bool>,

    // Replication and execution.
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// `full`, `noise_only`, or `noise_and_beta`.
    pub resample: Option<String>,

    // Bound constants.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c_a: Option<f64>,
    pub c_prime: Option<f64>,
    pub a: Option<f64>,
    pub sigma_x: Option<f64>,
    pub delta: Option<f64>,

    // Output.
    pub out: Option<String>,
    pub plot: Option<bool>,

    // Real-dataset runs.
    pub data_path: Option<String>,
    /// Column index of the target in the headerless data CSV (default 0).
    pub target_column: Option<usize>,
    /// Rows from the top used for training (default 463715).
    pub train_rows: Option<usize>,
    /// Training rows subsampled per replication.
    pub n_subsample: Option<usize>,
}

impl FileConfig {
    /// Parse a config file, requiring a supported `schema_version`.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        match cfg.schema_version {
            None => Err(CliError::config(
                "field 'schema_version': required (this binary reads version 1)",
            )),
            Some(SCHEMA_VERSION) => Ok(cfg),
            Some(v) => Err(CliError::config(format!(
                "field 'schema_version': unsupported version {v} (this binary reads {SCHEMA_VERSION})"
            ))),
        }
    }

    /// Bound constants with file overrides applied to the defaults.
    pub fn constants(&self) -> CliResult<TheoryConstants> {
        let mut c = TheoryConstants::default();
        if let Some(v) = self.c1 {
            c.c1 = v;
        }
        if let Some(v) = self.c2 {
            c.c2 = v;
        }
        if let Some(v) = self.c3 {
            c.c3 = v;
        }
        if let Some(v) = self.c4 {
            c.c4 = v;
        }
        if let Some(v) = self.c_a {
            c.c_a = v;
        }
        if let Some(v) = self.c_prime {
            c.c_prime = v;
        }
        if let Some(v) = self.a {
            c.a = v;
        }
        if let Some(v) = self.sigma_x {
            c.sigma_x = v;
        }
        if let Some(v) = self.delta {
            c.delta = v;
        }
        c.validate().map_err(|e| CliError::config(format!("field 'constants': {e}")))?;
        Ok(c)
    }
}

/// Settings given on the command line; each overrides its file counterpart.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<String>,
    pub plot: bool,
}

/// File config merged with CLI overrides into effective run settings.
#[derive(Debug, Clone)]
pub struct Merged {
    pub file: FileConfig,
    pub preset: Option<String>,
    pub seed: u64,
    pub reps: Option<usize>,
    pub threads: usize,
    pub out: Option<String>,
    pub plot: bool,
}

pub fn merge(file: FileConfig, cli: &CliOverrides) -> Merged {
    let preset = cli.preset.clone().or_else(|| file.preset.clone());
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let reps = cli.reps.or(file.reps);
    let threads = cli.threads.or(file.threads).unwrap_or(0);
    let out = cli.out.clone().or_else(|| file.out.clone());
    let plot = cli.plot || file.plot.unwrap_or(false);
    Merged {
        file,
        preset,
        seed,
        reps,
        threads,
        out,
        plot,
    }
}
