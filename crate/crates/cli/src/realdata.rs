//! Real-dataset runs: ingest a headerless numeric CSV, then repeatedly
//! subsample the training block, split it into contiguous shards, average
//! the per-shard min-norm fits, and score on the held-out block.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::errors::{CliError, CliResult};
use crate::presets::RealPlan;
use crate::sweep::thread_pool;
use crate::table::{provenance, stat, Row, Table};
use ridgesplit_core::estimator::shard_solvers;
use ridgesplit_core::risk::{average_fit, efficiency, mean_and_stderr};
use ridgesplit_core::simulate::split;
use ridgesplit_core::{Matrix, Vector};

/// A numeric dataset split into a training block and a held-out block,
/// centered column-wise (features and target) by training means.
#[derive(Debug)]
pub struct RealDataset {
    pub train_x: Matrix,
    pub train_y: Vector,
    pub test_x: Matrix,
    pub test_y: Vector,
    /// Per-feature training means subtracted from both blocks.
    pub feature_means: Vector,
    /// Training target mean subtracted from both blocks.
    pub target_mean: f64,
}

/// Read a headerless comma-separated numeric file. The first `train_rows`
/// rows form the training block and everything after it the held-out block;
/// `target_column` selects the response and the remaining columns are the
/// features, in file order.
pub fn ingest_csv(path: &Path, target_column: usize, train_rows: usize) -> CliResult<RealDataset> {
    let file = File::open(path)
        .map_err(|e| CliError::data(format!("cannot open '{}': {e}", path.display())))?;
    let reader = BufReader::new(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut arity = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line
            .map_err(|e| CliError::data(format!("line {line_no}: read failed: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = Vec::with_capacity(arity.max(1));
        for (j, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::data(format!("line {line_no}: column {j}: cannot parse '{cell}'"))
            })?;
            cells.push(v);
        }
        if rows.is_empty() {
            arity = cells.len();
            if arity < 2 {
                return Err(CliError::data(format!(
                    "line {line_no}: need at least 2 columns (target + feature), got {arity}"
                )));
            }
            if target_column >= arity {
                return Err(CliError::config(format!(
                    "field 'target_column': {target_column} out of range for {arity} columns"
                )));
            }
        } else if cells.len() != arity {
            return Err(CliError::data(format!(
                "line {line_no}: expected {arity} columns, got {}",
                cells.len()
            )));
        }
        rows.push(cells);
    }

    if rows.len() <= train_rows {
        return Err(CliError::data(format!(
            "file has {} data rows; need more than train_rows = {train_rows} to hold out a test block",
            rows.len()
        )));
    }

    let d = arity - 1;
    let build = |slice: &[Vec<f64>]| -> (Matrix, Vector) {
        let x = Matrix::from_fn(slice.len(), d, |i, j| {
            let col = if j < target_column { j } else { j + 1 };
            slice[i][col]
        });
        let y = Vector::from_fn(slice.len(), |i, _| slice[i][target_column]);
        (x, y)
    };
    let (mut train_x, mut train_y) = build(&rows[..train_rows]);
    let (mut test_x, mut test_y) = build(&rows[train_rows..]);

    let feature_means = Vector::from_fn(d, |j, _| train_x.column(j).mean());
    let target_mean = train_y.mean();
    for j in 0..d {
        train_x.column_mut(j).add_scalar_mut(-feature_means[j]);
        test_x.column_mut(j).add_scalar_mut(-feature_means[j]);
    }
    train_y.add_scalar_mut(-target_mean);
    test_y.add_scalar_mut(-target_mean);

    Ok(RealDataset {
        train_x,
        train_y,
        test_x,
        test_y,
        feature_means,
        target_mean,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Replication-keyed generator: independent of thread scheduling, distinct
/// per (seed, replication).
fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    const TAG: u64 = 0x7265_616c_6461_7461; // domain tag for subsample draws
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed ^ TAG) ^ rep))
}

/// Mean squared prediction error of `beta` on the held-out block.
fn test_mse(ds: &RealDataset, beta: &Vector) -> f64 {
    let resid = &ds.test_y - &ds.test_x * beta;
    resid.norm_squared() / ds.test_y.len() as f64
}

/// One replication: draw a training subsample, fit every shard count on it,
/// and return the held-out MSE per shard count (grid order).
fn run_rep(ds: &RealDataset, plan: &RealPlan, rep: u64) -> CliResult<Vec<f64>> {
    let mut rng = rep_rng(plan.seed, rep);
    let picks = rand::seq::index::sample(&mut rng, ds.train_x.nrows(), plan.n_subsample);
    let indices: Vec<usize> = picks.iter().collect();
    let x = ds.train_x.select_rows(indices.iter());
    let y = Vector::from_fn(plan.n_subsample, |i, _| ds.train_y[indices[i]]);

    let mut out = Vec::with_capacity(plan.m_grid.len());
    for g in &plan.m_grid {
        let shards = split(plan.n_subsample, g.m, false).map_err(CliError::from)?;
        let solvers = shard_solvers(&x, &shards, None).map_err(CliError::from)?;
        let beta_bar = average_fit(&solvers, &shards, &y).map_err(CliError::from)?;
        out.push(test_mse(ds, &beta_bar));
    }
    Ok(out)
}

/// Run the full subsample-and-split experiment and assemble the table.
pub fn run_realdata(ds: &RealDataset, plan: &RealPlan, threads: usize) -> CliResult<Table> {
    if plan.n_subsample > ds.train_x.nrows() {
        return Err(CliError::data(format!(
            "n_subsample = {} exceeds the {} training rows",
            plan.n_subsample,
            ds.train_x.nrows()
        )));
    }
    let pool = thread_pool(threads)?;
    let per_rep: Vec<Vec<f64>> = pool.install(|| {
        (0..plan.reps)
            .into_par_iter()
            .map(|rep| run_rep(ds, plan, rep as u64))
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut table = Table::new(provenance(
        &plan.config_hash,
        plan.seed,
        &plan.constants,
        &[
            ("preset", plan.preset.label().to_string()),
            ("data_path", plan.data_path.clone()),
            ("train_rows", plan.train_rows.to_string()),
            ("reps", plan.reps.to_string()),
        ],
    ));

    let d = ds.train_x.ncols();
    let base = |m: usize| Row {
        preset: plan.preset.label().to_string(),
        n: plan.n_subsample,
        d,
        m,
        f: None,
        rho2: None,
        eps: None,
        alpha: None,
        snr: None,
        tau: 0.0,
        rep_count: plan.reps,
        stat: String::new(),
        value: 0.0,
        stderr: None,
        valid_flags: String::new(),
        seed: plan.seed,
        config_hash: plan.config_hash.clone(),
    };

    let mut means = Vec::with_capacity(plan.m_grid.len());
    for (k, g) in plan.m_grid.iter().enumerate() {
        let samples: Vec<f64> = per_rep.iter().map(|r| r[k]).collect();
        let (mean, stderr) = mean_and_stderr(&samples);
        means.push(mean);
        let mut row = base(g.m);
        row.stat = stat::TEST_MSE.to_string();
        row.value = mean;
        row.stderr = Some(stderr);
        row.valid_flags = format!("m_as_requested={}", u8::from(g.m == g.requested));
        table.rows.push(row);
    }

    if let Some(pos) = plan.m_grid.iter().position(|g| g.m == 1) {
        let single = means[pos];
        for (k, g) in plan.m_grid.iter().enumerate() {
            if let Ok(eff) = efficiency(single, means[k]) {
                let mut row = base(g.m);
                row.stat = stat::EFFICIENCY.to_string();
                row.value = eff;
                row.valid_flags = format!("m_as_requested={}", u8::from(g.m == g.requested));
                table.rows.push(row);
            }
        }
    }

    Ok(table)
}
