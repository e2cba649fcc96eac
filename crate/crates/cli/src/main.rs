//! `ridgesplit`: sweep shard counts for split-and-average min-norm
//! regression, on synthetic models or an on-disk dataset, and emit
//! deterministic CSV tables (optionally with an SVG plot).

use std::path::{Path, PathBuf};
use std::process;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ridgesplit_cli::config::{merge, CliOverrides, FileConfig, Merged};
use ridgesplit_cli::errors::{CliError, CliResult};
use ridgesplit_cli::plot::render_svg;
use ridgesplit_cli::presets::{real_plan, sweep_plan};
use ridgesplit_cli::realdata::{ingest_csv, run_realdata};
use ridgesplit_cli::sweep::{run_sweep, theory_table, SweepOutcome};
use ridgesplit_cli::table::Table;

#[derive(Parser)]
#[command(
    name = "ridgesplit",
    version,
    about = "Distributed min-norm regression laboratory: risk sweeps over shard counts, \
             bound curves, and real-dataset runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration at a single shard count and print a summary.
    Simulate(RunArgs),
    /// Monte-Carlo sweep over shard counts (and series); emits the table.
    Sweep(RunArgs),
    /// Subsample-and-split runs on an on-disk numeric CSV dataset.
    Realdata(RunArgs),
    /// Emit bound curves only — no sampling.
    Theory(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (flat TOML key = value pairs).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name; overrides the config file.
    #[arg(long)]
    preset: Option<String>,
    /// Base RNG seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per grid point; overrides the config file.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads (0 = all cores); overrides the config file.
    #[arg(long)]
    threads: Option<usize>,
    /// Output stem; writes `<out>.csv` (and `<out>.svg` with --plot).
    #[arg(long)]
    out: Option<String>,
    /// Also render an SVG plot next to the CSV.
    #[arg(long)]
    plot: bool,
}

fn settings(args: &RunArgs) -> CliResult<Merged> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let overrides = CliOverrides {
        preset: args.preset.clone(),
        seed: args.seed,
        reps: args.reps,
        threads: args.threads,
        out: args.out.clone(),
        plot: args.plot,
    };
    let merged = merge(file, &overrides);
    if merged.plot && merged.out.is_none() {
        return Err(CliError::config("--plot requires --out"));
    }
    Ok(merged)
}

/// Write `<stem>.csv` (and `<stem>.svg` when plotting); print to stdout when
/// no output stem was given.
fn emit(table: &Table, merged: &Merged) -> CliResult<()> {
    match &merged.out {
        Some(out) => {
            let stem = out.strip_suffix(".csv").unwrap_or(out);
            let csv_path = PathBuf::from(format!("{stem}.csv"));
            if let Some(parent) = csv_path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(|e| {
                        CliError::data(format!("cannot create '{}': {e}", parent.display()))
                    })?;
                }
            }
            table.write_csv(&csv_path)?;
            eprintln!("wrote {}", csv_path.display());
            if merged.plot {
                let svg_path = PathBuf::from(format!("{stem}.svg"));
                std::fs::write(&svg_path, render_svg(table)).map_err(|e| {
                    CliError::data(format!("cannot write '{}': {e}", svg_path.display()))
                })?;
                eprintln!("wrote {}", svg_path.display());
            }
        }
        None => print!("{}", table.to_csv()),
    }
    Ok(())
}

fn run_simulate(merged: &Merged) -> CliResult<()> {
    let plan = sweep_plan(merged)?;
    if plan.series.len() != 1 || plan.m_grid.len() != 1 {
        return Err(CliError::config(
            "simulate runs a single configuration: set m_grid to one value and give no \
             series list, or use the sweep subcommand",
        ));
    }
    let outcome = run_sweep(&plan, merged.threads)?;
    let (_, m, report) = &outcome.reports[0];
    let series = &plan.series[0];
    println!("preset:      {}", plan.preset.label());
    println!("series:      {}", series.label);
    println!(
        "model:       n={}, d={}, tau={}, shards M={m}",
        plan.n, series.d, plan.tau
    );
    println!(
        "sampling:    {} replications, resample={:?}, seed={}",
        plan.reps, plan.resample, plan.seed
    );
    println!(
        "excess risk: {:.6e} (stderr {:.2e})",
        report.mc_mean, report.mc_stderr
    );
    if let Some(b) = report.cond_bias {
        println!("cond. bias:  {b:.6e}");
    }
    if let Some(v) = report.cond_var {
        println!("cond. var:   {v:.6e}");
    }
    println!("config hash: {}", plan.config_hash);
    if merged.out.is_some() {
        emit(&outcome.table, merged)?;
    }
    Ok(())
}

fn run_sweep_cmd(merged: &Merged) -> CliResult<()> {
    let plan = sweep_plan(merged)?;
    let SweepOutcome { table, .. } = run_sweep(&plan, merged.threads)?;
    emit(&table, merged)
}

fn run_theory(merged: &Merged) -> CliResult<()> {
    let plan = sweep_plan(merged)?;
    let table = theory_table(&plan)?;
    emit(&table, merged)
}

fn run_realdata_cmd(merged: &Merged) -> CliResult<()> {
    let plan = real_plan(merged)?;
    let ds = ingest_csv(Path::new(&plan.data_path), plan.target_column, plan.train_rows)?;
    eprintln!(
        "loaded {} train rows, {} test rows, {} features",
        ds.train_x.nrows(),
        ds.test_x.nrows(),
        ds.train_x.ncols()
    );
    let table = run_realdata(&ds, &plan, merged.threads)?;
    emit(&table, merged)
}

fn run(cli: Cli) -> CliResult<()> {
    let started = Instant::now();
    let (merged, runner): (Merged, fn(&Merged) -> CliResult<()>) = match &cli.command {
        Command::Simulate(a) => (settings(a)?, run_simulate),
        Command::Sweep(a) => (settings(a)?, run_sweep_cmd),
        Command::Realdata(a) => (settings(a)?, run_realdata_cmd),
        Command::Theory(a) => (settings(a)?, run_theory),
    };
    runner(&merged)?;
    eprintln!("completed in {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}
