//! Sweep orchestration: run the Monte-Carlo grid on a worker pool, attach
//! bound curves per series, and assemble the long-format result table in a
//! deterministic order (series-major, shard count ascending).

use rayon::prelude::*;

use crate::errors::{CliError, CliResult};
use crate::presets::{BoundFamily, GridM, Series, SweepPlan};
use crate::table::{provenance, stat, Row, Table};
use ridgesplit_core::risk::{efficiency, monte_carlo_risk};
use ridgesplit_core::theory::{
    optimal_m_finite, optimal_m_poly, round_to_divisor, universal_lower_bound, Evaluated,
};
use ridgesplit_core::{Error as CoreError, RiskReport, TheoryCurve};

/// A sweep's table plus the raw per-point reports (for console summaries).
pub struct SweepOutcome {
    pub table: Table,
    /// `(series index, M, report)` in emission order.
    pub reports: Vec<(usize, usize, RiskReport)>,
}

/// Build the worker pool; `threads = 0` uses all available cores.
pub fn thread_pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("field 'threads': {e}")))
}

fn base_row(plan: &SweepPlan, series: &Series, m: usize) -> Row {
    Row {
        preset: plan.preset.label().to_string(),
        n: plan.n,
        d: series.d,
        m,
        f: series.f,
        rho2: series.rho2,
        eps: series.eps,
        alpha: series.alpha,
        snr: series.snr,
        tau: plan.tau,
        rep_count: plan.reps,
        stat: String::new(),
        value: 0.0,
        stderr: None,
        valid_flags: String::new(),
        seed: plan.seed,
        config_hash: plan.config_hash.clone(),
    }
}

fn push_stat(
    rows: &mut Vec<Row>,
    base: &Row,
    name: &str,
    value: f64,
    stderr: Option<f64>,
    flags: String,
) {
    let mut row = base.clone();
    row.stat = name.to_string();
    row.value = value;
    row.stderr = stderr;
    row.valid_flags = flags;
    rows.push(row);
}

fn m_flags(g: GridM) -> String {
    format!("m_as_requested={}", u8::from(g.m == g.requested))
}

type CurveAndOptimum = (TheoryCurve, Option<Evaluated<f64>>);

/// Evaluate the series' bound family on the grid. `Ok(None)` means the
/// family contributes no curve rows.
fn build_curve(
    plan: &SweepPlan,
    series: &Series,
    grid: &[usize],
) -> Result<Option<CurveAndOptimum>, CoreError> {
    let c = &plan.constants;
    match &series.bounds {
        BoundFamily::UniversalOnly => Ok(None),
        BoundFamily::TwoLevel { f, rho2, snr } => {
            let curve = TheoryCurve::finite_dim(
                series.d, *f, *snr, *rho2, plan.n, plan.tau, plan.tau, grid, c,
            )?;
            let ev = optimal_m_finite(series.d, *f, *snr, *rho2, plan.n, c)?;
            Ok(Some((curve, Some(ev))))
        }
        BoundFamily::PolyDecay { alpha, eps } => {
            let curve =
                TheoryCurve::polynomial(*alpha, *eps, plan.n, plan.tau, plan.tau, grid, None, c)?;
            let ev = optimal_m_poly(*alpha, *eps, plan.n, plan.tau, c)?;
            Ok(Some((curve, Some(ev))))
        }
        BoundFamily::General {
            trace_sigma_theta,
            sigma_noise,
        } => {
            let curve = TheoryCurve::general(
                &series.model.spectrum,
                *trace_sigma_theta,
                plan.n,
                plan.tau,
                *sigma_noise,
                grid,
                c,
            )?;
            Ok(Some((curve, None)))
        }
    }
}

/// Bound-curve rows for one series (empty for the universal-only family,
/// whose lower bound is already emitted per point). A series whose bounds
/// need a finite effective dimension the spectrum cannot supply — local
/// sample sizes too large for the working dimension — is skipped with a
/// warning rather than failing the sweep.
fn bound_rows(plan: &SweepPlan, series: &Series) -> CliResult<Vec<Row>> {
    let grid: Vec<usize> = plan.m_grid.iter().map(|g| g.m).collect();
    let (curve, m_opt) = match build_curve(plan, series, &grid) {
        Ok(Some(pair)) => pair,
        Ok(None) => return Ok(Vec::new()),
        Err(CoreError::InfiniteEffectiveDimension { .. }) => {
            eprintln!(
                "warning: series '{}': effective dimension is not finite at some local \
                 sample size; bound curves skipped",
                series.label
            );
            return Ok(Vec::new());
        }
        Err(e) => return Err(e.into()),
    };

    let mut rows = Vec::new();
    for (i, &m) in curve.grid.iter().enumerate() {
        let mut base = base_row(plan, series, m);
        base.rep_count = 0;
        let flags = curve.flags[i].summary();
        push_stat(&mut rows, &base, stat::BIAS_BOUND, curve.bias_bound[i], None, flags.clone());
        push_stat(&mut rows, &base, stat::VAR_BOUND, curve.var_bound[i], None, flags.clone());
        push_stat(&mut rows, &base, stat::TOTAL_BOUND, curve.total_bound[i], None, flags.clone());
        push_stat(&mut rows, &base, stat::LOWER_BOUND, curve.lower_bound[i], None, flags);
    }

    if let (Some(formula), Some(ev)) = (curve.m_opt_formula, &m_opt) {
        let rounded = round_to_divisor(plan.n, formula).map_err(CliError::from)?;
        let mut base = base_row(plan, series, rounded);
        base.rep_count = 0;
        push_stat(&mut rows, &base, stat::M_OPT_FORMULA, formula, None, ev.flags.summary());
    }
    let mut base = base_row(plan, series, curve.m_opt_gridsearch);
    base.rep_count = 0;
    push_stat(
        &mut rows,
        &base,
        stat::M_OPT_GRIDSEARCH,
        curve.m_opt_gridsearch as f64,
        None,
        String::new(),
    );
    Ok(rows)
}

/// Bound curves only — no sampling.
pub fn theory_table(plan: &SweepPlan) -> CliResult<Table> {
    let mut table = Table::new(provenance(
        &plan.config_hash,
        plan.seed,
        &plan.constants,
        &[("preset", plan.preset.label().to_string()), ("mode", "theory".to_string())],
    ));
    for series in &plan.series {
        for g in &plan.m_grid {
            let mut base = base_row(plan, series, g.m);
            base.rep_count = 0;
            let ulb = universal_lower_bound(series.d, plan.n, g.m, plan.tau)
                .map_err(CliError::from)?;
            push_stat(&mut table.rows, &base, stat::UNIVERSAL_LOWER, ulb, None, m_flags(*g));
        }
        table.rows.extend(bound_rows(plan, series)?);
    }
    Ok(table)
}

/// Run the Monte-Carlo sweep and assemble empirical + bound rows.
pub fn run_sweep(plan: &SweepPlan, threads: usize) -> CliResult<SweepOutcome> {
    let pool = thread_pool(threads)?;
    let jobs: Vec<(usize, GridM)> = (0..plan.series.len())
        .flat_map(|si| plan.m_grid.iter().map(move |g| (si, *g)))
        .collect();

    let reports: Vec<RiskReport> = pool
        .install(|| {
            jobs.par_iter()
                .map(|(si, g)| {
                    monte_carlo_risk(&plan.series[*si].model, g.m, plan.reps, plan.resample)
                })
                .collect::<Result<Vec<_>, CoreError>>()
        })
        .map_err(CliError::from)?;

    let mut table = Table::new(provenance(
        &plan.config_hash,
        plan.seed,
        &plan.constants,
        &[
            ("preset", plan.preset.label().to_string()),
            ("resample", format!("{:?}", plan.resample)),
            ("reps", plan.reps.to_string()),
        ],
    ));
    let mut outcome_reports = Vec::with_capacity(jobs.len());

    for (si, series) in plan.series.iter().enumerate() {
        let series_reports: Vec<(&GridM, &RiskReport)> = jobs
            .iter()
            .zip(&reports)
            .filter(|((s, _), _)| *s == si)
            .map(|((_, g), r)| (g, r))
            .collect();
        let baseline = series_reports
            .iter()
            .find(|(g, _)| g.m == 1)
            .map(|(_, r)| r.mc_mean);

        for (g, report) in &series_reports {
            let base = base_row(plan, series, g.m);
            let flags = m_flags(**g);
            push_stat(
                &mut table.rows,
                &base,
                stat::RISK_MEAN,
                report.mc_mean,
                Some(report.mc_stderr),
                flags.clone(),
            );
            if let Some(b) = report.cond_bias {
                push_stat(&mut table.rows, &base, stat::COND_BIAS, b, None, flags.clone());
            }
            if let Some(v) = report.cond_var {
                push_stat(&mut table.rows, &base, stat::COND_VAR, v, None, flags.clone());
            }
            if let Some(single) = baseline {
                if let Ok(eff) = efficiency(single, report.mc_mean) {
                    push_stat(&mut table.rows, &base, stat::EFFICIENCY, eff, None, flags.clone());
                }
            }
            let ulb = universal_lower_bound(series.d, plan.n, g.m, plan.tau)
                .map_err(CliError::from)?;
            push_stat(&mut table.rows, &base, stat::UNIVERSAL_LOWER, ulb, None, flags);
            outcome_reports.push((si, g.m, RiskReport::clone(report)));
        }
        table.rows.extend(bound_rows(plan, series)?);
    }

    Ok(SweepOutcome {
        table,
        reports: outcome_reports,
    })
}
