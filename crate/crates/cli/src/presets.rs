//! Experiment presets and resolution of a merged configuration into a
//! concrete executable plan (one model per grid point, plus the bound
//! evaluations attached to each curve series).

use std::fmt;

use crate::config::Merged;
use crate::errors::{CliError, CliResult};
use crate::table;
use ridgesplit_core::risk::Resample;
use ridgesplit_core::simulate::{Prior, SourceFunction};
use ridgesplit_core::theory::{divisors, round_to_divisor};
use ridgesplit_core::{ModelConfig, Spectrum, TheoryConstants};

/// Built-in experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1Left,
    Fig1Right,
    Fig2Left,
    Fig2Right,
    Fig3DoubleDescent,
    Fig45EigenDecay,
    Custom,
}

impl Preset {
    pub fn parse(name: &str) -> CliResult<Preset> {
        match name.to_ascii_lowercase().as_str() {
            "fig1-left" => Ok(Preset::Fig1Left),
            "fig1-right" => Ok(Preset::Fig1Right),
            "fig2-left" => Ok(Preset::Fig2Left),
            "fig2-right" => Ok(Preset::Fig2Right),
            "fig3-double-descent" => Ok(Preset::Fig3DoubleDescent),
            "fig45-eigen-decay" => Ok(Preset::Fig45EigenDecay),
            "custom" => Ok(Preset::Custom),
            other => Err(CliError::config(format!(
                "field 'preset': unknown preset '{other}' (expected fig1-left, fig1-right, \
                 fig2-left, fig2-right, fig3-double-descent, fig45-eigen-decay, custom)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Preset::Fig1Left => "fig1-left",
            Preset::Fig1Right => "fig1-right",
            Preset::Fig2Left => "fig2-left",
            Preset::Fig2Right => "fig2-right",
            Preset::Fig3DoubleDescent => "fig3-double-descent",
            Preset::Fig45EigenDecay => "fig45-eigen-decay",
            Preset::Custom => "custom",
        }
    }

    /// Whether the preset runs on an ingested dataset instead of simulation.
    pub fn is_real_data(&self) -> bool {
        matches!(self, Preset::Fig2Left | Preset::Fig2Right)
    }
}

/// Bound family evaluated alongside a curve series.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundFamily {
    /// Two-level spectrum: closed-form bias/variance terms and optimum.
    TwoLevel { f: usize, rho2: f64, snr: f64 },
    /// Polynomial decay: closed-form two-term bound and optimum.
    PolyDecay { alpha: f64, eps: f64 },
    /// Generic spectrum: effective-rank bias/variance bounds.
    General { trace_sigma_theta: f64, sigma_noise: f64 },
    /// Only the spectrum-free lower bound (flat spectra have no finite
    /// effective dimension at realistic local sample sizes).
    UniversalOnly,
}

/// One curve series: a fixed model swept over shard counts.
#[derive(Debug, Clone)]
pub struct Series {
    /// Legend label, e.g. `F=100`, `rho2=0.01`, `eps=0.5`.
    pub label: String,
    pub model: ModelConfig,
    pub d: usize,
    pub f: Option<usize>,
    pub rho2: Option<f64>,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
    pub snr: Option<f64>,
    pub bounds: BoundFamily,
}

/// A shard count to run: the effective value and what was requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridM {
    pub m: usize,
    pub requested: usize,
}

/// Fully resolved simulation sweep.
#[derive(Debug)]
pub struct SweepPlan {
    pub preset: Preset,
    pub series: Vec<Series>,
    pub m_grid: Vec<GridM>,
    pub n: usize,
    pub tau: f64,
    pub reps: usize,
    pub seed: u64,
    pub resample: Resample,
    pub constants: TheoryConstants,
    pub config_hash: String,
}

/// Fully resolved real-dataset run.
#[derive(Debug)]
pub struct RealPlan {
    pub preset: Preset,
    pub data_path: String,
    pub target_column: usize,
    pub train_rows: usize,
    pub n_subsample: usize,
    pub m_grid: Vec<GridM>,
    pub reps: usize,
    pub seed: u64,
    pub constants: TheoryConstants,
    pub config_hash: String,
}

fn parse_resample(name: &str) -> CliResult<Resample> {
    match name {
        "full" => Ok(Resample::Full),
        "noise_only" => Ok(Resample::NoiseOnly),
        "noise_and_beta" => Ok(Resample::NoiseAndBeta),
        other => Err(CliError::config(format!(
            "field 'resample': unknown policy '{other}' (expected full, noise_only, noise_and_beta)"
        ))),
    }
}

fn parse_phi(name: &str) -> CliResult<SourceFunction> {
    match name {
        "identity" => Ok(SourceFunction::Identity),
        "constant" => Ok(SourceFunction::Constant),
        "inverse" => Ok(SourceFunction::Inverse),
        other => Err(CliError::config(format!(
            "field 'phi': unknown source shape '{other}' (expected identity, constant, inverse)"
        ))),
    }
}

/// Apply the shard-count policy: with rounding, snap each requested M to the
/// divisor of `n` nearest in log scale and deduplicate; without, reject
/// non-divisors naming the nearest one.
pub fn resolve_m_grid(requested: &[usize], n: usize, round: bool) -> CliResult<Vec<GridM>> {
    if requested.is_empty() {
        return Err(CliError::config("field 'm_grid': must not be empty"));
    }
    let mut grid: Vec<GridM> = Vec::new();
    for &req in requested {
        if req == 0 {
            return Err(CliError::config("field 'm_grid': shard counts must be >= 1"));
        }
        let m = if n % req == 0 {
            req
        } else if round {
            round_to_divisor(n, req as f64).map_err(CliError::from)?
        } else {
            let nearest = round_to_divisor(n, req as f64).map_err(CliError::from)?;
            return Err(CliError::config(format!(
                "field 'm_grid': {req} does not divide n={n} (nearest divisor: {nearest}); \
                 set round_m = true to round automatically"
            )));
        };
        if !grid.iter().any(|g| g.m == m) {
            grid.push(GridM { m, requested: req });
        }
    }
    grid.sort_by_key(|g| g.m);
    Ok(grid)
}

fn require<T: Copy>(v: Option<T>, field: &str, ctx: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(format!("field '{field}': required {ctx}")))
}

struct SeriesParams {
    label: String,
    f: Option<usize>,
    rho2: Option<f64>,
    eps: Option<f64>,
}

fn fmt_short(v: f64) -> String {
    table::fmt_f64(v)
}

/// Build the per-series spectrum/prior/bounds for a custom sweep.
fn custom_series(
    merged: &Merged,
    n: usize,
    tau: f64,
    seed: u64,
    params: SeriesParams,
) -> CliResult<Series> {
    let file = &merged.file;
    let kind = file.spectrum.as_deref().unwrap_or("strong_weak");
    let d = require(file.d, "d", "for simulation sweeps")?;

    let (spectrum, f, rho2, eps) = match kind {
        "strong_weak" => {
            let f = require(params.f.or(file.f), "f", "for the strong_weak spectrum")?;
            let rho2 = require(params.rho2.or(file.rho2), "rho2", "for the strong_weak spectrum")?;
            let s = Spectrum::strong_weak(f, d, rho2).map_err(CliError::from)?;
            (s, Some(f), Some(rho2), None)
        }
        "polynomial" => {
            let eps = require(params.eps.or(file.eps), "eps", "for the polynomial spectrum")?;
            let s = Spectrum::polynomial_decay(eps, d).map_err(CliError::from)?;
            (s, None, None, Some(eps))
        }
        "explicit" => {
            let path = file
                .spectrum_csv
                .as_deref()
                .ok_or_else(|| CliError::config("field 'spectrum_csv': required for the explicit spectrum"))?;
            let s = Spectrum::from_csv(path).map_err(CliError::from)?;
            if s.dim() != d {
                return Err(CliError::config(format!(
                    "field 'd': {d} does not match the {} eigenvalues in {path}",
                    s.dim()
                )));
            }
            (s, None, None, None)
        }
        other => {
            return Err(CliError::config(format!(
                "field 'spectrum': unknown kind '{other}' (expected strong_weak, polynomial, explicit)"
            )))
        }
    };

    let prior_kind = file.prior.as_deref().unwrap_or("random_effects");
    let (prior, snr, alpha) = match prior_kind {
        "random_effects" => {
            let snr = file.snr.unwrap_or(1.0);
            (Prior::RandomEffects { snr }, Some(snr), None)
        }
        "source_condition" => {
            let alpha = require(file.alpha, "alpha", "for the source_condition prior")?;
            let r2 = file.r2.unwrap_or(1.0);
            (Prior::SourceCondition { alpha, r2 }, None, Some(alpha))
        }
        "general_source" => {
            let phi = parse_phi(file.phi.as_deref().unwrap_or("identity"))?;
            let r2 = file.r2.unwrap_or(1.0);
            (Prior::GeneralSource { phi, r2 }, None, None)
        }
        other => {
            return Err(CliError::config(format!(
                "field 'prior': unknown kind '{other}' (expected random_effects, source_condition, general_source)"
            )))
        }
    };

    let model = ModelConfig::new(spectrum, n, tau, prior, seed);
    let bounds = match (kind, &model.prior) {
        ("strong_weak", Prior::RandomEffects { snr }) => BoundFamily::TwoLevel {
            f: f.unwrap(),
            rho2: rho2.unwrap(),
            snr: *snr,
        },
        ("polynomial", _) => BoundFamily::PolyDecay {
            alpha: alpha.unwrap_or(0.0),
            eps: eps.unwrap(),
        },
        _ => BoundFamily::General {
            trace_sigma_theta: model.trace_sigma_theta(),
            sigma_noise: tau,
        },
    };

    Ok(Series {
        label: params.label,
        model,
        d,
        f,
        rho2,
        eps,
        alpha,
        snr,
        bounds,
    })
}

/// Canonical single-line rendering of a resolved sweep, used for hashing.
fn canonical_sweep(plan: &SweepPlan) -> String {
    let mut s = String::new();
    use fmt::Write;
    let _ = write!(
        s,
        "preset={};n={};tau={};reps={};seed={};resample={:?};constants={};m_grid=",
        plan.preset.label(),
        plan.n,
        fmt_short(plan.tau),
        plan.reps,
        plan.seed,
        plan.resample,
        plan.constants.describe()
    );
    for g in &plan.m_grid {
        let _ = write!(s, "{},", g.m);
    }
    let _ = write!(s, ";series=");
    for sr in &plan.series {
        let _ = write!(
            s,
            "[{}:d={};f={:?};rho2={:?};eps={:?};alpha={:?};snr={:?}]",
            sr.label, sr.d, sr.f, sr.rho2, sr.eps, sr.alpha, sr.snr
        );
    }
    s
}

fn canonical_real(plan: &RealPlan) -> String {
    let mut s = String::new();
    use fmt::Write;
    let _ = write!(
        s,
        "preset={};data_path={};target_column={};train_rows={};n_subsample={};reps={};seed={};constants={};m_grid=",
        plan.preset.label(),
        plan.data_path,
        plan.target_column,
        plan.train_rows,
        plan.n_subsample,
        plan.reps,
        plan.seed,
        plan.constants.describe()
    );
    for g in &plan.m_grid {
        let _ = write!(s, "{},", g.m);
    }
    s
}

/// Resolve a merged configuration into a simulation sweep plan.
pub fn sweep_plan(merged: &Merged) -> CliResult<SweepPlan> {
    let preset = match merged.preset.as_deref() {
        Some(name) => Preset::parse(name)?,
        None => Preset::Custom,
    };
    if preset.is_real_data() {
        return Err(CliError::config(format!(
            "preset '{}' runs on an ingested dataset; use the realdata subcommand",
            preset.label()
        )));
    }
    let file = &merged.file;
    let constants = file.constants()?;
    let seed = merged.seed;

    let plan = match preset {
        Preset::Fig1Left | Preset::Fig1Right => {
            let n = file.n.unwrap_or(200);
            let d = file.d.unwrap_or(600);
            let tau = file.tau.unwrap_or(1.0);
            let snr = file.snr.unwrap_or(0.1);
            let reps = merged.reps.unwrap_or(100);
            let m_grid = resolve_m_grid(
                &file.m_grid.clone().unwrap_or_else(|| divisors(n)),
                n,
                file.round_m.unwrap_or(true),
            )?;
            let series_params: Vec<(String, usize, f64)> = if preset == Preset::Fig1Left {
                let fs = file.f_list.clone().unwrap_or_else(|| vec![100, 150, 200]);
                let rho2 = file.rho2.unwrap_or(1e-4);
                fs.into_iter().map(|f| (format!("F={f}"), f, rho2)).collect()
            } else {
                let rhos = file
                    .rho2_list
                    .clone()
                    .unwrap_or_else(|| vec![1e-3, 1e-2, 1e-1]);
                let f = file.f.unwrap_or(100);
                rhos.into_iter()
                    .map(|r| (format!("rho2={}", fmt_short(r)), f, r))
                    .collect()
            };
            let mut series = Vec::new();
            for (label, f, rho2) in series_params {
                let spectrum = Spectrum::strong_weak(f, d, rho2).map_err(CliError::from)?;
                let model =
                    ModelConfig::new(spectrum, n, tau, Prior::RandomEffects { snr }, seed);
                series.push(Series {
                    label,
                    model,
                    d,
                    f: Some(f),
                    rho2: Some(rho2),
                    eps: None,
                    alpha: None,
                    snr: Some(snr),
                    bounds: BoundFamily::TwoLevel { f, rho2, snr },
                });
            }
            SweepPlan {
                preset,
                series,
                m_grid,
                n,
                tau,
                reps,
                seed,
                resample: Resample::Full,
                constants,
                config_hash: String::new(),
            }
        }
        Preset::Fig3DoubleDescent => {
            let n = file.n.unwrap_or(900);
            let d = file.d.unwrap_or(90);
            let tau = file.tau.unwrap_or(1.0);
            let snr = file.snr.unwrap_or(1.0);
            let reps = merged.reps.unwrap_or(100);
            let m_grid = resolve_m_grid(
                &file.m_grid.clone().unwrap_or_else(|| divisors(n)),
                n,
                file.round_m.unwrap_or(true),
            )?;
            let spectrum = Spectrum::explicit(vec![1.0; d]).map_err(CliError::from)?;
            let model = ModelConfig::new(spectrum, n, tau, Prior::RandomEffects { snr }, seed);
            SweepPlan {
                preset,
                series: vec![Series {
                    label: format!("d={d}"),
                    model,
                    d,
                    f: None,
                    rho2: None,
                    eps: None,
                    alpha: None,
                    snr: Some(snr),
                    bounds: BoundFamily::UniversalOnly,
                }],
                m_grid,
                n,
                tau,
                reps,
                seed,
                resample: Resample::Full,
                constants,
                config_hash: String::new(),
            }
        }
        Preset::Fig45EigenDecay => {
            let n = file.n.unwrap_or(200);
            let d = file.d.unwrap_or(400);
            let tau = file.tau.unwrap_or(1.0);
            let snr = file.snr.unwrap_or(1.0);
            let reps = merged.reps.unwrap_or(100);
            let m_grid = resolve_m_grid(
                &file.m_grid.clone().unwrap_or_else(|| divisors(n)),
                n,
                file.round_m.unwrap_or(true),
            )?;
            let eps_list = file
                .eps_list
                .clone()
                .unwrap_or_else(|| vec![0.1, 0.5, 1.0, 1.5]);
            let mut series = Vec::new();
            for eps in eps_list {
                let spectrum = Spectrum::polynomial_decay(eps, d).map_err(CliError::from)?;
                let model =
                    ModelConfig::new(spectrum, n, tau, Prior::RandomEffects { snr }, seed);
                series.push(Series {
                    label: format!("eps={}", fmt_short(eps)),
                    model,
                    d,
                    f: None,
                    rho2: None,
                    eps: Some(eps),
                    alpha: None,
                    snr: Some(snr),
                    bounds: BoundFamily::PolyDecay { alpha: 0.0, eps },
                });
            }
            SweepPlan {
                preset,
                series,
                m_grid,
                n,
                tau,
                reps,
                seed,
                resample: Resample::Full,
                constants,
                config_hash: String::new(),
            }
        }
        Preset::Custom => {
            let n = require(file.n, "n", "for custom sweeps")?;
            let tau = file.tau.unwrap_or(1.0);
            let reps = merged.reps.unwrap_or(100);
            let resample = parse_resample(file.resample.as_deref().unwrap_or("full"))?;
            let m_grid = resolve_m_grid(
                &file.m_grid.clone().unwrap_or_else(|| divisors(n)),
                n,
                file.round_m.unwrap_or(true),
            )?;
            let lists_set = [
                file.f_list.is_some(),
                file.rho2_list.is_some(),
                file.eps_list.is_some(),
            ]
            .iter()
            .filter(|&&b| b)
            .count();
            if lists_set > 1 {
                return Err(CliError::config(
                    "fields 'f_list'/'rho2_list'/'eps_list': at most one sweep list may be set",
                ));
            }
            let mut series = Vec::new();
            if let Some(fs) = &file.f_list {
                for &f in fs {
                    series.push(custom_series(
                        merged,
                        n,
                        tau,
                        seed,
                        SeriesParams {
                            label: format!("F={f}"),
                            f: Some(f),
                            rho2: None,
                            eps: None,
                        },
                    )?);
                }
            } else if let Some(rhos) = &file.rho2_list {
                for &r in rhos {
                    series.push(custom_series(
                        merged,
                        n,
                        tau,
                        seed,
                        SeriesParams {
                            label: format!("rho2={}", fmt_short(r)),
                            f: None,
                            rho2: Some(r),
                            eps: None,
                        },
                    )?);
                }
            } else if let Some(epss) = &file.eps_list {
                for &e in epss {
                    series.push(custom_series(
                        merged,
                        n,
                        tau,
                        seed,
                        SeriesParams {
                            label: format!("eps={}", fmt_short(e)),
                            f: None,
                            rho2: None,
                            eps: Some(e),
                        },
                    )?);
                }
            } else {
                series.push(custom_series(
                    merged,
                    n,
                    tau,
                    seed,
                    SeriesParams {
                        label: "model".to_string(),
                        f: None,
                        rho2: None,
                        eps: None,
                    },
                )?);
            }
            SweepPlan {
                preset,
                series,
                m_grid,
                n,
                tau,
                reps,
                seed,
                resample,
                constants,
                config_hash: String::new(),
            }
        }
        Preset::Fig2Left | Preset::Fig2Right => unreachable!("handled above"),
    };

    let mut plan = plan;
    for sr in &plan.series {
        sr.model.validate().map_err(CliError::from)?;
    }
    if plan.reps == 0 {
        return Err(CliError::config("field 'reps': must be >= 1"));
    }
    plan.config_hash = table::config_hash(&canonical_sweep(&plan));
    Ok(plan)
}

/// Resolve a merged configuration into a real-dataset plan.
pub fn real_plan(merged: &Merged) -> CliResult<RealPlan> {
    let preset = match merged.preset.as_deref() {
        Some(name) => Preset::parse(name)?,
        None => Preset::Custom,
    };
    if !(preset.is_real_data() || preset == Preset::Custom) {
        return Err(CliError::config(format!(
            "preset '{}' is a simulation preset; use the sweep subcommand",
            preset.label()
        )));
    }
    let file = &merged.file;
    let constants = file.constants()?;
    let data_path = file
        .data_path
        .clone()
        .ok_or_else(|| CliError::config("field 'data_path': required for real-data runs"))?;
    let target_column = file.target_column.unwrap_or(0);
    let train_rows = file.train_rows.unwrap_or(463_715);
    if train_rows == 0 {
        return Err(CliError::config("field 'train_rows': must be >= 1"));
    }

    let (n_subsample, default_grid): (usize, Vec<usize>) = match preset {
        Preset::Fig2Left => (
            file.n_subsample.unwrap_or(45),
            vec![1, 3, 5, 9, 15, 45],
        ),
        Preset::Fig2Right => (
            file.n_subsample.unwrap_or(1350),
            divisors(1350).into_iter().filter(|&m| m <= 90).collect(),
        ),
        _ => {
            let n = require(file.n_subsample, "n_subsample", "for custom real-data runs")?;
            (n, divisors(n))
        }
    };
    if n_subsample == 0 {
        return Err(CliError::config("field 'n_subsample': must be >= 1"));
    }
    let m_grid = resolve_m_grid(
        &file.m_grid.clone().unwrap_or(default_grid),
        n_subsample,
        file.round_m.unwrap_or(true),
    )?;
    let reps = merged.reps.unwrap_or(100);
    if reps == 0 {
        return Err(CliError::config("field 'reps': must be >= 1"));
    }

    let mut plan = RealPlan {
        preset,
        data_path,
        target_column,
        train_rows,
        n_subsample,
        m_grid,
        reps,
        seed: merged.seed,
        constants,
        config_hash: String::new(),
    };
    plan.config_hash = table::config_hash(&canonical_real(&plan));
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{merge, CliOverrides, FileConfig};

    fn merged_with(file: FileConfig) -> Merged {
        merge(file, &CliOverrides::default())
    }

    #[test]
    fn preset_names_round_trip() {
        for name in [
            "fig1-left",
            "fig1-right",
            "fig2-left",
            "fig2-right",
            "fig3-double-descent",
            "fig45-eigen-decay",
            "custom",
        ] {
            assert_eq!(Preset::parse(name).unwrap().label(), name);
        }
        assert!(Preset::parse("fig9").is_err());
    }

    #[test]
    fn m_grid_rounding_policy() {
        let grid = resolve_m_grid(&[1, 3, 200], 200, true).unwrap();
        let ms: Vec<usize> = grid.iter().map(|g| g.m).collect();
        // 3 does not divide 200; in log scale 4 is nearer than 2
        // (ln(4/3) = 0.288 < ln(3/2) = 0.405).
        assert_eq!(ms, vec![1, 4, 200]);
        assert!(grid[1].requested == 3);

        let err = resolve_m_grid(&[3], 200, false).unwrap_err();
        assert!(err.to_string().contains("nearest divisor"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn fig1_left_defaults() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig1-left".into());
        let plan = sweep_plan(&merged_with(file)).unwrap();
        assert_eq!(plan.n, 200);
        assert_eq!(plan.series.len(), 3);
        assert_eq!(plan.series[0].f, Some(100));
        assert_eq!(plan.m_grid.len(), 12); // divisors of 200
        assert_eq!(plan.reps, 100);
        assert_eq!(plan.resample, Resample::Full);
        assert!(matches!(plan.series[0].bounds, BoundFamily::TwoLevel { .. }));
        assert_eq!(plan.config_hash.len(), 16);
    }

    #[test]
    fn fig3_uses_universal_bound_only() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig3-double-descent".into());
        let plan = sweep_plan(&merged_with(file)).unwrap();
        assert_eq!(plan.n, 900);
        assert_eq!(plan.series[0].d, 90);
        assert!(matches!(plan.series[0].bounds, BoundFamily::UniversalOnly));
        assert_eq!(plan.m_grid.len(), 27); // divisors of 900
    }

    #[test]
    fn fig45_sweeps_eps() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig45-eigen-decay".into());
        let plan = sweep_plan(&merged_with(file)).unwrap();
        assert_eq!(plan.series.len(), 4);
        assert_eq!(plan.series[1].eps, Some(0.5));
        assert!(matches!(
            plan.series[1].bounds,
            BoundFamily::PolyDecay { alpha, eps } if alpha == 0.0 && eps == 0.5
        ));
    }

    #[test]
    fn custom_requires_fields_with_paths() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        let err = sweep_plan(&merged_with(file)).unwrap_err();
        assert!(err.to_string().contains("field 'n'"), "{err}");

        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.n = Some(40);
        file.d = Some(20);
        file.spectrum = Some("strong_weak".into());
        let err = sweep_plan(&merged_with(file)).unwrap_err();
        assert!(err.to_string().contains("field 'f'"), "{err}");
    }

    #[test]
    fn custom_polynomial_plan() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.n = Some(40);
        file.d = Some(80);
        file.spectrum = Some("polynomial".into());
        file.eps = Some(0.5);
        file.m_grid = Some(vec![1, 2, 4]);
        file.reps = Some(3);
        let plan = sweep_plan(&merged_with(file)).unwrap();
        assert_eq!(plan.series.len(), 1);
        assert_eq!(plan.series[0].eps, Some(0.5));
        assert!(matches!(plan.series[0].bounds, BoundFamily::PolyDecay { .. }));
    }

    #[test]
    fn two_sweep_lists_rejected() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.n = Some(40);
        file.d = Some(20);
        file.f_list = Some(vec![5, 10]);
        file.eps_list = Some(vec![0.5]);
        let err = sweep_plan(&merged_with(file)).unwrap_err();
        assert!(err.to_string().contains("at most one sweep list"), "{err}");
    }

    #[test]
    fn real_plan_presets() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig2-left".into());
        file.data_path = Some("/tmp/nowhere.csv".into());
        let plan = real_plan(&merged_with(file)).unwrap();
        assert_eq!(plan.n_subsample, 45);
        assert_eq!(
            plan.m_grid.iter().map(|g| g.m).collect::<Vec<_>>(),
            vec![1, 3, 5, 9, 15, 45]
        );
        assert_eq!(plan.train_rows, 463_715);

        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig2-right".into());
        file.data_path = Some("/tmp/nowhere.csv".into());
        let plan = real_plan(&merged_with(file)).unwrap();
        assert_eq!(plan.n_subsample, 1350);
        assert!(plan.m_grid.iter().any(|g| g.m == 15));
        assert!(plan.m_grid.iter().all(|g| 1350 % g.m == 0 && g.m <= 90));
    }

    #[test]
    fn real_plan_requires_data_path() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig2-left".into());
        let err = real_plan(&merged_with(file)).unwrap_err();
        assert!(err.to_string().contains("data_path"), "{err}");
    }

    #[test]
    fn sweep_rejects_real_data_presets_and_vice_versa() {
        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig2-left".into());
        file.data_path = Some("x".into());
        assert!(sweep_plan(&merged_with(file)).is_err());

        let mut file = FileConfig::default();
        file.schema_version = Some(1);
        file.preset = Some("fig1-left".into());
        assert!(real_plan(&merged_with(file)).is_err());
    }
}
