//! Excess risk, exact conditional bias/variance given realized designs, and
//! Monte-Carlo risk estimation.
//!
//! For the averaged estimator with Gaussian noise the conditional risk
//! decomposes exactly: the bias is the covariance-weighted squared norm of the
//! averaged null-space component of the target, and the variance is
//! `(tau^2/M^2) * sum_m Tr[(X_m^+)' Sigma X_m^+]`. Both are computed from the
//! retained shard factorizations without forming `d x d` products unless a
//! prior-averaged bias is requested.

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{shard_solvers, MinNormSolver};
use crate::scalar::Real;
use crate::simulate::{split, ModelConfig, SplitPlan};
use crate::spectra::{Kahan, Spectrum};

/// What is redrawn between Monte-Carlo replications.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    /// Designs and target fixed at replication 0; only the noise is redrawn.
    NoiseOnly,
    /// Designs fixed at replication 0; target and noise are redrawn.
    NoiseAndBeta,
    /// Designs, target, and noise are all redrawn each replication.
    Full,
}

/// Monte-Carlo excess-risk estimate with exact conditional companions.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport<T> {
    /// Excess risk of the replication-0 realization.
    pub excess_risk: T,
    /// Exact conditional bias for the fixed designs (`None` when designs are
    /// redrawn). Under [`Resample::NoiseAndBeta`] this is the prior-averaged
    /// bias, so the decomposition identity still holds in expectation.
    pub cond_bias: Option<T>,
    /// Exact conditional variance for the fixed designs.
    pub cond_var: Option<T>,
    /// `(1/M) sum_m |<b*, (Sigma - S_m) b*>|` with `S_m` the shard empirical
    /// covariance (fixed-design modes only) — the diagnostic majorant from
    /// the high-probability analysis. It dominates `cond_bias` only on that
    /// analysis' concentration event, not on every realization.
    pub bias_envelope: Option<T>,
    /// Mean excess risk over replications.
    pub mc_mean: T,
    /// Standard error of the mean (0 when `reps == 1`).
    pub mc_stderr: T,
    /// Number of replications.
    pub reps: usize,
    /// Number of shards.
    pub m: usize,
    /// Resampling policy the estimates were computed under.
    pub resample: Resample,
}

fn weighted_sq_norm<T: Real>(spectrum: &Spectrum<T>, v: &DVector<T>) -> Result<T> {
    if v.len() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            context: "vector length vs spectrum dimension",
            expected: spectrum.dim(),
            got: v.len(),
        });
    }
    let lambdas = spectrum.values();
    let mut acc = Kahan::new();
    for j in 0..v.len() {
        acc.add(lambdas[j] * v[j] * v[j]);
    }
    Ok(acc.value())
}

/// `sum_j lambda_j (beta_j - beta*_j)^2`, the prediction-risk gap.
pub fn excess_risk<T: Real + RealField + Copy>(
    beta: &DVector<T>,
    beta_star: &DVector<T>,
    spectrum: &Spectrum<T>,
) -> Result<T> {
    if beta.len() != beta_star.len() {
        return Err(Error::DimensionMismatch {
            context: "estimate length vs target length",
            expected: beta_star.len(),
            got: beta.len(),
        });
    }
    weighted_sq_norm(spectrum, &(beta - beta_star))
}

/// Exact conditional bias of the averaged estimator:
/// the weighted squared norm of `(1/M) sum_m (I - P_m) beta*`.
pub fn conditional_bias<T: Real + RealField + Copy>(
    solvers: &[MinNormSolver<T>],
    beta_star: &DVector<T>,
    spectrum: &Spectrum<T>,
) -> Result<T> {
    if solvers.is_empty() {
        return Err(Error::Empty("shard solvers"));
    }
    let mut mean = DVector::zeros(beta_star.len());
    for s in solvers {
        mean += s.apply_nullspace(beta_star)?;
    }
    mean /= T::from_count(solvers.len());
    weighted_sq_norm(spectrum, &mean)
}

/// Average null-space projector `I - (1/M) sum_m V_m' V_m` as a dense matrix.
pub fn average_nullspace_projector<T: Real + RealField + Copy>(
    solvers: &[MinNormSolver<T>],
) -> Result<DMatrix<T>> {
    if solvers.is_empty() {
        return Err(Error::Empty("shard solvers"));
    }
    let d = solvers[0].shape().1;
    let mut avg = DMatrix::zeros(d, d);
    for s in solvers {
        if s.shape().1 != d {
            return Err(Error::DimensionMismatch {
                context: "shard column counts",
                expected: d,
                got: s.shape().1,
            });
        }
        avg += s.nullspace_projector();
    }
    avg /= T::from_count(solvers.len());
    Ok(avg)
}

/// Conditional bias averaged over a centered target prior with diagonal
/// covariance `theta`: `sum_k theta_k ||Sigma^{1/2} Pbar e_k||^2`.
pub fn expected_conditional_bias<T: Real + RealField + Copy>(
    solvers: &[MinNormSolver<T>],
    theta: &DVector<T>,
    spectrum: &Spectrum<T>,
) -> Result<T> {
    let pbar = average_nullspace_projector(solvers)?;
    let d = pbar.ncols();
    if theta.len() != d || spectrum.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "prior/spectrum dimension vs designs",
            expected: d,
            got: if theta.len() != d {
                theta.len()
            } else {
                spectrum.dim()
            },
        });
    }
    let lambdas = spectrum.values();
    let mut acc = Kahan::new();
    for k in 0..d {
        let mut col = T::zero();
        for j in 0..d {
            let p = pbar[(j, k)];
            col += lambdas[j] * p * p;
        }
        acc.add(theta[k] * col);
    }
    Ok(acc.value())
}

/// Exact conditional variance `(tau^2/M^2) sum_m Tr[(X_m^+)' Sigma X_m^+]`.
pub fn conditional_variance<T: Real + RealField + Copy>(
    solvers: &[MinNormSolver<T>],
    spectrum: &Spectrum<T>,
    tau: T,
) -> Result<T> {
    if solvers.is_empty() {
        return Err(Error::Empty("shard solvers"));
    }
    if !tau.is_finite() || tau < T::zero() {
        return Err(Error::invalid("tau", format!("must be finite and >= 0, got {tau}")));
    }
    let mut acc = Kahan::new();
    for s in solvers {
        acc.add(s.variance_trace(spectrum)?);
    }
    let m = T::from_count(solvers.len());
    Ok(tau * tau / (m * m) * acc.value())
}

/// `(1/M) sum_m |<beta*, (Sigma - S_m) beta*>|` where `S_m = X_m' X_m / b_m`,
/// the bias diagnostic from the high-probability analysis. This majorizes the
/// conditional bias on the concentration event that analysis works under, but
/// not pointwise; see [`per_shard_bias`] for a realization-wise upper bound.
pub fn bias_envelope<T: Real>(
    x: &DMatrix<T>,
    plan: &SplitPlan,
    beta_star: &DVector<T>,
    spectrum: &Spectrum<T>,
) -> Result<T>
where
    T: RealField + Copy,
{
    let weighted = weighted_sq_norm(spectrum, beta_star)?;
    let mut acc = Kahan::new();
    for r in plan.shards() {
        let b = T::from_count(r.end - r.start);
        let xb = x.rows(r.start, r.end - r.start) * beta_star;
        acc.add(Float::abs(weighted - xb.norm_squared() / b));
    }
    Ok(acc.value() / T::from_count(plan.m))
}

/// `(1/M) sum_m ||Sigma^{1/2} (I - P_m) beta*||^2` — the per-shard bias mean.
/// By convexity this dominates the conditional bias on every realization.
pub fn per_shard_bias<T: Real + RealField + Copy>(
    solvers: &[MinNormSolver<T>],
    beta_star: &DVector<T>,
    spectrum: &Spectrum<T>,
) -> Result<T> {
    if solvers.is_empty() {
        return Err(Error::Empty("shard solvers"));
    }
    let mut acc = Kahan::new();
    for s in solvers {
        acc.add(weighted_sq_norm(spectrum, &s.apply_nullspace(beta_star)?)?);
    }
    Ok(acc.value() / T::from_count(solvers.len()))
}

/// Ratio `risk_single / risk_m`, the relative prediction efficiency.
pub fn efficiency<T: Real>(risk_single: T, risk_m: T) -> Result<T> {
    if !(risk_m > T::zero()) {
        return Err(Error::UndefinedRatio(
            "efficiency denominator (distributed risk) must be positive",
        ));
    }
    Ok(risk_single / risk_m)
}

/// Compensated sample mean and its standard error (zero for one value).
pub fn mean_and_stderr<T: Real>(values: &[T]) -> (T, T) {
    let n = T::from_count(values.len());
    let mut acc = Kahan::new();
    for &v in values {
        acc.add(v);
    }
    let mean = acc.value() / n;
    if values.len() == 1 {
        return (mean, T::zero());
    }
    let mut sq = Kahan::new();
    for &v in values {
        let d = v - mean;
        sq.add(d * d);
    }
    let var = sq.value() / (n - T::one());
    (mean, Float::sqrt(var / n))
}

/// Averaged-estimator coefficients for one realization, via retained solvers.
pub fn average_fit<T: Real + RealField + Copy>(
    solvers: &[MinNormSolver<T>],
    plan: &SplitPlan,
    y: &DVector<T>,
) -> Result<DVector<T>> {
    let d = solvers[0].shape().1;
    let mut beta_bar = DVector::zeros(d);
    for (s, r) in solvers.iter().zip(plan.shards()) {
        let fit = s.fit(&y.rows(r.start, r.end - r.start).into_owned())?;
        beta_bar += fit.beta_hat;
    }
    beta_bar /= T::from_count(solvers.len());
    Ok(beta_bar)
}

/// Monte-Carlo excess risk of the `m`-shard averaged estimator under the
/// given resampling policy. Designs are generated once and factored once for
/// the fixed-design policies; replications run in parallel and are reduced in
/// replication order, so results do not depend on the thread count.
pub fn monte_carlo_risk<T>(
    config: &ModelConfig<T>,
    m: usize,
    reps: usize,
    resample: Resample,
) -> Result<RiskReport<T>>
where
    T: Real + RealField + Copy,
    StandardNormal: Distribution<T>,
{
    config.validate()?;
    if reps == 0 {
        return Err(Error::invalid("reps", "must be >= 1"));
    }
    let plan = split(config.n, m, false)?;
    let spectrum = config.spectrum.as_ref();

    let (risks, fixed): (Vec<T>, Option<(DMatrix<T>, Vec<MinNormSolver<T>>)>) = match resample {
        Resample::Full => {
            let risks = (0..reps)
                .into_par_iter()
                .map(|rep| -> Result<T> {
                    let data = config.generate(rep as u64)?;
                    let solvers = shard_solvers(&data.x, &plan, None)?;
                    let beta_bar = average_fit(&solvers, &plan, &data.y)?;
                    excess_risk(&beta_bar, &data.beta_star, spectrum)
                })
                .collect::<Result<Vec<_>>>()?;
            (risks, None)
        }
        Resample::NoiseOnly | Resample::NoiseAndBeta => {
            let x = config.sample_design(0);
            let solvers = shard_solvers(&x, &plan, None)?;
            let beta0 = config.sample_beta_star(0);
            let mean0 = &x * &beta0;
            let redraw_beta = resample == Resample::NoiseAndBeta;
            let risks = (0..reps)
                .into_par_iter()
                .map(|rep| -> Result<T> {
                    let rep = rep as u64;
                    let (beta_star, mean) = if redraw_beta && rep > 0 {
                        let b = config.sample_beta_star(rep);
                        let mu = &x * &b;
                        (b, mu)
                    } else {
                        (beta0.clone(), mean0.clone())
                    };
                    let y = mean + config.sample_noise(rep);
                    let beta_bar = average_fit(&solvers, &plan, &y)?;
                    excess_risk(&beta_bar, &beta_star, spectrum)
                })
                .collect::<Result<Vec<_>>>()?;
            (risks, Some((x, solvers)))
        }
    };

    let (mc_mean, mc_stderr) = mean_and_stderr(&risks);
    if !Float::is_finite(mc_mean) {
        return Err(Error::NonFinite("Monte-Carlo mean excess risk"));
    }

    let (cond_bias, cond_var, env) = match &fixed {
        None => (None, None, None),
        Some((x, solvers)) => {
            let beta0 = config.sample_beta_star(0);
            let bias = match resample {
                Resample::NoiseAndBeta => {
                    let theta = DVector::from_vec(config.theta_diagonal());
                    expected_conditional_bias(solvers, &theta, spectrum)?
                }
                _ => conditional_bias(solvers, &beta0, spectrum)?,
            };
            let var = conditional_variance(solvers, spectrum, config.tau)?;
            let env = match resample {
                Resample::NoiseOnly => Some(bias_envelope(x, &plan, &beta0, spectrum)?),
                _ => None,
            };
            (Some(bias), Some(var), env)
        }
    };

    Ok(RiskReport {
        excess_risk: risks[0],
        cond_bias,
        cond_var,
        bias_envelope: env,
        mc_mean,
        mc_stderr,
        reps,
        m,
        resample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Prior;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
        DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
    }

    fn isotropic(d: usize) -> Spectrum<f64> {
        Spectrum::explicit(vec![1.0; d]).unwrap()
    }

    #[test]
    fn excess_risk_examples() {
        let s = isotropic(2);
        let b = DVector::from_column_slice(&[3.0, 4.0]);
        let z = DVector::zeros(2);
        assert_relative_eq!(excess_risk(&b, &b, &s).unwrap(), 0.0);
        assert_relative_eq!(excess_risk(&b, &z, &s).unwrap(), 25.0, max_relative = 1e-15);

        let sw = Spectrum::strong_weak(1, 2, 0.5).unwrap();
        let ones = DVector::from_column_slice(&[1.0, 1.0]);
        assert_relative_eq!(
            excess_risk(&ones, &z, &sw).unwrap(),
            1.5,
            max_relative = 1e-15
        );

        assert!(excess_risk(&b, &DVector::zeros(3), &s).is_err());
        assert!(excess_risk(&DVector::zeros(3), &DVector::zeros(3), &s).is_err());
    }

    #[test]
    fn conditional_bias_vanishes_for_full_column_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (n, d, m) = (24usize, 6usize, 3usize);
        let x = random_matrix(&mut rng, n, d);
        let plan = split(n, m, false).unwrap();
        let solvers = shard_solvers(&x, &plan, None).unwrap();
        let beta = random_vector(&mut rng, d);
        let bias = conditional_bias(&solvers, &beta, &isotropic(d)).unwrap();
        assert!(bias <= 1e-12, "bias {bias} should vanish when b >= d");

        let zero = DVector::zeros(d);
        assert_eq!(conditional_bias(&solvers, &zero, &isotropic(d)).unwrap(), 0.0);
    }

    #[test]
    fn conditional_bias_matches_dense_projector_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (b, d) = (5usize, 8usize);
        let x = random_matrix(&mut rng, b, d);
        let beta = random_vector(&mut rng, d);
        let lambdas: Vec<f64> = {
            let mut l: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..2.0)).collect();
            l.sort_by(|p, q| q.partial_cmp(p).unwrap());
            l
        };
        let spectrum = Spectrum::explicit(lambdas.clone()).unwrap();
        let plan = split(b, 1, false).unwrap();
        let solvers = shard_solvers(&x, &plan, None).unwrap();
        let fast = conditional_bias(&solvers, &beta, &spectrum).unwrap();

        // Dense oracle through the normal equations, not the retained SVD.
        let pinv = x.transpose() * (&x * x.transpose()).try_inverse().unwrap();
        let proj = DMatrix::<f64>::identity(d, d) - pinv * &x;
        let v = proj * &beta;
        let dense: f64 = (0..d).map(|j| lambdas[j] * v[j] * v[j]).sum();
        assert_relative_eq!(fast, dense, max_relative = 1e-10);
    }

    #[test]
    fn expected_conditional_bias_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (n, d, m) = (6usize, 10usize, 2usize);
        let x = random_matrix(&mut rng, n, d);
        let plan = split(n, m, false).unwrap();
        let solvers = shard_solvers(&x, &plan, None).unwrap();
        let spectrum = isotropic(d);
        let theta = DVector::from_fn(d, |j, _| 0.1 + 0.05 * j as f64);

        let exact = expected_conditional_bias(&solvers, &theta, &spectrum).unwrap();
        let reps = 4000;
        let mut acc = 0.0;
        let mut sq = 0.0;
        for _ in 0..reps {
            let beta = DVector::from_fn(d, |j, _| {
                theta[j].sqrt() * rng.sample::<f64, _>(StandardNormal)
            });
            let v = conditional_bias(&solvers, &beta, &spectrum).unwrap();
            acc += v;
            sq += v * v;
        }
        let mean = acc / reps as f64;
        let se = ((sq / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!(
            (exact - mean).abs() <= 5.0 * se,
            "exact {exact} vs MC {mean} +- {se}"
        );
    }

    #[test]
    fn conditional_variance_examples() {
        let n = 5;
        let x = DMatrix::<f64>::identity(n, n);
        let plan = split(n, 1, false).unwrap();
        let solvers = shard_solvers(&x, &plan, None).unwrap();
        let s = isotropic(n);
        let tau = 0.7;
        assert_relative_eq!(
            conditional_variance(&solvers, &s, tau).unwrap(),
            tau * tau * n as f64,
            max_relative = 1e-12
        );
        assert_eq!(conditional_variance(&solvers, &s, 0.0).unwrap(), 0.0);
        assert!(conditional_variance(&solvers, &s, -1.0).is_err());
    }

    #[test]
    fn conditional_variance_matches_noise_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (n, d, m, tau) = (16usize, 24usize, 2usize, 0.7f64);
        let x = random_matrix(&mut rng, n, d);
        let beta = random_vector(&mut rng, d);
        let plan = split(n, m, false).unwrap();
        let solvers = shard_solvers(&x, &plan, None).unwrap();
        let spectrum = isotropic(d);
        let exact = conditional_variance(&solvers, &spectrum, tau).unwrap();

        let mean_y = &x * &beta;
        let center = average_fit(&solvers, &plan, &mean_y).unwrap();
        let draws = 10_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let noise = DVector::from_fn(n, |_, _| tau * rng.sample::<f64, _>(StandardNormal));
            let beta_bar = average_fit(&solvers, &plan, &(&mean_y + noise)).unwrap();
            acc += excess_risk(&beta_bar, &center, &spectrum).unwrap();
        }
        let mc = acc / draws as f64;
        assert_relative_eq!(mc, exact, max_relative = 0.05);
    }

    fn small_config(n: usize, d: usize, tau: f64, seed: u64) -> ModelConfig<f64> {
        ModelConfig::new(
            isotropic(d),
            n,
            tau,
            Prior::RandomEffects { snr: 1.0 },
            seed,
        )
    }

    #[test]
    fn noiseless_underparameterized_recovery() {
        let config = small_config(32, 8, 0.0, 42);
        let report = monte_carlo_risk(&config, 2, 1, Resample::NoiseOnly).unwrap();
        assert!(report.excess_risk <= 1e-18, "risk {}", report.excess_risk);
        assert_eq!(report.mc_stderr, 0.0);
        assert!(report.cond_bias.unwrap() <= 1e-18);
        assert_eq!(report.cond_var.unwrap(), 0.0);
        assert_eq!(report.reps, 1);
    }

    #[test]
    fn decomposition_identity_noise_only() {
        let config = small_config(40, 60, 1.0, 7);
        let report = monte_carlo_risk(&config, 2, 2000, Resample::NoiseOnly).unwrap();
        let predicted = report.cond_bias.unwrap() + report.cond_var.unwrap();
        let gap = (report.mc_mean - predicted).abs();
        let tol = (0.05 * predicted).max(4.0 * report.mc_stderr);
        assert!(
            gap <= tol,
            "mc {} vs bias+var {predicted}, gap {gap}, tol {tol}",
            report.mc_mean
        );
        let env = report.bias_envelope.unwrap();
        assert!(env.is_finite() && env >= 0.0);
    }

    #[test]
    fn decomposition_identity_noise_and_beta() {
        let config = small_config(30, 45, 0.5, 8);
        let report = monte_carlo_risk(&config, 3, 3000, Resample::NoiseAndBeta).unwrap();
        let predicted = report.cond_bias.unwrap() + report.cond_var.unwrap();
        let gap = (report.mc_mean - predicted).abs();
        let tol = (0.05 * predicted).max(4.0 * report.mc_stderr);
        assert!(
            gap <= tol,
            "mc {} vs expected bias+var {predicted}, gap {gap}, tol {tol}",
            report.mc_mean
        );
    }

    #[test]
    fn full_resampling_reports_no_conditional_fields() {
        let config = small_config(12, 18, 1.0, 9);
        let report = monte_carlo_risk(&config, 2, 3, Resample::Full).unwrap();
        assert!(report.cond_bias.is_none());
        assert!(report.cond_var.is_none());
        assert!(report.bias_envelope.is_none());
        assert!(report.mc_mean.is_finite());
        assert_eq!(report.reps, 3);
    }

    #[test]
    fn monte_carlo_is_thread_count_invariant() {
        let config = small_config(24, 36, 1.0, 3);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| monte_carlo_risk(&config, 2, 64, Resample::Full).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.mc_mean.to_bits(), b.mc_mean.to_bits());
        assert_eq!(a.mc_stderr.to_bits(), b.mc_stderr.to_bits());
        assert_eq!(a.excess_risk.to_bits(), b.excess_risk.to_bits());
    }

    #[test]
    fn per_shard_bias_dominates_on_every_realization() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for trial in 0..10 {
            let (n, d, m) = (20usize, 30usize, 2usize);
            let x = random_matrix(&mut rng, n, d);
            let beta = random_vector(&mut rng, d);
            let plan = split(n, m, false).unwrap();
            let solvers = shard_solvers(&x, &plan, None).unwrap();
            let spectrum = isotropic(d);
            let bias = conditional_bias(&solvers, &beta, &spectrum).unwrap();
            let upper = per_shard_bias(&solvers, &beta, &spectrum).unwrap();
            assert!(
                bias <= upper * (1.0 + 1e-9) + 1e-12,
                "trial {trial}: bias {bias} > per-shard mean {upper}"
            );
            let env = bias_envelope(&x, &plan, &beta, &spectrum).unwrap();
            assert!(env.is_finite() && env >= 0.0);
        }
    }

    #[test]
    fn efficiency_examples() {
        assert_relative_eq!(efficiency(2.0, 1.0).unwrap(), 2.0);
        assert_relative_eq!(efficiency(1.5, 1.5).unwrap(), 1.0);
        assert!(efficiency(1.0, 0.0).is_err());
        assert!(efficiency(1.0, -1.0).is_err());
    }

    #[test]
    fn rejects_bad_replication_counts_and_splits() {
        let config = small_config(10, 4, 1.0, 1);
        assert!(monte_carlo_risk(&config, 1, 0, Resample::Full).is_err());
        assert!(monte_carlo_risk(&config, 3, 2, Resample::Full).is_err());
    }
}
