//! Synthetic data generation for the distributed regression experiments.
//!
//! Designs are drawn directly in the eigenbasis of the population covariance:
//! entry `(i, j)` of the design matrix is `N(0, lambda_j)`. Coefficient priors
//! cover the random-effects model, Hölder source conditions, general source
//! functions, and a fixed vector. All sampling flows through counter-style
//! RNG streams derived from `(seed, purpose, replication, row)`, so a dataset
//! is a pure function of `(config, seed, rep)`: changing the shard count or
//! the thread count never changes a sampled value, only its grouping.

use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectra::Spectrum;

/// Source function `phi` applied to the covariance eigenvalues in the
/// general-source prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFunction {
    /// `phi(t) = t`: signal aligned with strong directions (easy case).
    Identity,
    /// `phi(t) = 1`: isotropic prior.
    Constant,
    /// `phi(t) = 1/t`: signal concentrated on weak directions (hard case).
    Inverse,
}

impl SourceFunction {
    /// Evaluate the source function at `t > 0`.
    pub fn eval<T: Real>(self, t: T) -> T {
        match self {
            SourceFunction::Identity => t,
            SourceFunction::Constant => T::one(),
            SourceFunction::Inverse => T::one() / t,
        }
    }
}

/// Distribution of the true coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior<T> {
    /// Independent coordinates with variance `snr * tau^2 / d`, so that
    /// `E||beta*||^2 / tau^2 = snr`.
    RandomEffects { snr: T },
    /// Hölder source condition: coordinate `j` has variance
    /// `(r2 / d) * lambda_j^alpha`.
    SourceCondition { alpha: T, r2: T },
    /// General source condition: coordinate `j` has variance
    /// `(r2 / d) * phi(lambda_j)`.
    GeneralSource { phi: SourceFunction, r2: T },
    /// Deterministic coefficient vector.
    FixedVector(Vec<T>),
}

/// Full description of one simulated regression problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig<T> {
    /// Population covariance spectrum; its working dimension is the model
    /// dimension `d`.
    pub spectrum: Arc<Spectrum<T>>,
    /// Total sample size.
    pub n: usize,
    /// Noise standard deviation.
    pub tau: T,
    /// Coefficient prior.
    pub prior: Prior<T>,
    /// Master seed; all streams are derived from it.
    pub seed: u64,
    /// Compatibility switch: give random-effects coordinates variance
    /// `snr / d` instead of `snr * tau^2 / d`.
    pub theta_ignores_tau: bool,
}

/// One realized dataset. `y = mean + noise` holds bitwise, where `mean` is
/// the stored realization of `X beta*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub x: DMatrix<T>,
    pub y: DVector<T>,
    pub beta_star: DVector<T>,
    pub noise: DVector<T>,
    pub mean: DVector<T>,
    pub config: ModelConfig<T>,
}

/// Partition of `0..used` into `m` equal contiguous shards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPlan {
    pub n: usize,
    pub m: usize,
    pub shard_len: usize,
    /// Number of leading samples covered by the shards (`< n` only when
    /// truncation was requested).
    pub used: usize,
}

impl SplitPlan {
    /// Row range of shard `i` (0-based).
    pub fn shard(&self, i: usize) -> Range<usize> {
        debug_assert!(i < self.m);
        i * self.shard_len..(i + 1) * self.shard_len
    }

    /// All shard ranges in order.
    pub fn shards(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.m).map(|i| self.shard(i))
    }
}

/// Split `n` samples into `m` equal contiguous shards.
///
/// Without `allow_truncation` the shard count must divide `n` exactly; the
/// error names the largest feasible count `<= m`. With it, the trailing
/// `n mod m` samples are dropped.
pub fn split(n: usize, m: usize, allow_truncation: bool) -> Result<SplitPlan> {
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    if m > n {
        return Err(Error::invalid(
            "m",
            format!("cannot split n = {n} samples into {m} non-empty shards"),
        ));
    }
    if n % m != 0 && !allow_truncation {
        let suggestion = (1..=m).rev().find(|k| n % k == 0).unwrap_or(1);
        return Err(Error::Indivisible { n, m, suggestion });
    }
    let shard_len = n / m;
    Ok(SplitPlan {
        n,
        m,
        shard_len,
        used: shard_len * m,
    })
}

/// Stream purposes; each (purpose, rep, unit) triple owns an independent
/// generator.
#[derive(Debug, Clone, Copy)]
enum StreamKind {
    BetaStar = 1,
    Design = 2,
    Noise = 3,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent generator for `(seed, kind, rep, unit)`.
fn stream(seed: u64, kind: StreamKind, rep: u64, unit: u64) -> ChaCha8Rng {
    let mut state = seed ^ (kind as u64).wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    let a = splitmix64(&mut state);
    state ^= rep.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    let b = splitmix64(&mut state);
    state ^= unit.wrapping_mul(0x8EBC_6AF0_9C88_C6E3);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    key[0..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

impl<T: Real + nalgebra::Scalar + std::ops::AddAssign + std::ops::MulAssign> ModelConfig<T>
where
    StandardNormal: Distribution<T>,
{
    /// Convenience constructor wrapping the spectrum.
    pub fn new(spectrum: Spectrum<T>, n: usize, tau: T, prior: Prior<T>, seed: u64) -> Self {
        ModelConfig {
            spectrum: Arc::new(spectrum),
            n,
            tau,
            prior,
            seed,
            theta_ignores_tau: false,
        }
    }

    /// Model dimension.
    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Check every parameter against its domain.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if !self.tau.is_finite() || self.tau < T::zero() {
            return Err(Error::invalid(
                "tau",
                format!("must be finite and >= 0, got {}", self.tau),
            ));
        }
        match &self.prior {
            Prior::RandomEffects { snr } => {
                if !snr.is_finite() || *snr < T::zero() {
                    return Err(Error::invalid("snr", format!("must be >= 0, got {snr}")));
                }
            }
            Prior::SourceCondition { alpha, r2 } => {
                if !alpha.is_finite() || *alpha < T::zero() {
                    return Err(Error::invalid("alpha", format!("must be >= 0, got {alpha}")));
                }
                if !r2.is_finite() || *r2 < T::zero() {
                    return Err(Error::invalid("r2", format!("must be >= 0, got {r2}")));
                }
            }
            Prior::GeneralSource { r2, .. } => {
                if !r2.is_finite() || *r2 < T::zero() {
                    return Err(Error::invalid("r2", format!("must be >= 0, got {r2}")));
                }
            }
            Prior::FixedVector(values) => {
                if values.len() != self.dim() {
                    return Err(Error::DimensionMismatch {
                        context: "fixed coefficient vector vs model dimension",
                        expected: self.dim(),
                        got: values.len(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("fixed coefficient vector"));
                }
            }
        }
        Ok(())
    }

    /// Per-coordinate prior standard deviations (zero vector lengths for the
    /// fixed prior are handled by `sample_beta_star` directly).
    fn prior_sd(&self) -> Vec<T> {
        let d = T::from_count(self.dim());
        let lambdas = self.spectrum.values();
        match &self.prior {
            Prior::RandomEffects { snr } => {
                let var = if self.theta_ignores_tau {
                    *snr / d
                } else {
                    *snr * self.tau * self.tau / d
                };
                vec![var.sqrt(); self.dim()]
            }
            Prior::SourceCondition { alpha, r2 } => lambdas
                .iter()
                .map(|&l| (*r2 / d * l.powf(*alpha)).sqrt())
                .collect(),
            Prior::GeneralSource { phi, r2 } => lambdas
                .iter()
                .map(|&l| (*r2 / d * phi.eval(l)).sqrt())
                .collect(),
            Prior::FixedVector(_) => Vec::new(),
        }
    }

    /// Diagonal of the prior second-moment matrix `Theta` (the realized
    /// outer-product diagonal for the fixed prior).
    pub fn theta_diagonal(&self) -> Vec<T> {
        match &self.prior {
            Prior::FixedVector(values) => values.iter().map(|&v| v * v).collect(),
            _ => self.prior_sd().into_iter().map(|s| s * s).collect(),
        }
    }

    /// `Tr[Sigma Theta]` over the model dimension.
    pub fn trace_sigma_theta(&self) -> T {
        self.spectrum
            .values()
            .iter()
            .zip(self.theta_diagonal())
            .map(|(&l, t)| l * t)
            .sum()
    }

    /// Draw the coefficient vector for replication `rep`.
    pub fn sample_beta_star(&self, rep: u64) -> DVector<T> {
        if let Prior::FixedVector(values) = &self.prior {
            return DVector::from_column_slice(values);
        }
        let sd = self.prior_sd();
        let mut rng = stream(self.seed, StreamKind::BetaStar, rep, 0);
        DVector::from_iterator(
            self.dim(),
            sd.iter().map(|&s| {
                let z: T = rng.sample(StandardNormal);
                z * s
            }),
        )
    }

    /// Draw the `n x d` design for replication `rep`; entry `(i, j)` is
    /// `N(0, lambda_j)`. Row `i` has its own derived stream, so any shard can
    /// be regenerated independently and the values do not depend on the
    /// shard count.
    pub fn sample_design(&self, rep: u64) -> DMatrix<T> {
        let d = self.dim();
        let sd: Vec<T> = self.spectrum.values().iter().map(|&l| l.sqrt()).collect();
        let mut buf = vec![T::zero(); self.n * d];
        for (i, row) in buf.chunks_mut(d).enumerate() {
            let mut rng = stream(self.seed, StreamKind::Design, rep, i as u64);
            for (j, slot) in row.iter_mut().enumerate() {
                let z: T = rng.sample(StandardNormal);
                *slot = z * sd[j];
            }
        }
        DMatrix::from_row_slice(self.n, d, &buf)
    }

    /// Draw the noise vector for replication `rep` (`N(0, tau^2)` per entry).
    pub fn sample_noise(&self, rep: u64) -> DVector<T> {
        DVector::from_iterator(
            self.n,
            (0..self.n).map(|i| {
                let mut rng = stream(self.seed, StreamKind::Noise, rep, i as u64);
                let z: T = rng.sample(StandardNormal);
                z * self.tau
            }),
        )
    }

    /// Generate the full dataset for replication `rep`.
    pub fn generate(&self, rep: u64) -> Result<Dataset<T>> {
        self.validate()?;
        let beta_star = self.sample_beta_star(rep);
        let x = self.sample_design(rep);
        let noise = self.sample_noise(rep);
        let mean = &x * &beta_star;
        let y = DVector::from_iterator(
            self.n,
            mean.iter().zip(noise.iter()).map(|(&m, &e)| m + e),
        );
        Ok(Dataset {
            x,
            y,
            beta_star,
            noise,
            mean,
            config: self.clone(),
        })
    }
}

impl<T: Real + nalgebra::Scalar + std::fmt::Debug> Dataset<T> {
    /// Dimension of the design.
    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Write the dataset as CSV with header `y,x1,...,xd`. Floats use the
    /// shortest representation that round-trips, so a dump is byte-stable.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let (n, d) = (self.x.nrows(), self.x.ncols());
        let mut out = String::new();
        out.push('y');
        for j in 1..=d {
            out.push_str(&format!(",x{j}"));
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&format!("{:?}", self.y[i]));
            for j in 0..d {
                out.push_str(&format!(",{:?}", self.x[(i, j)]));
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Read a dataset CSV written by [`Dataset::write_csv`]; returns the design
/// and response.
pub fn read_xy_csv<T: Real + nalgebra::Scalar>(
    path: impl AsRef<Path>,
) -> Result<(DMatrix<T>, DVector<T>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Empty("dataset csv"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"y") {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: format!("expected header starting with 'y', got {header:?}"),
        });
    }
    let d = cols.len() - 1;
    for (j, c) in cols.iter().skip(1).enumerate() {
        if *c != format!("x{}", j + 1) {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                reason: format!("expected column 'x{}', got {c:?}", j + 1),
            });
        }
    }
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                reason: format!("expected {} fields, got {}", d + 1, fields.len()),
            });
        }
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                reason: format!("field {}: {e}", c + 1),
            })?;
            let v = T::from_f64(v).ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                reason: format!("{v} not representable in the scalar type"),
            })?;
            if c == 0 {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    if ys.is_empty() {
        return Err(Error::Empty("dataset csv"));
    }
    Ok((
        DMatrix::from_row_slice(ys.len(), d, &xs),
        DVector::from_column_slice(&ys),
    ))
}
