//! Covariance spectrum models and effective-rank / effective-dimension
//! machinery.
//!
//! A [`Spectrum`] is a non-increasing sequence of positive eigenvalues of the
//! population covariance, either finite (explicit list, strong/weak two-level
//! model) or infinite (polynomial decay). Infinite spectra are materialized up
//! to a working dimension; every aggregate (trace, tail sums, effective ranks)
//! adds the analytic remainder of the infinite tail via an Euler–Maclaurin
//! expansion, so rank quantities are exact to machine precision rather than
//! truncated. The remainder is reported separately so callers can see how much
//! mass lives beyond the working dimension.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default working dimension for infinite spectra.
pub const DEFAULT_TRUNC_DIM: usize = 100_000;

/// Generative law of the eigenvalue sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Decay<T> {
    /// `lambda_j = j^-(1+eps)`, an infinite spectrum.
    Polynomial { eps: T },
    /// `num_strong` eigenvalues at 1, the remaining `dim - num_strong`
    /// at `rho_weak`.
    StrongWeak { num_strong: usize, rho_weak: T },
    /// Eigenvalues given verbatim.
    Explicit,
}

/// Non-increasing positive eigenvalue sequence with precomputed prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    decay: Decay<T>,
    values: Vec<T>,
    /// `prefix[i]` = compensated sum of the first `i` eigenvalues.
    prefix: Vec<T>,
    /// `prefix_sq[i]` = compensated sum of the first `i` squared eigenvalues.
    prefix_sq: Vec<T>,
}

/// Effective ranks at a split index `k`, with the tail sums they derive from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRankReport<T> {
    /// Split index (number of leading eigenvalues excluded from the tail).
    pub k: usize,
    /// `r_k = (sum_{j>k} lambda_j) / lambda_{k+1}`.
    pub r: T,
    /// `R_k = (sum_{j>k} lambda_j)^2 / sum_{j>k} lambda_j^2`.
    pub big_r: T,
    /// `sum_{j>k} lambda_j`, infinite tail included.
    pub tail_sum: T,
    /// `sum_{j>k} lambda_j^2`, infinite tail included.
    pub tail_sq_sum: T,
    /// Portion of `tail_sum` beyond the working dimension.
    pub beyond_working_dim: T,
}

/// Result of the effective-dimension scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveDim {
    /// Smallest k with `r_k >= a * n_local`.
    Finite(usize),
    /// No admissible k within the working dimension.
    Infinite,
}

impl EffectiveDim {
    /// The finite value, if any.
    pub fn value(self) -> Option<usize> {
        match self {
            EffectiveDim::Finite(k) => Some(k),
            EffectiveDim::Infinite => None,
        }
    }
}

/// Compensated (Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Kahan<T> {
    pub(crate) fn new() -> Self {
        Kahan {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub(crate) fn add(&mut self, x: T) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> T {
        self.sum
    }
}

/// `sum_{j > n} j^-s` for `s > 1` via Euler–Maclaurin, summing explicitly up
/// to index 64 first so the five expansion terms always start far enough out
/// to stay below ~1e-14 relative error.
fn power_tail<T: Real>(n: usize, s: T) -> T {
    const ANCHOR: usize = 64;
    let mut head = Kahan::new();
    let mut start = n;
    while start < ANCHOR {
        start += 1;
        head.add(T::from_count(start).powf(-s));
    }
    let a = T::from_count(start + 1);
    let one = T::one();
    let int_term = a.powf(one - s) / (s - one);
    let half_term = a.powf(-s) / T::from_count(2);
    let d1 = s * a.powf(-s - one) / T::from_count(12);
    let d3 = s * (s + one) * (s + T::from_count(2)) * a.powf(-s - T::from_count(3))
        / T::from_count(720);
    let d5 = s
        * (s + one)
        * (s + T::from_count(2))
        * (s + T::from_count(3))
        * (s + T::from_count(4))
        * a.powf(-s - T::from_count(5))
        / T::from_count(30_240);
    head.value() + int_term + half_term + d1 - d3 + d5
}

impl<T: Real> Spectrum<T> {
    fn build(decay: Decay<T>, values: Vec<T>) -> Self {
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let mut prefix_sq = Vec::with_capacity(values.len() + 1);
        let mut acc = Kahan::new();
        let mut acc_sq = Kahan::new();
        prefix.push(T::zero());
        prefix_sq.push(T::zero());
        for &v in &values {
            acc.add(v);
            acc_sq.add(v * v);
            prefix.push(acc.value());
            prefix_sq.push(acc_sq.value());
        }
        Spectrum {
            decay,
            values,
            prefix,
            prefix_sq,
        }
    }

    /// Polynomially decaying spectrum `lambda_j = j^-(1+eps)`, materialized up
    /// to `trunc_dim`.
    pub fn polynomial_decay(eps: T, trunc_dim: usize) -> Result<Self> {
        if !eps.is_finite() || eps <= T::zero() {
            return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
        }
        if trunc_dim == 0 {
            return Err(Error::invalid("trunc_dim", "must be >= 1"));
        }
        let s = T::one() + eps;
        let values = (1..=trunc_dim)
            .map(|j| T::from_count(j).powf(-s))
            .collect();
        Ok(Self::build(Decay::Polynomial { eps }, values))
    }

    /// Two-level spectrum: `num_strong` eigenvalues at 1, the remaining
    /// `dim - num_strong` at `rho_weak`.
    pub fn strong_weak(num_strong: usize, dim: usize, rho_weak: T) -> Result<Self> {
        if num_strong == 0 || num_strong > dim {
            return Err(Error::invalid(
                "num_strong",
                format!("must satisfy 1 <= num_strong <= dim ({num_strong} vs dim {dim})"),
            ));
        }
        if !rho_weak.is_finite() || rho_weak <= T::zero() || rho_weak > T::one() {
            return Err(Error::invalid(
                "rho_weak",
                format!("must lie in (0, 1], got {rho_weak}"),
            ));
        }
        let mut values = vec![T::one(); dim];
        for v in values.iter_mut().skip(num_strong) {
            *v = rho_weak;
        }
        Ok(Self::build(
            Decay::StrongWeak {
                num_strong,
                rho_weak,
            },
            values,
        ))
    }

    /// Spectrum given as an explicit eigenvalue list.
    pub fn explicit(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("eigenvalue list"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite("eigenvalue list"));
            }
            if v <= T::zero() {
                return Err(Error::invalid(
                    "values",
                    format!("eigenvalue {} is {v}, must be > 0", i + 1),
                ));
            }
            if i > 0 && v > values[i - 1] {
                return Err(Error::invalid(
                    "values",
                    format!("eigenvalues must be non-increasing, violated at index {}", i + 1),
                ));
            }
        }
        Ok(Self::build(Decay::Explicit, values))
    }

    /// Load an explicit spectrum from a one-column CSV file (one positive
    /// eigenvalue per line, non-increasing, no header).
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                reason: format!("expected a real number, got {line:?}: {e}"),
            })?;
            values.push(T::from_f64(v).ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                reason: format!("{v} not representable in the scalar type"),
            })?);
        }
        Self::explicit(values)
    }

    /// The generative law.
    pub fn decay(&self) -> &Decay<T> {
        &self.decay
    }

    /// Working dimension (number of materialized eigenvalues).
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Materialized eigenvalues in order.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `lambda_j` for 1-based `j` within the working dimension.
    pub fn eigenvalue(&self, j: usize) -> Result<T> {
        if j == 0 || j > self.values.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: self.values.len(),
            });
        }
        Ok(self.values[j - 1])
    }

    /// Analytic mass of the infinite tail beyond the working dimension
    /// (zero for finite spectra). This mass is *included* in every tail sum
    /// and trace below.
    pub fn beyond_working_dim(&self) -> T {
        match &self.decay {
            Decay::Polynomial { eps } => power_tail(self.values.len(), T::one() + *eps),
            _ => T::zero(),
        }
    }

    /// Analytic squared-eigenvalue mass beyond the working dimension.
    pub fn beyond_working_dim_sq(&self) -> T {
        match &self.decay {
            Decay::Polynomial { eps } => {
                let two = T::from_count(2);
                power_tail(self.values.len(), two * (T::one() + *eps))
            }
            _ => T::zero(),
        }
    }

    /// `sum_{j > k} lambda_j`, infinite tail included.
    pub fn tail_sum(&self, k: usize) -> Result<T> {
        let dim = self.values.len();
        if k > dim {
            return Err(Error::IndexOutOfRange { index: k, max: dim });
        }
        Ok(self.prefix[dim] - self.prefix[k] + self.beyond_working_dim())
    }

    /// `sum_{j > k} lambda_j^2`, infinite tail included.
    pub fn tail_sq_sum(&self, k: usize) -> Result<T> {
        let dim = self.values.len();
        if k > dim {
            return Err(Error::IndexOutOfRange { index: k, max: dim });
        }
        Ok(self.prefix_sq[dim] - self.prefix_sq[k] + self.beyond_working_dim_sq())
    }

    /// `sum_j lambda_j^(1+alpha)` with the infinite tail included for
    /// polynomially decaying spectra.
    pub fn weighted_trace(&self, alpha: T) -> Result<T> {
        if !alpha.is_finite() || alpha < T::zero() {
            return Err(Error::invalid("alpha", format!("must be >= 0, got {alpha}")));
        }
        if alpha == T::zero() {
            return self.tail_sum(0);
        }
        let p = T::one() + alpha;
        let mut acc = Kahan::new();
        for &v in &self.values {
            acc.add(v.powf(p));
        }
        let tail = match &self.decay {
            Decay::Polynomial { eps } => power_tail(self.values.len(), (T::one() + *eps) * p),
            _ => T::zero(),
        };
        Ok(acc.value() + tail)
    }

    fn rank_report(&self, k: usize) -> Result<EffectiveRankReport<T>> {
        let dim = self.values.len();
        if k >= dim {
            return Err(Error::IndexOutOfRange {
                index: k + 1,
                max: dim,
            });
        }
        let tail_sum = self.tail_sum(k)?;
        let tail_sq_sum = self.tail_sq_sum(k)?;
        let lambda_next = self.values[k];
        Ok(EffectiveRankReport {
            k,
            r: tail_sum / lambda_next,
            big_r: tail_sum * tail_sum / tail_sq_sum,
            tail_sum,
            tail_sq_sum,
            beyond_working_dim: self.beyond_working_dim(),
        })
    }

    /// Effective rank `r_k = (sum_{j>k} lambda_j) / lambda_{k+1}`.
    ///
    /// Requires `k + 1` to lie within the working dimension; the positivity
    /// invariant then makes both ranks well defined, so the report carries
    /// `R_k` as well.
    pub fn effective_rank_r(&self, k: usize) -> Result<EffectiveRankReport<T>> {
        self.rank_report(k)
    }

    /// Effective rank `R_k = (sum_{j>k} lambda_j)^2 / sum_{j>k} lambda_j^2`.
    pub fn effective_rank_big_r(&self, k: usize) -> Result<EffectiveRankReport<T>> {
        self.rank_report(k)
    }

    /// Smallest `k >= 0` with `r_k >= a * n_local`, or
    /// [`EffectiveDim::Infinite`] if no such `k` exists within the working
    /// dimension. Linear scan over the precomputed prefix sums.
    pub fn effective_dimension(&self, n_local: usize, a: T) -> Result<EffectiveDim> {
        if n_local == 0 {
            return Err(Error::invalid("n_local", "must be >= 1"));
        }
        self.effective_dimension_at(T::from_count(n_local), a)
    }

    /// [`Spectrum::effective_dimension`] with a real-valued local sample size,
    /// for bound evaluation on grids where `n / M` is treated continuously.
    pub fn effective_dimension_at(&self, n_local: T, a: T) -> Result<EffectiveDim> {
        if !a.is_finite() || a <= T::one() {
            return Err(Error::invalid("a", format!("must be > 1, got {a}")));
        }
        if !n_local.is_finite() || n_local <= T::zero() {
            return Err(Error::invalid(
                "n_local",
                format!("must be > 0, got {n_local}"),
            ));
        }
        let dim = self.values.len();
        let threshold = a * n_local;
        let total = self.prefix[dim] + self.beyond_working_dim();
        // `tail` carries a sub-ulp-of-`total` cancellation error, so a
        // configuration whose exact tail sits exactly on the threshold
        // (e.g. a two-level spectrum with `(d - k) rho = a n_local rho`)
        // can land just below it in floats; the tolerance keeps such
        // boundary cases on the admissible side.
        let tol = T::from_f64(16.0).unwrap() * T::epsilon() * total;
        for k in 0..dim {
            let tail = total - self.prefix[k];
            if tail + tol >= threshold * self.values[k] {
                return Ok(EffectiveDim::Finite(k));
            }
        }
        Ok(EffectiveDim::Infinite)
    }
}
