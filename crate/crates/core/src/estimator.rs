//! Local minimum-norm interpolation and the averaged distributed estimator.
//!
//! Each worker owns one shard `(X_m, Y_m)` and returns the minimum-norm
//! least-squares solution `X_m^+ Y_m`, computed from a singular value
//! decomposition with relative rank truncation. The coordinator averages the
//! local coefficient vectors uniformly. [`MinNormSolver`] retains the
//! factorization so repeated solves, projectors, and the covariance-weighted
//! pseudoinverse trace reuse a single decomposition.

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::simulate::SplitPlan;
use crate::spectra::Spectrum;

/// Relative residual threshold below which a fit counts as interpolating.
pub const INTERP_TOL: f64 = 1e-8;

/// Outcome of one local minimum-norm fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit<T> {
    /// Minimum-norm least-squares coefficients.
    pub beta_hat: DVector<T>,
    /// Number of singular values kept by the relative truncation rule.
    pub numerical_rank: usize,
    /// Largest singular value of the shard design.
    pub sv_max: T,
    /// Smallest kept singular value (zero when nothing is kept).
    pub sv_min_kept: T,
    /// `||X beta_hat - Y||`.
    pub residual_norm: T,
    /// Whether `residual_norm <= INTERP_TOL * ||Y||`.
    pub interpolates: bool,
}

/// Uniform average of local fits.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedEstimator<T> {
    /// Componentwise mean of the local coefficient vectors, in shard order.
    pub beta_bar: DVector<T>,
    /// Number of averaged workers.
    pub m: usize,
    /// The local fits, in shard order.
    pub local_fits: Vec<LocalFit<T>>,
}

/// Retained SVD of one shard design.
#[derive(Debug, Clone)]
pub struct MinNormSolver<T: RealField> {
    u: DMatrix<T>,
    v_t: DMatrix<T>,
    sv: DVector<T>,
    /// Indices of singular values kept by the truncation rule.
    kept: Vec<usize>,
    sv_max: T,
    nrows: usize,
    ncols: usize,
}

fn check_finite<T: Real>(name: &'static str, it: impl IntoIterator<Item = T>) -> Result<()> {
    for v in it {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    Ok(())
}

impl<T: Real + RealField + Copy> MinNormSolver<T> {
    /// Factor a shard design. `rank_tol` is the relative singular value
    /// cutoff; the default is `max(nrows, ncols) * machine_epsilon`.
    pub fn new(x: &DMatrix<T>, rank_tol: Option<T>) -> Result<Self> {
        let (nrows, ncols) = x.shape();
        if nrows == 0 || ncols == 0 {
            return Err(Error::Empty("design matrix"));
        }
        check_finite("design matrix", x.iter().copied())?;
        let tol = match rank_tol {
            Some(t) => {
                if !Float::is_finite(t) || t < T::zero() {
                    return Err(Error::invalid(
                        "rank_tol",
                        format!("must be finite and >= 0, got {t}"),
                    ));
                }
                t
            }
            None => T::from_count(nrows.max(ncols)) * Float::epsilon(),
        };
        let svd = x.clone().svd(true, true);
        let u = svd.u.expect("svd requested u");
        let v_t = svd.v_t.expect("svd requested v_t");
        let sv = svd.singular_values;
        let sv_max = sv.iter().copied().fold(T::zero(), |a, b| Float::max(a, b));
        let cutoff = tol * sv_max;
        let kept = (0..sv.len())
            .filter(|&i| sv[i] > cutoff || (sv[i] == sv_max && sv_max > T::zero()))
            .collect();
        Ok(MinNormSolver {
            u,
            v_t,
            sv,
            kept,
            sv_max,
            nrows,
            ncols,
        })
    }

    /// Shard shape.
    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    /// Numerical rank under the truncation rule.
    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Minimum-norm least-squares solution for the response `y`.
    pub fn fit(&self, y: &DVector<T>) -> Result<LocalFit<T>> {
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                context: "response length vs shard rows",
                expected: self.nrows,
                got: y.len(),
            });
        }
        check_finite("response", y.iter().copied())?;
        // beta = sum_{i kept} v_i (u_i' y) / s_i ; the fitted values are
        // X beta = sum_{i kept} u_i (u_i' y), so the residual norm follows
        // from the same projections without re-touching X.
        let mut beta = DVector::zeros(self.ncols);
        let mut fitted = DVector::zeros(self.nrows);
        let mut sv_min_kept = T::zero();
        for &i in &self.kept {
            let ui = self.u.column(i);
            let w = ui.dot(y);
            beta.axpy(w / self.sv[i], &self.v_t.row(i).transpose(), T::one());
            fitted.axpy(w, &ui, T::one());
            sv_min_kept = if sv_min_kept == T::zero() {
                self.sv[i]
            } else {
                Float::min(sv_min_kept, self.sv[i])
            };
        }
        let residual_norm = (y - &fitted).norm();
        let interp_tol = T::from_f64(INTERP_TOL).unwrap();
        Ok(LocalFit {
            interpolates: residual_norm <= interp_tol * y.norm(),
            beta_hat: beta,
            numerical_rank: self.kept.len(),
            sv_max: self.sv_max,
            sv_min_kept,
            residual_norm,
        })
    }

    /// Orthogonal projector onto the row space of the shard design
    /// (`P = X^+ X`, symmetric and idempotent).
    pub fn rowspace_projector(&self) -> DMatrix<T> {
        let mut p = DMatrix::zeros(self.ncols, self.ncols);
        for &i in &self.kept {
            let vi = self.v_t.row(i).transpose();
            p.ger(T::one(), &vi, &vi, T::one());
        }
        p
    }

    /// Orthogonal projector onto the null space of the shard design
    /// (`I - X^+ X`).
    pub fn nullspace_projector(&self) -> DMatrix<T> {
        let mut p = self.rowspace_projector();
        p.neg_mut();
        for i in 0..self.ncols {
            p[(i, i)] += T::one();
        }
        p
    }

    /// Apply the null-space projector without materializing it:
    /// `v - V_kept (V_kept' v)`.
    pub fn apply_nullspace(&self, v: &DVector<T>) -> Result<DVector<T>> {
        if v.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                context: "vector length vs design columns",
                expected: self.ncols,
                got: v.len(),
            });
        }
        let mut out = v.clone();
        for &i in &self.kept {
            let vi = self.v_t.row(i).transpose();
            let w = vi.dot(v);
            out.axpy(-w, &vi, T::one());
        }
        Ok(out)
    }

    /// `Tr[(X^+)' Sigma X^+]` for a diagonal `Sigma` given by the spectrum,
    /// computed as `sum_i s_i^-2 sum_j lambda_j V[j,i]^2` so the `d x d`
    /// product is never formed.
    pub fn variance_trace(&self, spectrum: &Spectrum<T>) -> Result<T> {
        if spectrum.dim() != self.ncols {
            return Err(Error::DimensionMismatch {
                context: "spectrum dimension vs design columns",
                expected: self.ncols,
                got: spectrum.dim(),
            });
        }
        let lambdas = spectrum.values();
        let mut total = T::zero();
        for &i in &self.kept {
            let mut weighted = T::zero();
            for j in 0..self.ncols {
                let vij = self.v_t[(i, j)];
                weighted += lambdas[j] * vij * vij;
            }
            total += weighted / (self.sv[i] * self.sv[i]);
        }
        Ok(total)
    }
}

/// Minimum-norm least-squares fit of one shard.
pub fn min_norm_fit<T: Real + RealField + Copy>(
    x: &DMatrix<T>,
    y: &DVector<T>,
    rank_tol: Option<T>,
) -> Result<LocalFit<T>> {
    MinNormSolver::new(x, rank_tol)?.fit(y)
}

/// Orthogonal projector onto the row space of `x`.
pub fn rowspace_projector<T: Real + RealField + Copy>(x: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(MinNormSolver::new(x, None)?.rowspace_projector())
}

/// Orthogonal projector onto the null space of `x`.
pub fn nullspace_projector<T: Real + RealField + Copy>(x: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(MinNormSolver::new(x, None)?.nullspace_projector())
}

/// Covariance-weighted pseudoinverse trace of one shard design.
pub fn variance_matrix_trace<T: Real + RealField + Copy>(
    x: &DMatrix<T>,
    spectrum: &Spectrum<T>,
) -> Result<T> {
    MinNormSolver::new(x, None)?.variance_trace(spectrum)
}

/// Uniform componentwise average of local fits, in shard order.
pub fn average<T: Real + RealField + Copy>(fits: Vec<LocalFit<T>>) -> Result<AveragedEstimator<T>> {
    if fits.is_empty() {
        return Err(Error::Empty("local fits"));
    }
    let dim = fits[0].beta_hat.len();
    for f in &fits {
        if f.beta_hat.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "local fit dimensions",
                expected: dim,
                got: f.beta_hat.len(),
            });
        }
    }
    let mut beta_bar = DVector::zeros(dim);
    for f in &fits {
        beta_bar += &f.beta_hat;
    }
    beta_bar /= T::from_count(fits.len());
    Ok(AveragedEstimator {
        beta_bar,
        m: fits.len(),
        local_fits: fits,
    })
}

/// Factor every shard of a split design.
pub fn shard_solvers<T: Real + RealField + Copy>(
    x: &DMatrix<T>,
    plan: &SplitPlan,
    rank_tol: Option<T>,
) -> Result<Vec<MinNormSolver<T>>> {
    if x.nrows() < plan.used {
        return Err(Error::DimensionMismatch {
            context: "design rows vs split plan",
            expected: plan.used,
            got: x.nrows(),
        });
    }
    plan.shards()
        .map(|r| MinNormSolver::new(&x.rows(r.start, r.end - r.start).into_owned(), rank_tol))
        .collect()
}

/// Distributed fit: split, solve every shard, average.
pub fn fit_split<T: Real + RealField + Copy>(
    x: &DMatrix<T>,
    y: &DVector<T>,
    plan: &SplitPlan,
    rank_tol: Option<T>,
) -> Result<AveragedEstimator<T>> {
    let solvers = shard_solvers(x, plan, rank_tol)?;
    let fits = solvers
        .iter()
        .zip(plan.shards())
        .map(|(s, r)| s.fit(&y.rows(r.start, r.end - r.start).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    average(fits)
}
