//! Closed-form evaluators for the distributed ridgeless-regression bounds:
//! generic bias/variance upper bounds driven by effective ranks, polynomial
//! and two-level-spectrum specializations, optimal shard-count formulas with
//! brute-force-verifiable argmins, matching lower bounds, and efficiency
//! predictions. Every evaluator that has a modeling window reports it as a
//! boolean validity flag (never a hard error), with implied proportionality
//! constants taken as 1.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::simulate::SourceFunction;
use crate::spectra::{EffectiveDim, Spectrum, DEFAULT_TRUNC_DIM};

/// Configurable universal constants appearing in the bounds. The theory only
/// proves existence, so all default to 1 except the effective-dimension
/// threshold `a = 2`, the subgaussian norm `sigma_x = 1`, and the failure
/// probability `delta = 0.05`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants<T> {
    /// Bias-bound concentration constant (also gates the sample condition).
    pub c1: T,
    /// Variance-bound constant (nominally > 1; relaxed to 1 for curve shapes).
    pub c2: T,
    /// Bias constant in the combined two-term bounds.
    pub c3: T,
    /// Variance constant in the combined two-term bounds.
    pub c4: T,
    /// Lower-bound constant.
    pub c_a: T,
    /// Prefactor of the closed-form optimal shard count.
    pub c_prime: T,
    /// Effective-dimension threshold (`r_k >= a * local sample size`).
    pub a: T,
    /// Subgaussian norm of the design entries.
    pub sigma_x: T,
    /// Failure probability of the high-probability statements.
    pub delta: T,
}

impl<T: Real> Default for TheoryConstants<T> {
    fn default() -> Self {
        let one = T::one();
        TheoryConstants {
            c1: one,
            c2: one,
            c3: one,
            c4: one,
            c_a: one,
            c_prime: one,
            a: T::from_f64(2.0).unwrap(),
            sigma_x: one,
            delta: T::from_f64(0.05).unwrap(),
        }
    }
}

impl<T: Real> TheoryConstants<T> {
    /// Check positivity, `a > 1`, and `delta` in `(0, 1]`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("c_a", self.c_a),
            ("c_prime", self.c_prime),
            ("sigma_x", self.sigma_x),
        ] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.a.is_finite() || self.a <= T::one() {
            return Err(Error::invalid("a", format!("must be > 1, got {}", self.a)));
        }
        if !self.delta.is_finite() || self.delta <= T::zero() || self.delta > T::one() {
            return Err(Error::invalid(
                "delta",
                format!("must lie in (0, 1], got {}", self.delta),
            ));
        }
        Ok(())
    }

    /// One-line rendering of the constant vector, for provenance headers.
    pub fn describe(&self) -> String {
        format!(
            "c1={:?};c2={:?};c3={:?};c4={:?};c_a={:?};c_prime={:?};a={:?};sigma_x={:?};delta={:?}",
            self.c1,
            self.c2,
            self.c3,
            self.c4,
            self.c_a,
            self.c_prime,
            self.a,
            self.sigma_x,
            self.delta
        )
    }
}

/// Named boolean modeling-window flags attached to an evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidityFlags {
    entries: Vec<(&'static str, bool)>,
}

impl ValidityFlags {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &'static str, ok: bool) {
        self.entries.push((name, ok));
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|(_, v)| *v)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(&'static str, bool)] {
        &self.entries
    }

    /// `name=1;name=0` rendering for CSV cells; empty string when no flags.
    pub fn summary(&self) -> String {
        self.entries
            .iter()
            .map(|(n, v)| format!("{n}={}", u8::from(*v)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A value together with the validity flags of its modeling window.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated<T> {
    pub value: T,
    pub flags: ValidityFlags,
}

fn check_counts(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    Ok(())
}

fn check_nonneg<T: Real>(name: &'static str, v: T) -> Result<()> {
    if !v.is_finite() || v < T::zero() {
        return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

fn log_term<T: Real>(m: usize, delta: T) -> T {
    Float::sqrt(Float::ln(T::from_f64(2.0).unwrap() * T::from_count(m) / delta))
}

/// General bias upper bound
/// `(4 sigma_x / c1) * sqrt(log(2M/delta)) * Tr[Sigma Theta] * sqrt(M/n)`.
pub fn bias_bound_general<T: Real>(
    trace_sigma_theta: T,
    n: usize,
    m: usize,
    c: &TheoryConstants<T>,
) -> Result<T> {
    c.validate()?;
    check_counts(n, m)?;
    check_nonneg("trace_sigma_theta", trace_sigma_theta)?;
    let four = T::from_f64(4.0).unwrap();
    Ok(four * c.sigma_x / c.c1
        * log_term(m, c.delta)
        * trace_sigma_theta
        * Float::sqrt(T::from_count(m) / T::from_count(n)))
}

/// Whether the local sample size satisfies `n/M >= (1/c1) log(2/delta)`.
pub fn sample_condition_ok<T: Real>(n: usize, m: usize, c: &TheoryConstants<T>) -> bool {
    T::from_count(n) / T::from_count(m)
        >= Float::ln(T::from_f64(2.0).unwrap() / c.delta) / c.c1
}

fn effective_dim_local<T: Real>(
    spectrum: &Spectrum<T>,
    n: usize,
    m: usize,
    a: T,
) -> Result<usize> {
    let b = T::from_count(n) / T::from_count(m);
    match spectrum.effective_dimension_at(b, a)? {
        EffectiveDim::Finite(k) => Ok(k),
        EffectiveDim::Infinite => Err(Error::InfiniteEffectiveDimension {
            working_dim: spectrum.dim(),
        }),
    }
}

/// The shared variance/lower-bound bracket `k*/n + (n/M^2) / R_{k*}`, with
/// `k*` computed at local sample size `n/M`. Returns the bracket and `k*`.
pub fn risk_bracket<T: Real>(
    spectrum: &Spectrum<T>,
    n: usize,
    m: usize,
    c: &TheoryConstants<T>,
) -> Result<(T, usize)> {
    c.validate()?;
    check_counts(n, m)?;
    let k = effective_dim_local(spectrum, n, m, c.a)?;
    let big_r = spectrum.effective_rank_big_r(k)?.big_r;
    let nr = T::from_count(n);
    let mr = T::from_count(m);
    Ok((T::from_count(k) / nr + nr / (mr * mr) / big_r, k))
}

/// General variance upper bound `8 c2 tau^2 * (k*/n + (n/M^2)/R_{k*})`.
/// Errors when the effective dimension is infinite (flat spectrum tail).
pub fn variance_bound_general<T: Real>(
    spectrum: &Spectrum<T>,
    n: usize,
    m: usize,
    tau: T,
    c: &TheoryConstants<T>,
) -> Result<T> {
    check_nonneg("tau", tau)?;
    let (bracket, _) = risk_bracket(spectrum, n, m, c)?;
    Ok(T::from_f64(8.0).unwrap() * c.c2 * tau * tau * bracket)
}

/// Whether `k* <= n / (c2 M)`, the regime the variance bound is proven in.
pub fn k_star_condition_ok<T: Real>(
    spectrum: &Spectrum<T>,
    n: usize,
    m: usize,
    c: &TheoryConstants<T>,
) -> Result<bool> {
    c.validate()?;
    check_counts(n, m)?;
    let k = effective_dim_local(spectrum, n, m, c.a)?;
    Ok(T::from_count(k) <= T::from_count(n) / (c.c2 * T::from_count(m)))
}

/// Smoothness-dependent constant: `1/alpha` for `alpha > 0`, `1/eps` at
/// `alpha = 0`.
pub fn c_alpha_n<T: Real>(alpha: T, eps: T) -> Result<T> {
    check_nonneg("alpha", alpha)?;
    if alpha > T::zero() {
        Ok(T::one() / alpha)
    } else {
        if !eps.is_finite() || eps <= T::zero() {
            return Err(Error::invalid(
                "eps",
                format!("must be > 0 when alpha = 0, got {eps}"),
            ));
        }
        Ok(T::one() / eps)
    }
}

/// Two-term total bound for polynomial eigenvalue decay:
/// `c3 sigma_x sqrt(log(2M/delta)) C_{alpha} sqrt(M/n) + c4 tau^2 eps / M`.
pub fn poly_total_bound<T: Real>(
    alpha: T,
    eps: T,
    n: usize,
    m: usize,
    tau: T,
    c: &TheoryConstants<T>,
) -> Result<T> {
    c.validate()?;
    check_counts(n, m)?;
    check_nonneg("tau", tau)?;
    if !eps.is_finite() || eps <= T::zero() {
        return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
    }
    let ca = c_alpha_n(alpha, eps)?;
    let mr = T::from_count(m);
    let bias = c.c3 * c.sigma_x * log_term(m, c.delta) * ca
        * Float::sqrt(mr / T::from_count(n));
    let var = c.c4 * tau * tau * eps / mr;
    Ok(bias + var)
}

/// Whether `eps` lies in the window the polynomial optimum is derived for:
/// `1/sqrt(n) <= eps <= n` for `alpha > 0`, the same window for `eps^2` at
/// `alpha = 0` (implied constants 1).
pub fn poly_eps_window_ok<T: Real>(alpha: T, eps: T, n: usize) -> bool {
    let nr = T::from_count(n);
    let lo = T::one() / Float::sqrt(nr);
    let e = if alpha > T::zero() { eps } else { eps * eps };
    e >= lo && e <= nr
}

/// Closed-form optimal shard count under polynomial decay:
/// `C (alpha eps sqrt(n))^{2/3}` for `alpha > 0`, `C (eps^2 sqrt(n))^{2/3}`
/// at `alpha = 0`, with `C = (c4 tau^2 / (c3 sigma_x))^{2/3}`. The returned
/// flags report the `eps` window.
pub fn optimal_m_poly<T: Real>(
    alpha: T,
    eps: T,
    n: usize,
    tau: T,
    c: &TheoryConstants<T>,
) -> Result<Evaluated<T>> {
    c.validate()?;
    check_counts(n, 1)?;
    check_nonneg("alpha", alpha)?;
    check_nonneg("tau", tau)?;
    if !eps.is_finite() || eps <= T::zero() {
        return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
    }
    let two_thirds = T::from_f64(2.0 / 3.0).unwrap();
    let prefactor = Float::powf(c.c4 * tau * tau / (c.c3 * c.sigma_x), two_thirds);
    let driver = if alpha > T::zero() { alpha * eps } else { eps * eps };
    let value = prefactor * Float::powf(driver * Float::sqrt(T::from_count(n)), two_thirds);
    let mut flags = ValidityFlags::new();
    flags.push("eps_window", poly_eps_window_ok(alpha, eps, n));
    Ok(Evaluated { value, flags })
}

/// Bias term of the two-level-spectrum bound:
/// `c3 sigma_x (snr/d) F sqrt(log(2M/delta)) sqrt(M/n)`.
pub fn finite_dim_bias_term<T: Real>(
    d: usize,
    f: usize,
    snr: T,
    n: usize,
    m: usize,
    c: &TheoryConstants<T>,
) -> Result<T> {
    c.validate()?;
    check_counts(n, m)?;
    check_nonneg("snr", snr)?;
    if d == 0 || f == 0 || f > d {
        return Err(Error::invalid("f", format!("need 1 <= F <= d, got F={f}, d={d}")));
    }
    Ok(c.c3 * c.sigma_x * snr / T::from_count(d) * T::from_count(f)
        * log_term(m, c.delta)
        * Float::sqrt(T::from_count(m) / T::from_count(n)))
}

/// Variance term of the two-level-spectrum bound:
/// `c4 tau^2 (1/(1-rho2)^2) (n/M^2) (1/F)`.
pub fn finite_dim_var_term<T: Real>(
    f: usize,
    rho2: T,
    n: usize,
    m: usize,
    tau: T,
    c: &TheoryConstants<T>,
) -> Result<T> {
    c.validate()?;
    check_counts(n, m)?;
    check_nonneg("tau", tau)?;
    if !rho2.is_finite() || rho2 < T::zero() || rho2 >= T::one() {
        return Err(Error::invalid("rho2", format!("must lie in [0, 1), got {rho2}")));
    }
    if f == 0 {
        return Err(Error::invalid("f", "must be >= 1"));
    }
    let gap = T::one() - rho2;
    let mr = T::from_count(m);
    Ok(c.c4 * tau * tau / (gap * gap) * T::from_count(n) / (mr * mr) / T::from_count(f))
}

/// Two-term total bound for the two-level spectrum (strong/weak features).
pub fn finite_dim_total_bound<T: Real>(
    d: usize,
    f: usize,
    snr: T,
    rho2: T,
    n: usize,
    m: usize,
    tau: T,
    c: &TheoryConstants<T>,
) -> Result<T> {
    Ok(finite_dim_bias_term(d, f, snr, n, m, c)? + finite_dim_var_term(f, rho2, n, m, tau, c)?)
}

/// Modeling-window flags of the two-level-spectrum bound:
/// (`a n/M < (1-rho2) F + rho2 d`, `rho2 d <= F`).
pub fn finite_dim_conditions<T: Real>(
    d: usize,
    f: usize,
    rho2: T,
    n: usize,
    m: usize,
    c: &TheoryConstants<T>,
) -> (bool, bool) {
    let local = c.a * T::from_count(n) / T::from_count(m);
    let mixed = (T::one() - rho2) * T::from_count(f) + rho2 * T::from_count(d);
    (local < mixed, rho2 * T::from_count(d) <= T::from_count(f))
}

/// Closed-form minimizer of `h(M) = C1 sqrt(M) + C2 / M^2`:
/// `M_opt = (4 C2/C1)^{2/5}`, `h(M_opt) = 5 C2 (C1/(4 C2))^{4/5}`.
pub fn argmin_h<T: Real>(c1: T, c2: T) -> Result<(T, T)> {
    for (name, v) in [("C1", c1), ("C2", c2)] {
        if !v.is_finite() || v <= T::zero() {
            return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let four = T::from_f64(4.0).unwrap();
    let m_opt = Float::powf(four * c2 / c1, T::from_f64(0.4).unwrap());
    let h_min = T::from_f64(5.0).unwrap() * c2 * Float::powf(c1 / (four * c2), T::from_f64(0.8).unwrap());
    Ok((m_opt, h_min))
}

/// Whether `(d, F, snr, n)` lie in the window the closed-form finite-dim
/// optimum is derived for: `snr/n^{3/2} <= d/F^2 <= snr * n`.
pub fn finite_window_ok<T: Real>(d: usize, f: usize, snr: T, n: usize) -> bool {
    let nr = T::from_count(n);
    let ratio = T::from_count(d) / (T::from_count(f) * T::from_count(f));
    let lo = snr / Float::powf(nr, T::from_f64(1.5).unwrap());
    ratio >= lo && ratio <= snr * nr
}

/// Closed-form optimal shard count for the two-level spectrum:
/// `c' (1/(1-rho2))^{4/5} (d n^{3/2} / (snr F^2))^{2/5}`.
pub fn optimal_m_finite<T: Real>(
    d: usize,
    f: usize,
    snr: T,
    rho2: T,
    n: usize,
    c: &TheoryConstants<T>,
) -> Result<Evaluated<T>> {
    c.validate()?;
    check_counts(n, 1)?;
    if d == 0 || f == 0 || f > d {
        return Err(Error::invalid("f", format!("need 1 <= F <= d, got F={f}, d={d}")));
    }
    if !snr.is_finite() || snr <= T::zero() {
        return Err(Error::invalid("snr", format!("must be > 0, got {snr}")));
    }
    if !rho2.is_finite() || rho2 < T::zero() || rho2 >= T::one() {
        return Err(Error::invalid("rho2", format!("must lie in [0, 1), got {rho2}")));
    }
    let two_fifths = T::from_f64(0.4).unwrap();
    let four_fifths = T::from_f64(0.8).unwrap();
    let nr = T::from_count(n);
    let base = T::from_count(d) * Float::powf(nr, T::from_f64(1.5).unwrap())
        / (snr * T::from_count(f) * T::from_count(f));
    let value =
        c.c_prime * Float::powf(T::one() / (T::one() - rho2), four_fifths) * Float::powf(base, two_fifths);
    let mut flags = ValidityFlags::new();
    flags.push("formula_window", finite_window_ok(d, f, snr, n));
    Ok(Evaluated { value, flags })
}

/// Whether the weak features carry little prior mass:
/// `rho2 * Phi(rho2) * d <= F`.
pub fn source_side_condition_ok<T: Real>(d: usize, f: usize, rho2: T, phi_at_rho2: T) -> bool {
    rho2 * phi_at_rho2 * T::from_count(d) <= T::from_count(f)
}

/// Closed-form optimal shard count under a general source prior on the
/// two-level spectrum with the strong eigenvalue normalized to 1:
/// `A (d n^{3/2} / (R^2 Delta F^2))^{2/5}` with `Delta = (1 - rho2)^2` and
/// `A = (4 c4 / (c3 C))^{2/5}`, `C = rho1 Phi(rho1) + 1 = phi(1) + 1`.
/// Flags: the weak-feature mass side condition and the formula window
/// `n^{-3/2} <= d/(Delta F^2) <= n`.
#[allow(clippy::too_many_arguments)]
pub fn optimal_m_general_source<T: Real>(
    d: usize,
    f: usize,
    r2: T,
    rho1_phi: T,
    rho2: T,
    phi_at_rho2: T,
    n: usize,
    c: &TheoryConstants<T>,
) -> Result<Evaluated<T>> {
    c.validate()?;
    check_counts(n, 1)?;
    if d == 0 || f == 0 || f > d {
        return Err(Error::invalid("f", format!("need 1 <= F <= d, got F={f}, d={d}")));
    }
    if !r2.is_finite() || r2 <= T::zero() {
        return Err(Error::invalid("r2", format!("must be > 0, got {r2}")));
    }
    if !rho2.is_finite() || rho2 < T::zero() || rho2 >= T::one() {
        return Err(Error::invalid("rho2", format!("must lie in [0, 1), got {rho2}")));
    }
    check_nonneg("rho1_phi", rho1_phi)?;
    check_nonneg("phi_at_rho2", phi_at_rho2)?;
    let two_fifths = T::from_f64(0.4).unwrap();
    let gap = T::one() - rho2;
    let delta_gap = gap * gap;
    let c_rho1 = rho1_phi + T::one();
    let four = T::from_f64(4.0).unwrap();
    let a = Float::powf(four * c.c4 / (c.c3 * c_rho1), two_fifths);
    let nr = T::from_count(n);
    let base = T::from_count(d) * Float::powf(nr, T::from_f64(1.5).unwrap())
        / (r2 * delta_gap * T::from_count(f) * T::from_count(f));
    let value = a * Float::powf(base, two_fifths);
    let mut flags = ValidityFlags::new();
    flags.push("weak_side", source_side_condition_ok(d, f, rho2, phi_at_rho2));
    let ratio = T::from_count(d) / (delta_gap * T::from_count(f) * T::from_count(f));
    let lo = Float::powf(nr, T::from_f64(-1.5).unwrap());
    flags.push("formula_window", ratio >= lo && ratio <= nr);
    Ok(Evaluated { value, flags })
}

/// [`optimal_m_general_source`] with the prior shape given as a
/// [`SourceFunction`]; adds a `hard_case_strong_mass` flag that is lowered
/// when the inverse shape is combined with `F < d` (that regime needs the
/// strong-feature count to grow with the dimension).
pub fn optimal_m_source<T: Real>(
    d: usize,
    f: usize,
    r2: T,
    phi: SourceFunction,
    rho2: T,
    n: usize,
    c: &TheoryConstants<T>,
) -> Result<Evaluated<T>> {
    let rho1_phi = phi.eval(T::one());
    let phi_at_rho2 = if rho2 > T::zero() {
        phi.eval(rho2)
    } else {
        // rho2 = 0: the weak mass condition is vacuous for every shape
        // (the product rho2 * Phi(rho2) tends to 0 for all supported shapes).
        T::zero()
    };
    let mut out = optimal_m_general_source(d, f, r2, rho1_phi, rho2, phi_at_rho2, n, c)?;
    out.flags.push(
        "hard_case_strong_mass",
        !(phi == SourceFunction::Inverse && f < d),
    );
    Ok(out)
}

/// Lower bound matching the variance bound's bracket:
/// `c_a sigma^2 (k*/n + (n/M^2)/R_{k*})`.
pub fn lower_bound_general<T: Real>(
    spectrum: &Spectrum<T>,
    n: usize,
    m: usize,
    sigma_noise: T,
    c: &TheoryConstants<T>,
) -> Result<T> {
    check_nonneg("sigma_noise", sigma_noise)?;
    let (bracket, _) = risk_bracket(spectrum, n, m, c)?;
    Ok(c.c_a * sigma_noise * sigma_noise * bracket)
}

/// Spectrum-free lower bound
/// `(tau~^2/M) min(d, b) / (max(d, b) + 1 - min(d, b))` with `b = n/M`,
/// which peaks at the interpolation threshold `d = n/M`.
pub fn universal_lower_bound<T: Real>(d: usize, n: usize, m: usize, tau_tilde: T) -> Result<T> {
    check_counts(n, m)?;
    if d == 0 {
        return Err(Error::invalid("d", "must be >= 1"));
    }
    check_nonneg("tau_tilde", tau_tilde)?;
    let b = T::from_count(n) / T::from_count(m);
    if b < T::one() {
        return Err(Error::invalid(
            "m",
            format!("local sample size n/M = {b} must be >= 1"),
        ));
    }
    let dr = T::from_count(d);
    let (lo, hi) = if dr <= b { (dr, b) } else { (b, dr) };
    Ok(tau_tilde * tau_tilde / T::from_count(m) * lo / (hi + T::one() - lo))
}

/// Which scaling regime an efficiency prediction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Two-level spectrum: efficiency at the optimum scales like `M_opt^2`.
    FiniteDim,
    /// Polynomial decay: efficiency at the optimum scales like `M_opt`.
    InfiniteDim,
}

/// Order-of-magnitude efficiency prediction at the optimal shard count.
pub fn efficiency_prediction<T: Real>(regime: Regime, m_opt: T) -> Result<T> {
    if !m_opt.is_finite() || m_opt < T::one() {
        return Err(Error::invalid("m_opt", format!("must be >= 1, got {m_opt}")));
    }
    Ok(match regime {
        Regime::FiniteDim => m_opt * m_opt,
        Regime::InfiniteDim => m_opt,
    })
}

/// Predicted risk-rate exponent in the joint limit `d ~ n^gamma`,
/// `F ~ n^delta` with unbounded shard counts: the risk scales like
/// `n^{-(1+delta)/5}`. Flags report the exponent windows
/// (`gamma > 1` overparameterization, `delta` in `(0, 5/4)`, and
/// `max(1, delta, 2 delta - 3/2) <= gamma <= 2 delta + 1`).
pub fn infinite_worker_rate_exponent<T: Real>(gamma: T, delta: T) -> Result<Evaluated<T>> {
    for (name, v) in [("gamma", gamma), ("delta", delta)] {
        if !v.is_finite() {
            return Err(Error::invalid(name, format!("must be finite, got {v}")));
        }
    }
    let value = (T::one() + delta) / T::from_f64(5.0).unwrap();
    let mut flags = ValidityFlags::new();
    flags.push("overparameterized", gamma > T::one());
    flags.push(
        "delta_window",
        delta > T::zero() && delta < T::from_f64(1.25).unwrap(),
    );
    let lo = Float::max(
        T::one(),
        Float::max(delta, delta + delta - T::from_f64(1.5).unwrap()),
    );
    flags.push("gamma_window", gamma >= lo && gamma <= delta + delta + T::one());
    Ok(Evaluated { value, flags })
}

/// Round a real optimal shard count to the divisor of `n` nearest in
/// log-scale (ties resolve to the smaller divisor).
pub fn round_to_divisor<T: Real>(n: usize, m_real: T) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    if !m_real.is_finite() || m_real <= T::zero() {
        return Err(Error::invalid("m_real", format!("must be > 0, got {m_real}")));
    }
    let target = Float::ln(m_real);
    // Distances within 1e-12 of each other count as ties (an exact tie is
    // not representable in floating point), and ties keep the smaller
    // divisor because candidates are scanned in ascending order.
    let tol = T::from_f64(1e-12).unwrap();
    let mut best = 1usize;
    let mut best_score = T::infinity();
    for div in 1..=n {
        if n % div != 0 {
            continue;
        }
        let score = Float::abs(Float::ln(T::from_count(div)) - target);
        if score + tol < best_score {
            best_score = score;
            best = div;
        }
    }
    Ok(best)
}

/// All divisors of `n`, ascending.
pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Per-shard-count theory evaluations over a grid of M values.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryCurve<T> {
    /// Shard-count grid.
    pub grid: Vec<usize>,
    /// Bias upper bound per grid point.
    pub bias_bound: Vec<T>,
    /// Variance upper bound per grid point.
    pub var_bound: Vec<T>,
    /// `bias_bound + var_bound` per grid point.
    pub total_bound: Vec<T>,
    /// Matching lower bound per grid point.
    pub lower_bound: Vec<T>,
    /// Modeling-window flags per grid point.
    pub flags: Vec<ValidityFlags>,
    /// Closed-form optimal shard count, when the setting has one.
    pub m_opt_formula: Option<T>,
    /// Grid value minimizing the total bound (ties resolve to the smaller M).
    pub m_opt_gridsearch: usize,
    /// Constant vector the curve was evaluated with.
    pub constants: TheoryConstants<T>,
}

fn grid_argmin<T: Real>(grid: &[usize], totals: &[T]) -> Result<usize> {
    let mut best = 0usize;
    for (i, v) in totals.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite("total bound on the shard grid"));
        }
        if *v < totals[best] {
            best = i;
        }
    }
    Ok(grid[best])
}

fn check_grid(grid: &[usize], n: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("shard-count grid"));
    }
    for &m in grid {
        if m == 0 || m > n {
            return Err(Error::invalid(
                "grid",
                format!("every M must satisfy 1 <= M <= n, got M={m} with n={n}"),
            ));
        }
    }
    Ok(())
}

impl<T: Real> TheoryCurve<T> {
    /// Generic spectrum curve: effective-rank-driven bias/variance upper
    /// bounds and the matching lower bound. No closed-form optimum.
    pub fn general(
        spectrum: &Spectrum<T>,
        trace_sigma_theta: T,
        n: usize,
        tau: T,
        sigma_noise: T,
        grid: &[usize],
        c: &TheoryConstants<T>,
    ) -> Result<Self> {
        c.validate()?;
        check_grid(grid, n)?;
        let mut curve = TheoryCurve::empty(grid, *c);
        for &m in grid {
            let bias = bias_bound_general(trace_sigma_theta, n, m, c)?;
            let var = variance_bound_general(spectrum, n, m, tau, c)?;
            let lower = lower_bound_general(spectrum, n, m, sigma_noise, c)?;
            let mut flags = ValidityFlags::new();
            flags.push("sample_ok", sample_condition_ok(n, m, c));
            flags.push("k_star_ok", k_star_condition_ok(spectrum, n, m, c)?);
            curve.push(m, bias, var, lower, flags);
        }
        curve.finish(None)
    }

    /// Two-level-spectrum curve with the closed-form optimum attached.
    #[allow(clippy::too_many_arguments)]
    pub fn finite_dim(
        d: usize,
        f: usize,
        snr: T,
        rho2: T,
        n: usize,
        tau: T,
        sigma_noise: T,
        grid: &[usize],
        c: &TheoryConstants<T>,
    ) -> Result<Self> {
        c.validate()?;
        check_grid(grid, n)?;
        let spectrum = Spectrum::strong_weak(f, d, if rho2 > T::zero() { rho2 } else { T::min_positive_value() })?;
        let mut curve = TheoryCurve::empty(grid, *c);
        for &m in grid {
            let bias = finite_dim_bias_term(d, f, snr, n, m, c)?;
            let var = finite_dim_var_term(f, rho2, n, m, tau, c)?;
            let lower = lower_bound_general(&spectrum, n, m, sigma_noise, c)?;
            let (cond_f, weak_mass) = finite_dim_conditions(d, f, rho2, n, m, c);
            let mut flags = ValidityFlags::new();
            flags.push("sample_ok", sample_condition_ok(n, m, c));
            flags.push("local_sample_ok", cond_f);
            flags.push("weak_mass_ok", weak_mass);
            curve.push(m, bias, var, lower, flags);
        }
        let m_opt = optimal_m_finite(d, f, snr, rho2, n, c)?.value;
        curve.finish(Some(m_opt))
    }

    /// Polynomial-decay curve with the closed-form optimum attached. The
    /// lower bound materializes the spectrum at `trunc_dim` coordinates
    /// (defaults to [`DEFAULT_TRUNC_DIM`] when `None`).
    #[allow(clippy::too_many_arguments)]
    pub fn polynomial(
        alpha: T,
        eps: T,
        n: usize,
        tau: T,
        sigma_noise: T,
        grid: &[usize],
        trunc_dim: Option<usize>,
        c: &TheoryConstants<T>,
    ) -> Result<Self> {
        c.validate()?;
        check_grid(grid, n)?;
        let spectrum = Spectrum::polynomial_decay(eps, trunc_dim.unwrap_or(DEFAULT_TRUNC_DIM))?;
        let ca = c_alpha_n(alpha, eps)?;
        let mut curve = TheoryCurve::empty(grid, *c);
        for &m in grid {
            let mr = T::from_count(m);
            let bias =
                c.c3 * c.sigma_x * log_term(m, c.delta) * ca * Float::sqrt(mr / T::from_count(n));
            let var = c.c4 * tau * tau * eps / mr;
            let lower = lower_bound_general(&spectrum, n, m, sigma_noise, c)?;
            let mut flags = ValidityFlags::new();
            flags.push("sample_ok", sample_condition_ok(n, m, c));
            flags.push("k_star_ok", k_star_condition_ok(&spectrum, n, m, c)?);
            flags.push("eps_window", poly_eps_window_ok(alpha, eps, n));
            curve.push(m, bias, var, lower, flags);
        }
        let m_opt = optimal_m_poly(alpha, eps, n, tau, c)?.value;
        curve.finish(Some(m_opt))
    }

    fn empty(grid: &[usize], constants: TheoryConstants<T>) -> Self {
        TheoryCurve {
            grid: Vec::with_capacity(grid.len()),
            bias_bound: Vec::with_capacity(grid.len()),
            var_bound: Vec::with_capacity(grid.len()),
            total_bound: Vec::with_capacity(grid.len()),
            lower_bound: Vec::with_capacity(grid.len()),
            flags: Vec::with_capacity(grid.len()),
            m_opt_formula: None,
            m_opt_gridsearch: 1,
            constants,
        }
    }

    fn push(&mut self, m: usize, bias: T, var: T, lower: T, flags: ValidityFlags) {
        self.grid.push(m);
        self.bias_bound.push(bias);
        self.var_bound.push(var);
        self.total_bound.push(bias + var);
        self.lower_bound.push(lower);
        self.flags.push(flags);
    }

    fn finish(mut self, m_opt_formula: Option<T>) -> Result<Self> {
        self.m_opt_formula = m_opt_formula;
        self.m_opt_gridsearch = grid_argmin(&self.grid, &self.total_bound)?;
        Ok(self)
    }
}
