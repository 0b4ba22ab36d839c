//! The direct conversion `g(t) = ∫_0^t A_n(y/t) q(y) dy`, its derivative, the cascade of
//! derivatives of `g̃(t) = t^{n+1} g'(t)`, and numerical integrability diagnostics.
//!
//! Every routine rejects `t <= 0`. The singular end `y -> 0` is handled by the geometric
//! panels of [`integrate_log_singular`], so no split point inside `(0, t)` is needed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};
use crate::funcspace::{Interpolation, SampledFunction};
use crate::function::{Fallible, RealFunction};
use crate::kernel::{kernel_value, KernelOrder};
use crate::numerics::finite_diff::central_difference;
use crate::numerics::{integrate_adaptive, integrate_log_singular, QuadratureConfig, TransformResult};
use crate::scalar::{falling_factorial, Scalar};

fn check_t<T: Scalar>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(domain_err!("t must be positive and finite, got {t}"))
    }
}

/// `g(t) = ∫_0^t A_n(y/t) q(y) dy`.
pub fn direct_transform<T, Q>(q: &Q, t: T, n: KernelOrder, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    check_t(t)?;
    let integrand = Fallible(|y: T| -> Result<T> {
        let qy = q.eval(y)?;
        if qy == T::zero() {
            return Ok(qy);
        }
        Ok(kernel_value(n, (y / t).min(T::one()))? * qy)
    });
    integrate_log_singular(&integrand, t, cfg)
}

/// A grid point the batch transform had to drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    pub index: usize,
    pub t: f64,
    pub reason: String,
}

/// `g` on the grid points whose quadrature succeeded, with the record of each.
#[derive(Debug, Clone)]
pub struct GridTransform<T> {
    pub t: Vec<T>,
    pub results: Vec<TransformResult<T>>,
    pub failures: Vec<GridFailure>,
}

impl<T: Scalar> GridTransform<T> {
    pub fn values(&self) -> Vec<T> {
        self.results.iter().map(|r| r.value).collect()
    }

    /// The kept samples as an interpolated function.
    pub fn to_sampled(&self, interpolation: Interpolation) -> Result<SampledFunction<T>> {
        SampledFunction::new(self.t.clone(), self.values(), interpolation)
    }
}

/// Largest fraction of grid points that may fail before the whole grid is rejected.
pub const MAX_GRID_FAILURE_FRACTION: f64 = 0.1;

/// [`direct_transform`] on every grid point, evaluated in parallel.
///
/// Points whose quadrature does not converge or meets a non-finite integrand value are
/// dropped and listed in `failures`; more than 10% of failing points is an error. Any other
/// error aborts the whole grid.
pub fn direct_transform_grid<T, Q>(
    q: &Q,
    grid: &[T],
    n: KernelOrder,
    cfg: &QuadratureConfig<T>,
) -> Result<GridTransform<T>>
where
    T: Scalar,
    Q: RealFunction<T> + Sync + ?Sized,
{
    if grid.is_empty() {
        return Err(domain_err!("empty grid"));
    }
    let per_point: Vec<Result<TransformResult<T>>> =
        grid.par_iter().map(|&t| direct_transform(q, t, n, cfg)).collect();

    let mut kept_t = Vec::with_capacity(grid.len());
    let mut results = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    let mut any_divergent = false;
    for (index, (&t, res)) in grid.iter().zip(per_point).enumerate() {
        let reason = match res {
            Ok(r) if r.converged => {
                kept_t.push(t);
                results.push(r);
                continue;
            }
            Ok(r) if r.diverged => {
                any_divergent = true;
                "quadrature flagged divergence".to_string()
            }
            Ok(r) => format!("quadrature did not converge (error estimate {})", r.error_estimate),
            Err(e @ Error::NonFinite { .. }) => e.to_string(),
            // Bad input, e.g. a sampled q queried outside its grid, is not a per-point failure.
            Err(e) => return Err(e),
        };
        log::warn!("direct transform failed at t = {t}: {reason}");
        failures.push(GridFailure {
            index,
            t: t.to_f64().unwrap_or(f64::NAN),
            reason,
        });
    }

    if failures.len() as f64 > MAX_GRID_FAILURE_FRACTION * grid.len() as f64 {
        let msg = format!("{} of {} grid points failed", failures.len(), grid.len());
        return Err(if any_divergent {
            Error::Divergent(msg)
        } else {
            Error::NotConverged(msg)
        });
    }
    Ok(GridTransform {
        t: kept_t,
        results,
        failures,
    })
}

/// `∫_0^t (t - y)^p q(y) dy`.
fn power_moment<T, Q>(q: &Q, t: T, p: usize, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    check_t(t)?;
    let integrand = Fallible(|y: T| -> Result<T> { Ok((t - y).powi(p as i32) * q.eval(y)?) });
    integrate_log_singular(&integrand, t, cfg)
}

/// `g̃(t) = t^{n+1} g'(t) = ∫_0^t (t - y)^n q(y) dy`.
pub fn tilde_g<T, Q>(q: &Q, t: T, n: KernelOrder, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    power_moment(q, t, n.get(), cfg)
}

/// `g'(t) = t^{-(n+1)} ∫_0^t (t - y)^n q(y) dy`, i.e. `∫_0^t ∂_t A_n(y/t) q(y) dy`.
pub fn g_prime<T, Q>(q: &Q, t: T, n: KernelOrder, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    let moment = tilde_g(q, t, n, cfg)?;
    Ok(moment.scaled(T::one() / t.powi(n.get() as i32 + 1)))
}

/// `d^k g̃/dt^k = n!/(n-k)! ∫_0^t (t - y)^{n-k} q(y) dy` for `0 <= k <= n`; at `k = n`
/// this is `n! ∫_0^t q`.
pub fn tilde_g_derivative<T, Q>(
    q: &Q,
    t: T,
    n: KernelOrder,
    k: usize,
    cfg: &QuadratureConfig<T>,
) -> Result<TransformResult<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    if k > n.get() {
        return Err(domain_err!(
            "derivative order {k} exceeds the kernel order {}",
            n.get()
        ));
    }
    let moment = power_moment(q, t, n.get() - k, cfg)?;
    Ok(moment.scaled(falling_factorial::<T>(n.get(), k)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrabilityVerdict {
    Finite,
    SuspectDivergent,
}

/// Numerical check that `∫_0^t q` and `∫_0^t |ln y| q` are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport<T> {
    pub q_integral: TransformResult<T>,
    pub log_weighted_integral: TransformResult<T>,
    pub verdict: IntegrabilityVerdict,
}

/// Evaluates both integrals by log-singular quadrature. A diagnostic only: a
/// `SuspectDivergent` verdict means the panel contributions toward 0 did not decay.
pub fn integrability_check<T, Q>(q: &Q, t: T, cfg: &QuadratureConfig<T>) -> Result<IntegrabilityReport<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    check_t(t)?;
    let q_integral = integrate_log_singular(q, t, cfg)?;
    let weighted = Fallible(|y: T| -> Result<T> { Ok(y.ln().abs() * q.eval(y)?) });
    // |ln y| has a kink at y = 1.
    let log_weighted_integral = if t <= T::one() {
        integrate_log_singular(&weighted, t, cfg)?
    } else {
        integrate_log_singular(&weighted, T::one(), cfg)?.combine(integrate_adaptive(&weighted, T::one(), t, cfg)?)
    };
    let verdict = if q_integral.converged && log_weighted_integral.converged {
        IntegrabilityVerdict::Finite
    } else {
        IntegrabilityVerdict::SuspectDivergent
    };
    Ok(IntegrabilityReport {
        q_integral,
        log_weighted_integral,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeConsistency<T> {
    /// `g'(t)` from the moment formula.
    pub analytic: T,
    /// Richardson-extrapolated central difference of `g`.
    pub numeric: T,
    pub rel_err: T,
}

/// Relative step of the central difference used by [`derivative_consistency`].
const CONSISTENCY_STEP: f64 = 0.02;

/// Compares `g'(t)` from the moment formula with a finite difference of `g` itself.
pub fn derivative_consistency<T, Q>(
    q: &Q,
    t: T,
    n: KernelOrder,
    cfg: &QuadratureConfig<T>,
) -> Result<DerivativeConsistency<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    check_t(t)?;
    let analytic = g_prime(q, t, n, cfg)?.value;
    let g = Fallible(|s: T| -> Result<T> { Ok(direct_transform(q, s, n, cfg)?.value) });
    let numeric = central_difference(&g, t, 1, t * T::lit(CONSISTENCY_STEP), 3)?;
    let rel_err = (analytic - numeric).abs() / analytic.abs().max(T::min_positive_value());
    Ok(DerivativeConsistency {
        analytic,
        numeric,
        rel_err: if analytic == numeric { T::zero() } else { rel_err },
    })
}
